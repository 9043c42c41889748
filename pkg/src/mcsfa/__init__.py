"""Slow features of ergodic Markov chains induced by goal-directed behavior.

The package builds finite spatial MDPs (linear graphs and 2D lattices),
derives behavior policies from the optimal value function, extracts the
optimal slow features of the induced Markov chains by solving a generalized
eigenvalue problem, applies scale / learning-rate-adaptation corrections,
and measures how well the features support linear value-function
approximation.
"""

from ._version import __version__
from .env import Environment, LatticeGeometry, LinearGeometry, birth_death_chain, make_lattice, make_linear
from .value import ValueSolution, value_iteration
from .policy import Policy, boltzmann, calibrate_beta, induce_chain, uniform_policy, zeta_greedy
from .chain import (
    MarkovChain,
    NonErgodicError,
    QuadraticForm,
    UnstableChainError,
    build_lra_form,
    build_quadratic_form,
    check_ergodic,
    make_chain,
    simulate,
    stationary,
)
from .spectral import SpectralBasis, general_rescale, objective_gradient, scale_correct, slowness, solve_mcsfa
from .regress import FitResult, compare, fit, symlog
from .harness import ConfigError, ExperimentResult, SweepConfig, emit_csv, run_sweep, write_manifest
from .plots import emit_plots

__all__ = [
    "Environment",
    "LinearGeometry",
    "LatticeGeometry",
    "make_linear",
    "make_lattice",
    "birth_death_chain",
    "ValueSolution",
    "value_iteration",
    "Policy",
    "zeta_greedy",
    "boltzmann",
    "calibrate_beta",
    "induce_chain",
    "uniform_policy",
    "MarkovChain",
    "QuadraticForm",
    "NonErgodicError",
    "UnstableChainError",
    "check_ergodic",
    "stationary",
    "make_chain",
    "build_quadratic_form",
    "build_lra_form",
    "simulate",
    "SpectralBasis",
    "solve_mcsfa",
    "slowness",
    "objective_gradient",
    "scale_correct",
    "general_rescale",
    "FitResult",
    "fit",
    "symlog",
    "compare",
    "SweepConfig",
    "ExperimentResult",
    "ConfigError",
    "run_sweep",
    "emit_csv",
    "write_manifest",
    "emit_plots",
    "__version__",
]
