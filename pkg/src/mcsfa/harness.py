"""Sweep configuration, execution, and artifact emission.

A sweep crosses directedness values, reward positions, feature counts, and
correction modes for one environment and one behavior family, recording the
fit quality of every cell. Cells whose induced chain is non-ergodic or too
concentrated are reported as skipped rather than failing the sweep.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._version import __version__
from .chain import (
    MarkovChain,
    NonErgodicError,
    QuadraticForm,
    UnstableChainError,
    build_lra_form,
    build_quadratic_form,
    make_chain,
)
from .env import Environment, make_lattice, make_linear
from .policy import boltzmann, calibrate_beta, induce_chain, zeta_greedy
from .regress import FitResult, fit
from .spectral import SpectralBasis, scale_correct, solve_mcsfa
from .value import ValueSolution, value_iteration

BEHAVIORS = ("zeta_greedy", "boltzmann")
CORRECTIONS = ("none", "scale", "lra")

DEFAULT_DIRECTEDNESS = tuple(round(0.40 + 0.02 * i, 2) for i in range(11))

CSV_HEADER = ("env", "behavior", "param", "reward", "e", "correction",
              "mse_uniform", "mse_weighted", "log_mse", "status")


class ConfigError(ValueError):
    """The sweep configuration is malformed."""


@dataclass(frozen=True)
class SweepConfig:
    env_kind: str                      # "linear" | "lattice"
    env_size: tuple[int, ...]          # (n,) or (width, height)
    behavior: str
    directedness_grid: tuple[float, ...]
    reward_positions: tuple[tuple[int, ...], ...]
    feature_counts: tuple[int, ...]
    corrections: tuple[str, ...] = ("none",)
    gamma: float = 0.95
    seed: int = 0

    @property
    def n_states(self) -> int:
        return int(np.prod(self.env_size))

    @property
    def env_name(self) -> str:
        if self.env_kind == "linear":
            return f"linear-{self.env_size[0]}"
        return f"lattice-{self.env_size[0]}x{self.env_size[1]}"

    def reward_label(self, position: tuple[int, ...]) -> str:
        if self.env_kind == "linear":
            return str(position[0])
        return f"{position[0]}x{position[1]}"

    def canonical_dict(self) -> dict:
        env: dict = {"kind": self.env_kind}
        if self.env_kind == "linear":
            env["n"] = self.env_size[0]
        else:
            env["width"], env["height"] = self.env_size
        return {
            "environment": env,
            "behavior": self.behavior,
            "directedness_grid": list(self.directedness_grid),
            "reward_positions": [list(p) if len(p) > 1 else p[0] for p in self.reward_positions],
            "feature_counts": list(self.feature_counts),
            "corrections": list(self.corrections),
            "gamma": self.gamma,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _expect_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def load_config(path: str | Path) -> SweepConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _expect_keys(raw, {"environment", "behavior", "directedness_grid", "reward_positions",
                       "feature_counts", "corrections", "gamma", "seed"}, "config")
    for key in ("environment", "behavior", "reward_positions", "feature_counts"):
        if key not in raw:
            raise ConfigError(f"missing required key '{key}'")

    env = raw["environment"]
    if not isinstance(env, dict) or "kind" not in env:
        raise ConfigError("environment must be an object with a 'kind'")
    kind = env["kind"]
    if kind == "linear":
        _expect_keys(env, {"kind", "n"}, "environment")
        if "n" not in env or not isinstance(env["n"], int) or env["n"] < 2:
            raise ConfigError("linear environment needs an integer n >= 2")
        size: tuple[int, ...] = (env["n"],)
    elif kind == "lattice":
        _expect_keys(env, {"kind", "width", "height"}, "environment")
        for dim in ("width", "height"):
            if dim not in env or not isinstance(env[dim], int) or env[dim] < 2:
                raise ConfigError(f"lattice environment needs integer {dim} >= 2")
        size = (env["width"], env["height"])
    else:
        raise ConfigError(f"unknown environment kind '{kind}'")
    n_states = int(np.prod(size))

    behavior = raw["behavior"]
    if behavior not in BEHAVIORS:
        raise ConfigError(f"behavior must be one of {BEHAVIORS}, got '{behavior}'")

    grid = tuple(raw.get("directedness_grid", DEFAULT_DIRECTEDNESS))
    if not grid:
        raise ConfigError("directedness_grid must be non-empty")
    for z in grid:
        if not isinstance(z, (int, float)) or not 0.0 < z < 1.0:
            raise ConfigError(f"directedness values must lie in (0, 1), got {z}")

    rewards_raw = raw["reward_positions"]
    if not isinstance(rewards_raw, list) or not rewards_raw:
        raise ConfigError("reward_positions must be a non-empty list")
    rewards = []
    for pos in rewards_raw:
        if kind == "linear":
            if not isinstance(pos, int) or not 0 <= pos < size[0]:
                raise ConfigError(f"linear reward position {pos} out of range")
            rewards.append((pos,))
        else:
            if (not isinstance(pos, list) or len(pos) != 2
                    or not all(isinstance(c, int) for c in pos)
                    or not (0 <= pos[0] < size[0] and 0 <= pos[1] < size[1])):
                raise ConfigError(f"lattice reward position {pos} out of range")
            rewards.append((pos[0], pos[1]))

    counts = tuple(raw["feature_counts"])
    if not counts:
        raise ConfigError("feature_counts must be non-empty")
    for e in counts:
        if not isinstance(e, int) or not 1 <= e <= n_states - 1:
            raise ConfigError(f"feature count {e} must be an integer in [1, {n_states - 1}]")

    corrections = tuple(raw.get("corrections", ("none",)))
    if not corrections:
        raise ConfigError("corrections must be non-empty")
    for c in corrections:
        if c not in CORRECTIONS:
            raise ConfigError(f"corrections must be among {CORRECTIONS}, got '{c}'")

    gamma = raw.get("gamma", 0.95)
    if not isinstance(gamma, (int, float)) or not 0.0 <= gamma < 1.0:
        raise ConfigError(f"gamma must lie in [0, 1), got {gamma}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    return SweepConfig(
        env_kind=kind,
        env_size=size,
        behavior=behavior,
        directedness_grid=grid,
        reward_positions=tuple(rewards),
        feature_counts=counts,
        corrections=corrections,
        gamma=float(gamma),
        seed=seed,
    )


@dataclass(frozen=True)
class ExperimentResult:
    """One sweep cell: config coordinates plus the fit metrics."""

    env: str
    behavior: str
    param: float
    reward: str
    e: int
    correction: str
    mse_uniform: float
    mse_weighted: float
    log_mse: float
    status: str


@dataclass
class CellArtifacts:
    """Intermediate products of one (param, reward, correction) cell."""

    chain: MarkovChain
    form: QuadraticForm
    basis: SpectralBasis
    v_star: np.ndarray
    fits: dict[int, FitResult] = field(default_factory=dict)


def compute_cell(env: Environment, solution: ValueSolution, behavior: str,
                 param: float, correction: str, e_max: int) -> CellArtifacts:
    """environment + behavior parameter -> chain -> features for one cell.

    Raises NonErgodicError / UnstableChainError for cells the sweep should
    mark as skipped.
    """
    if behavior == "zeta_greedy":
        policy = zeta_greedy(env, solution.q_star, param)
    else:
        beta = calibrate_beta(env, solution.q_star, param)
        policy = boltzmann(env, solution.q_star, beta)
    chain = make_chain(induce_chain(env, policy))
    if correction == "lra":
        form = build_lra_form(chain.P, chain.mu)
    else:
        form = build_quadratic_form(chain.P, chain.mu)
    basis = solve_mcsfa(form, e_max)
    if correction == "scale":
        basis = scale_correct(basis, chain.mu)
    return CellArtifacts(chain=chain, form=form, basis=basis, v_star=solution.v_star)


@lru_cache(maxsize=8)
def _env_and_value(env_kind: str, env_size: tuple[int, ...], position: tuple[int, ...],
                   gamma: float) -> tuple[Environment, ValueSolution]:
    if env_kind == "linear":
        env = make_linear(env_size[0], position[0])
    else:
        env = make_lattice(env_size[0], env_size[1], (position[0], position[1]))
    return env, value_iteration(env, gamma)


def _run_one_cell(config: SweepConfig, position: tuple[int, ...], param: float,
                  correction: str) -> list[ExperimentResult]:
    env, solution = _env_and_value(config.env_kind, config.env_size, position, config.gamma)
    label = config.reward_label(position)
    e_max = max(config.feature_counts)
    try:
        cell = compute_cell(env, solution, config.behavior, param, correction, e_max)
    except (NonErgodicError, UnstableChainError):
        return [
            ExperimentResult(config.env_name, config.behavior, param, label, e, correction,
                             float("nan"), float("nan"), float("nan"), "skipped-unstable")
            for e in config.feature_counts
        ]
    rows = []
    for e in config.feature_counts:
        res = fit(cell.basis, cell.chain.mu, cell.v_star, e)
        rows.append(ExperimentResult(config.env_name, config.behavior, param, label, e,
                                     correction, res.mse_uniform, res.mse_weighted,
                                     res.log_mse, "ok"))
    return rows


def _cell_worker(args: tuple) -> list[ExperimentResult]:
    return _run_one_cell(*args)


def run_sweep(config: SweepConfig, jobs: int = 1) -> list[ExperimentResult]:
    """Run every cell of the sweep; rows come back in deterministic order.

    Cells are independent; jobs > 1 fans them out over processes and the
    rows are sorted afterwards, so the output does not depend on jobs.
    """
    cells = [
        (config, position, param, correction)
        for position in config.reward_positions
        for param in config.directedness_grid
        for correction in config.corrections
    ]
    results: list[ExperimentResult] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rows in pool.map(_cell_worker, cells):
                results.extend(rows)
    else:
        for args in cells:
            results.extend(_run_one_cell(*args))
    order = {c: i for i, c in enumerate(config.corrections)}
    rewards = {config.reward_label(p): tuple(p) for p in config.reward_positions}
    results.sort(key=lambda r: (r.param, rewards[r.reward], r.e, order[r.correction]))
    return results


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(results: list[ExperimentResult], path: str | Path) -> Path:
    """Write one row per cell with 17-significant-digit decimals."""
    if not results:
        raise ValueError("refusing to write an empty result set")
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in results:
                writer.writerow([r.env, r.behavior, _fmt(r.param), r.reward, r.e, r.correction,
                                 _fmt(r.mse_uniform), _fmt(r.mse_weighted), _fmt(r.log_mse),
                                 r.status])
    except OSError as exc:
        raise OSError(f"failed to write CSV to {path}: {exc}") from exc
    return path


def write_manifest(out_dir: str | Path, config: SweepConfig, files: list[Path]) -> Path:
    """Record emitted files (with digests), the config hash, and the version."""
    out_dir = Path(out_dir)
    entries = []
    for f in sorted(files, key=lambda p: p.name):
        digest = hashlib.sha256(f.read_bytes()).hexdigest()
        entries.append({"name": f.name, "sha256": digest})
    manifest = {
        "config_hash": config.config_hash(),
        "files": entries,
        "tool": "mcsfa",
        "version": __version__,
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
