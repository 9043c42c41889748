"""Behavior policies derived from Q* and the Markov chains they induce."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .env import Environment

# Absolute tolerance for detecting ties in the argmax set of Q*; value
# iteration leaves residuals around 1e-10 that must not split the set.
ARGMAX_TOL = 1e-9


@dataclass(frozen=True)
class Policy:
    """Per-state action distribution with family metadata.

    family is one of "zeta-greedy", "boltzmann", "uniform"; param holds the
    directedness parameter (zeta or beta) where applicable.
    """

    probs: np.ndarray
    family: str
    param: float | None = None

    def __post_init__(self) -> None:
        p = self.probs
        if np.any(p < 0) or not np.all(np.abs(p.sum(axis=1) - 1.0) <= 1e-12):
            raise ValueError("policy rows must be distributions")
        p.setflags(write=False)


def uniform_policy(env: Environment) -> Policy:
    probs = np.full((env.n_states, env.n_actions), 1.0 / env.n_actions)
    return Policy(probs=probs, family="uniform")


def zeta_greedy(env: Environment, q_star: np.ndarray, zeta: float) -> Policy:
    """Select an optimal action w.p. 1 - zeta, a non-optimal one w.p. zeta.

    Probability mass is split equally inside each group. The goal state, and
    any state whose actions are all optimal, gets the uniform distribution.
    zeta in {0, 1} is permitted but may induce a non-ergodic chain, which is
    rejected downstream.
    """
    if not 0.0 <= zeta <= 1.0:
        raise ValueError(f"zeta must lie in [0, 1], got {zeta}")
    if not np.all(np.isfinite(q_star)):
        raise ValueError("Q* must be finite")
    if zeta in (0.0, 1.0):
        warnings.warn(f"zeta={zeta} typically induces a non-ergodic chain", stacklevel=2)
    n, a = env.n_states, env.n_actions
    probs = np.empty((n, a))
    for s in range(n):
        if s == env.goal:
            probs[s] = 1.0 / a
            continue
        optimal = q_star[s] >= q_star[s].max() - ARGMAX_TOL
        k = int(optimal.sum())
        if k == a:
            probs[s] = 1.0 / a
        else:
            probs[s, optimal] = (1.0 - zeta) / k
            probs[s, ~optimal] = zeta / (a - k)
    return Policy(probs=probs, family="zeta-greedy", param=float(zeta))


def boltzmann(env: Environment, q_star: np.ndarray, beta: float) -> Policy:
    """Softmax over Q* with inverse temperature beta.

    beta > 0 prefers high-value actions (goal-directed), beta = 0 is uniform,
    beta < 0 inverts the preference (goal-averse). Computed with
    max-subtraction so large |beta * Q| cannot overflow.
    """
    if np.any(np.isnan(q_star)):
        raise ValueError("Q* contains NaN")
    logits = beta * q_star
    logits = logits - logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    probs = weights / weights.sum(axis=1, keepdims=True)
    return Policy(probs=probs, family="boltzmann", param=float(beta))


def calibrate_beta(env: Environment, q_star: np.ndarray, zeta_beta: float) -> float:
    """Choose beta so Boltzmann matches zeta-greedy at a goal-neighbor state.

    At the lowest-index state with an action stepping onto the goal, the
    softmax restricted to the optimal action and its runner-up is required to
    put mass 1 - zeta_beta on the optimal action, giving
    beta = ln((1 - zeta_beta) / zeta_beta) / gap. zeta_beta = 0.5 therefore
    maps to beta = 0 (uniform) on every environment, and zeta_beta > 0.5 to
    goal-averse beta < 0.
    """
    if not 0.0 < zeta_beta < 1.0:
        raise ValueError(f"zeta_beta must lie in (0, 1), got {zeta_beta}")
    neighbor = None
    for s in range(env.n_states):
        if s != env.goal and env.transitions[:, s, env.goal].max() == 1.0:
            neighbor = s
            break
    if neighbor is None:
        raise ValueError("no state has an action leading to the goal")
    q = np.sort(q_star[neighbor])[::-1]
    gap = float(q[0] - q[1])
    if gap <= ARGMAX_TOL:
        raise ValueError(f"goal-neighbor Q* gap {gap:.3e} too small to calibrate")
    return float(np.log((1.0 - zeta_beta) / zeta_beta) / gap)


def induce_chain(env: Environment, policy: Policy) -> np.ndarray:
    """Markov chain of the policy: P[s, s'] = sum_a T(s'|s, a) pi(a|s)."""
    if policy.probs.shape != (env.n_states, env.n_actions):
        raise ValueError("policy shape does not match environment")
    return np.einsum("ast,sa->st", env.transitions, policy.probs)
