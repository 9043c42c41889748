"""Optimal value functions by dynamic programming."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import Environment


@dataclass(frozen=True)
class ValueSolution:
    """Fixed point of the Bellman optimality operator."""

    v_star: np.ndarray
    q_star: np.ndarray
    gamma: float
    residual: float

    def __post_init__(self) -> None:
        self.v_star.setflags(write=False)
        self.q_star.setflags(write=False)


def value_iteration(env: Environment, gamma: float, tol: float = 1e-12) -> ValueSolution:
    """Solve Q(s, a) = R(s) + gamma * sum_s' T(s'|s, a) * max_a' Q(s', a').

    Synchronous sweeps; stops once the max-norm update falls below
    tol * (1 - gamma) / gamma, which bounds the error in Q by tol through
    the usual contraction argument. The reward belongs to the source state.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    T, R = env.transitions, env.reward
    threshold = tol * (1.0 - gamma) / gamma if gamma > 0.0 else np.inf
    Q = np.zeros((env.n_states, env.n_actions))
    for _ in range(1_000_000):
        V = Q.max(axis=1)
        Q_next = R[:, None] + gamma * np.einsum("ast,t->sa", T, V)
        done = np.max(np.abs(Q_next - Q)) < threshold
        Q = Q_next
        if done:
            break
    else:  # pragma: no cover - contraction makes this unreachable
        raise RuntimeError("value iteration failed to converge")
    V = Q.max(axis=1)
    bellman = R[:, None] + gamma * np.einsum("ast,t->sa", T, V)
    residual = float(np.max(np.abs(bellman - Q)))
    return ValueSolution(v_star=V, q_star=Q, gamma=gamma, residual=residual)
