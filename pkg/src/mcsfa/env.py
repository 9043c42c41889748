"""Finite spatial MDPs: linear graphs (birth-death style) and 2D lattices.

Dynamics are deterministic; stochasticity enters only through the policy.
The reward is attributed to the state a transition leaves *from*, and
exactly one state (the goal) carries reward 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Linear actions.
LEFT = 0
RIGHT = 1

# Lattice actions.
UP = 0
DOWN = 1
LAT_LEFT = 2
LAT_RIGHT = 3


@dataclass(frozen=True)
class LinearGeometry:
    """States 0..n-1 laid out on a line."""

    n: int

    def coord_of(self, state: int) -> int:
        return state

    def state_of(self, coord: int) -> int:
        return coord


@dataclass(frozen=True)
class LatticeGeometry:
    """Row-major indexing with (0, 0) the bottom-left corner.

    A coordinate (x, y) has column x (0..width-1) and row y (0..height-1);
    its state index is y * width + x.
    """

    width: int
    height: int

    def coord_of(self, state: int) -> tuple[int, int]:
        return state % self.width, state // self.width

    def state_of(self, coord: tuple[int, int]) -> int:
        x, y = coord
        return y * self.width + x


@dataclass(frozen=True)
class Environment:
    """Finite MDP with deterministic dynamics and a single unit reward.

    transitions has shape (n_actions, n_states, n_states); transitions[a][s]
    is the (one-hot) distribution over successor states.
    """

    n_states: int
    n_actions: int
    transitions: np.ndarray
    reward: np.ndarray
    goal: int
    geometry: LinearGeometry | LatticeGeometry

    def __post_init__(self) -> None:
        T, R = self.transitions, self.reward
        if T.shape != (self.n_actions, self.n_states, self.n_states):
            raise ValueError(f"transition tensor has shape {T.shape}")
        row_sums = T.sum(axis=2)
        if not np.all(np.abs(row_sums - 1.0) <= 1e-12) or np.any(T < 0):
            raise ValueError("each transitions[a][s] must be a distribution")
        # Deterministic dynamics: every action row is one-hot.
        if not np.all(((T == 0.0) | (T == 1.0))) or not np.all(T.sum(axis=2) == 1.0):
            raise ValueError("dynamics must be deterministic (one-hot rows)")
        if R.shape != (self.n_states,):
            raise ValueError("reward must be a vector over states")
        if not (np.count_nonzero(R) == 1 and R[self.goal] == 1.0):
            raise ValueError("exactly one state (the goal) carries reward 1")
        T.setflags(write=False)
        R.setflags(write=False)


def make_linear(n: int, goal: int) -> Environment:
    """Linear graph with two actions; boundary moves self-transition."""
    if n < 2:
        raise ValueError(f"need at least 2 states, got {n}")
    if not 0 <= goal < n:
        raise ValueError(f"goal {goal} out of range for {n} states")
    T = np.zeros((2, n, n))
    for s in range(n):
        T[LEFT, s, max(0, s - 1)] = 1.0
        T[RIGHT, s, min(n - 1, s + 1)] = 1.0
    R = np.zeros(n)
    R[goal] = 1.0
    return Environment(n, 2, T, R, goal, LinearGeometry(n))


def make_lattice(width: int, height: int, goal: tuple[int, int]) -> Environment:
    """2D lattice with four actions; off-grid moves self-transition.

    A degenerate single row/column (width or height of 1) is permitted so the
    lattice demonstrably reduces to the linear graph; a 1x1 lattice is not.
    """
    if width < 1 or height < 1 or width * height < 2:
        raise ValueError(f"lattice {width}x{height} is degenerate")
    gx, gy = goal
    if not (0 <= gx < width and 0 <= gy < height):
        raise ValueError(f"goal {goal} out of bounds for {width}x{height}")
    geom = LatticeGeometry(width, height)
    n = width * height
    T = np.zeros((4, n, n))
    for y in range(height):
        for x in range(width):
            s = geom.state_of((x, y))
            targets = {UP: (x, y + 1), DOWN: (x, y - 1), LAT_LEFT: (x - 1, y), LAT_RIGHT: (x + 1, y)}
            for a, (tx, ty) in targets.items():
                if 0 <= tx < width and 0 <= ty < height:
                    T[a, s, geom.state_of((tx, ty))] = 1.0
                else:
                    T[a, s, s] = 1.0
    R = np.zeros(n)
    R[geom.state_of(goal)] = 1.0
    return Environment(n, 4, T, R, geom.state_of(goal), geom)


def birth_death_chain(n: int, theta: float) -> np.ndarray:
    """Transition matrix of the finite birth-death process.

    Each state steps right with probability theta and left with 1 - theta;
    boundary moves fold into self-transitions. Ergodic for theta in (0, 1),
    with stationary distribution proportional to (theta / (1 - theta))**i.
    """
    if n < 2:
        raise ValueError(f"need at least 2 states, got {n}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    P = np.zeros((n, n))
    for i in range(n):
        P[i, min(n - 1, i + 1)] += theta
        P[i, max(0, i - 1)] += 1.0 - theta
    return P
