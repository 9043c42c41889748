"""Ergodicity checks, stationary distributions, and the symmetrized forms.

The slowness objective on an ergodic chain is a quadratic form with
coefficient matrix M[u, v] = (mu_u P[u, v] + mu_v P[v, u]) / 2 and diagonal
D[v, v] = sum_u M[u, v]; the LRA-corrected variant replaces each transition
probability by its support indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

# Entries below this threshold count as structural zeros of the chain.
ZERO_THRESHOLD = 1e-12

# Chains whose least-occupied state falls below this are numerically unusable.
MIN_OCCUPANCY = 1e-14

STATIONARY_RESIDUAL_TOL = 1e-10


class NonErgodicError(ValueError):
    """The chain is not irreducible and aperiodic."""


class UnstableChainError(ValueError):
    """The stationary distribution is too concentrated to work with."""


@dataclass(frozen=True)
class MarkovChain:
    """Row-stochastic matrix with its stationary distribution."""

    P: np.ndarray
    mu: np.ndarray
    ergodic: bool

    def __post_init__(self) -> None:
        self.P.setflags(write=False)
        self.mu.setflags(write=False)


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric coefficient matrix M and the diagonal d of D.

    kind is "standard" (d equals mu) or "lra" (d is the row sum of the
    support-indicator form).
    """

    M: np.ndarray
    d: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        self.M.setflags(write=False)
        self.d.setflags(write=False)

    @property
    def laplacian(self) -> np.ndarray:
        return np.diag(self.d) - self.M


def check_ergodic(P: np.ndarray, zero_threshold: float = ZERO_THRESHOLD) -> tuple[bool, str]:
    """Certify irreducibility plus aperiodicity of the support digraph.

    Returns (ok, diagnostic). Aperiodicity is the gcd of cycle lengths being
    one, computed by the BFS level trick on the strongly connected graph; any
    self-loop forces gcd 1.
    """
    support = P > zero_threshold
    n_comp, _ = csgraph.connected_components(sp.csr_matrix(support), connection="strong")
    if n_comp > 1:
        return False, f"not strongly connected ({n_comp} components)"
    period = _period(support)
    if period > 1:
        return False, f"periodic with period {period}"
    return True, "strongly connected and aperiodic"


def _period(support: np.ndarray) -> int:
    """gcd over edges (u, v) of level[u] + 1 - level[v] for BFS levels."""
    n = support.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(support[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    g = 0
    for u in range(n):
        for v in np.flatnonzero(support[u]):
            g = math.gcd(g, level[u] + 1 - level[v])
            if g == 1:
                return 1
    return g


def stationary(P: np.ndarray) -> np.ndarray:
    """Unique mu with mu^T P = mu^T and sum(mu) = 1, by a dense solve.

    The last balance equation is replaced by the normalization constraint and
    the system is LU-factored; exact at the problem sizes used here. Values
    that are negative beyond round-off indicate a singular or non-ergodic
    input and are reported rather than repaired.
    """
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        mu = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"balance system is singular: {exc}") from exc
    residual = float(np.max(np.abs(mu @ P - mu)))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise ValueError(f"stationary residual {residual:.3e} exceeds {STATIONARY_RESIDUAL_TOL:.0e}")
    if mu.min() < -ZERO_THRESHOLD:
        raise ValueError(f"stationary solve produced negative mass {mu.min():.3e}")
    return mu


def make_chain(P: np.ndarray) -> MarkovChain:
    """Validate ergodicity and occupancy, then attach mu to the matrix."""
    ok, reason = check_ergodic(P)
    if not ok:
        raise NonErgodicError(reason)
    try:
        mu = stationary(P)
    except ValueError as exc:
        # An ergodic chain whose balance system misbehaves numerically is an
        # occupancy problem, not a malformed input.
        raise UnstableChainError(str(exc)) from exc
    if mu.min() < MIN_OCCUPANCY:
        raise UnstableChainError(f"minimum occupancy {mu.min():.3e} below {MIN_OCCUPANCY:.0e}")
    return MarkovChain(P=P.copy(), mu=mu, ergodic=True)


def _symmetrize(X: np.ndarray) -> np.ndarray:
    # (x + y) / 2 is commutative in IEEE arithmetic, so this is exact.
    return 0.5 * (X + X.T)


def build_quadratic_form(P: np.ndarray, mu: np.ndarray) -> QuadraticForm:
    """M[u, v] = (mu_u P[u, v] + mu_v P[v, u]) / 2 with d as its row sums.

    For a stationary mu the row sums reproduce mu itself (within round-off),
    so D coincides with diag(mu).
    """
    _require_stationary(P, mu)
    M = _symmetrize(mu[:, None] * P)
    return QuadraticForm(M=M, d=M.sum(axis=0), kind="standard")


def build_lra_form(P: np.ndarray, mu: np.ndarray) -> QuadraticForm:
    """Learning-rate-adapted form: transition weights replaced by support.

    M'[u, v] = (mu_u [P_uv > 0] + mu_v [P_vu > 0]) / 2, zeros decided at
    ZERO_THRESHOLD; d' is the literal row sum so that (D' - M') 1 = 0.
    """
    _require_stationary(P, mu)
    support = (P > ZERO_THRESHOLD).astype(float)
    M = _symmetrize(mu[:, None] * support)
    return QuadraticForm(M=M, d=M.sum(axis=0), kind="lra")


def _require_stationary(P: np.ndarray, mu: np.ndarray) -> None:
    residual = float(np.max(np.abs(mu @ P - mu)))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise ValueError(f"mu is not stationary for P (residual {residual:.3e})")


def simulate(P: np.ndarray, n_steps: int, seed: int, start: int = 0) -> np.ndarray:
    """Sample a trajectory of n_steps transitions; returns n_steps + 1 states.

    Inverse-CDF sampling against precomputed cumulative rows; a million steps
    take well under two seconds.
    """
    from bisect import bisect_right

    rng = np.random.default_rng(seed)
    last = P.shape[0] - 1
    rows = [row.tolist() for row in np.cumsum(P, axis=1)]
    draws = rng.random(n_steps).tolist()
    states = np.empty(n_steps + 1, dtype=np.int64)
    s = start
    states[0] = s
    for t, u in enumerate(draws):
        # min() guards against cumulative rows rounding to just below 1.
        s = min(bisect_right(rows[s], u), last)
        states[t + 1] = s
    return states
