"""Optimal slow features as generalized eigenvectors of (D - M, D).

Minimizing Tr(Y^T (D - M) Y) subject to Y^T D Y = I is solved by the
eigenvectors of smallest eigenvalue of (D - M) y = lambda D y. Because D is
diagonal positive, the problem reduces exactly to the symmetric matrix
L_sym = D^{-1/2} (D - M) D^{-1/2} via z = D^{1/2} y, and a standard symmetric
eigensolver applies. The constant eigenvector (lambda = 0) is the trivial,
globally optimal solution and is excluded from the returned basis; it is kept
separately because it acts as the intercept of downstream regressions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import QuadraticForm, UnstableChainError

# An eigenvalue this small must belong to the trivial constant solution.
TRIVIAL_EIGENVALUE_TOL = 1e-8

# Allowed D-norm deviation of the trivial eigenvector from constancy. The
# D-norm measures the coefficient with which other modes leak in, independent
# of their (possibly huge) amplitude; deflation removes leakage up to this
# level without hurting orthonormality (norm shift <= tol^2 / 2), while
# larger leakage means the trivial and slowest modes are numerically
# degenerate and the chain is unusable.
TRIVIAL_FLATNESS_TOL = 1e-4

# Eigenvalues in [-NEGATIVE_CLAMP, 0) are rounded up to zero; anything more
# negative means the (M, D) pair is not a valid form.
NEGATIVE_CLAMP = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    """Feature columns y_1..y_e with eigenvalues and their weighting.

    The columns satisfy Y^T diag(weighting) Y = I; for bases straight from
    the solver they are also zero-mean under the weighting. y0 is the
    (excluded) trivial solution in the same normalization.
    """

    Y: np.ndarray
    lambdas: np.ndarray
    weighting: np.ndarray
    y0: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.Y, self.lambdas, self.weighting, self.y0):
            arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.Y.shape[1]


def _sign_anchor(column: np.ndarray) -> int:
    """Index of the largest-magnitude entry, lowest index on (near-)ties."""
    magnitude = np.abs(column)
    peak = magnitude.max()
    return int(np.argmax(magnitude >= peak * (1.0 - 1e-12)))


def _fix_signs(Y: np.ndarray) -> np.ndarray:
    """Flip columns so the anchor entry of each is positive."""
    Y = Y.copy()
    for j in range(Y.shape[1]):
        if Y[_sign_anchor(Y[:, j]), j] < 0:
            Y[:, j] = -Y[:, j]
    return Y


def solve_mcsfa(form: QuadraticForm, e: int) -> SpectralBasis:
    """Return the e slowest non-trivial features of the quadratic form.

    Eigenvalues come back ascending and clamped at zero from below; columns
    are D-orthonormal with the sign convention of _fix_signs.
    """
    d = form.d
    n = d.shape[0]
    if np.any(d <= 0):
        raise ValueError("D must be strictly positive on the diagonal")
    if not 1 <= e <= n - 1:
        raise ValueError(f"e must lie in [1, {n - 1}], got {e}")
    d_inv_sqrt = 1.0 / np.sqrt(d)
    l_sym = np.eye(n) - d_inv_sqrt[:, None] * form.M * d_inv_sqrt[None, :]
    l_sym = 0.5 * (l_sym + l_sym.T)
    lambdas, Z = scipy.linalg.eigh(l_sym)

    trivial = int(np.argmin(np.abs(lambdas)))
    if not lambdas[trivial] < TRIVIAL_EIGENVALUE_TOL:
        raise RuntimeError(f"no eigenvalue near zero (closest {lambdas[trivial]:.3e})")
    z0 = np.sqrt(d)
    z0 /= np.linalg.norm(z0)
    # Leakage of non-constant modes into the trivial candidate, measured as a
    # coefficient in the constraint norm.
    flatness = float(np.sqrt(max(0.0, 1.0 - (z0 @ Z[:, trivial]) ** 2)))
    if flatness > TRIVIAL_FLATNESS_TOL:
        raise UnstableChainError(
            f"trivial and slowest modes mix with coefficient {flatness:.3e}")

    keep = [i for i in range(n) if i != trivial][:e]
    lams = lambdas[keep].copy()
    if np.any(lams < -NEGATIVE_CLAMP):
        raise RuntimeError(f"eigenvalue {lams.min():.3e} below -{NEGATIVE_CLAMP:.0e}; broken M/D pair")
    lams[lams < 0] = 0.0

    # D^(1/2) 1 is an exact null vector of L_sym (d holds the row sums of M),
    # so deflating it from the kept eigenvectors removes the O(eps / gap)
    # contamination a near-degenerate second mode leaves behind. The shift is
    # along the constant feature, which the slowness objective ignores.
    Z_keep = Z[:, keep]
    Z_keep = Z_keep - z0[:, None] * (z0 @ Z_keep)
    norms = np.linalg.norm(Z_keep, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise UnstableChainError(
            f"deflation shrank a feature column to norm {norms.min():.6f}")
    Y = _fix_signs(d_inv_sqrt[:, None] * Z_keep)
    y0 = d_inv_sqrt * z0
    return SpectralBasis(Y=Y, lambdas=lams, weighting=d.copy(), y0=y0)


def slowness(form: QuadraticForm, y: np.ndarray) -> float:
    """The objective sum_{u,v} M[u, v] (y_u - y_v)^2.

    Evaluated literally as the double sum; for a D-normalized eigenvector it
    equals twice the eigenvalue.
    """
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite")
    diff = y[:, None] - y[None, :]
    return float(np.sum(form.M * diff * diff))


def objective_gradient(form: QuadraticForm, Y: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    """Gradient of the Lagrangian: 2 (D - M) Y - 2 D Y Lambda.

    Zero exactly when the columns of Y are eigenvectors with multipliers
    lambdas; used to verify the trace derivatives by finite differences.
    """
    DY = form.d[:, None] * Y
    return 2.0 * (DY - form.M @ Y) - 2.0 * DY * lambdas[None, :]


def scale_correct(basis: SpectralBasis, mu: np.ndarray) -> SpectralBasis:
    """Rescale each state's features by sqrt(mu), i.e. apply D^(1/2).

    Moves the basis from the feasible region of Y^T D Y = I to that of
    Y^T Y = I, flattening the 1/sqrt(mu) amplitude envelope. Requires the
    basis to still carry the stationary weighting.
    """
    if np.any(mu <= 0):
        raise ValueError("mu must be strictly positive")
    if basis.weighting.shape != mu.shape or np.max(np.abs(basis.weighting - mu)) > 1e-10:
        raise ValueError("basis weighting does not match mu; already corrected?")
    # The basis is orthonormal under its own weighting (equal to mu within
    # round-off); scaling by that exact weighting preserves orthonormality
    # to machine precision.
    root = np.sqrt(basis.weighting)
    return SpectralBasis(
        Y=root[:, None] * basis.Y,
        lambdas=basis.lambdas.copy(),
        weighting=np.ones_like(mu),
        y0=root * basis.y0,
    )


def general_rescale(Y: np.ndarray, omega: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Map between feasible regions: row r scaled by sqrt(omega_r / phi_r).

    If Y^T diag(omega) Y = I then the output is orthonormal under diag(phi).
    The map is a bijection; applying it with the weights swapped inverts it.
    """
    if np.any(omega <= 0) or np.any(phi <= 0):
        raise ValueError("weights must be strictly positive")
    return np.sqrt(omega / phi)[:, None] * Y
