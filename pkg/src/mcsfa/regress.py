"""Linear value-function approximation on slow-feature bases.

The fit is weighted least squares in the measure the basis is orthonormal
under (the stationary distribution for solver output, the uniform measure
after scale correction); this is the infinite-sample regression of the
behavior distribution. The intercept column is the basis's trivial feature,
so the design matrix is orthonormal and the projection coefficients
w = Y^T diag(weighting) v are the exact solution, cross-checked against a
generic weighted normal-equations solve on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralBasis


@dataclass(frozen=True)
class FitResult:
    """Weights plus error metrics of one value-function fit.

    mse_weighted (the training measure, weighted by the chain's stationary
    distribution) is the reported metric; log_mse is its natural log.
    mse_uniform is the plain mean over states, emitted alongside for
    cross-behavior comparisons. closed_generic_gap records the max-abs
    disagreement between the projection coefficients and the generic solver.
    """

    weights: np.ndarray
    intercept: float
    mse_uniform: float
    mse_weighted: float
    log_mse: float
    closed_generic_gap: float

    @property
    def reported_mse(self) -> float:
        return self.mse_weighted


def fit(basis: SpectralBasis, mu: np.ndarray, v_star: np.ndarray, e_used: int) -> FitResult:
    """Weighted least squares of v_star on the first e_used basis columns.

    Minimizes sum_s weighting_s (v[s] - w0 y0[s] - (Y w)[s])^2. For solver
    bases the weighting is the stationary distribution and y0 is the constant
    vector, so w0 = mu^T v and w = Y^T D v, the closed form; the same
    projection stays exact after scale correction because correction
    preserves orthonormality of [y0, Y] in the new measure.
    """
    if not 0 <= e_used <= basis.n_features:
        raise ValueError(f"e_used must lie in [0, {basis.n_features}], got {e_used}")
    w_vec = basis.weighting
    design = np.column_stack([basis.y0, basis.Y[:, :e_used]])

    coeff = design.T @ (w_vec * v_star)

    sqrt_w = np.sqrt(w_vec)
    generic, _, rank, _ = np.linalg.lstsq(sqrt_w[:, None] * design, sqrt_w * v_star, rcond=None)
    if rank < e_used + 1:
        raise RuntimeError(f"design rank {rank} < {e_used + 1}: basis is broken")
    gap = float(np.max(np.abs(coeff - generic)))

    residual = design @ coeff - v_star
    mse_uniform = float(np.mean(residual**2))
    mu_norm = mu / mu.sum()
    mse_weighted = float(mu_norm @ residual**2)
    log_mse = math.log(mse_weighted) if mse_weighted > 0 else -math.inf
    return FitResult(
        weights=coeff[1:].copy(),
        intercept=float(coeff[0]),
        mse_uniform=mse_uniform,
        mse_weighted=mse_weighted,
        log_mse=log_mse,
        closed_generic_gap=gap,
    )


def symlog(x: float) -> float:
    """Sign-preserving logarithm: sgn(x) * ln|x|, with symlog(0) = 0."""
    if x == 0:
        return 0.0
    value = math.log(abs(x))
    return value if x > 0 else -value


def compare(before: FitResult, after: FitResult) -> float:
    """-symlog(mse_before - mse_after) on the reported metric.

    Positive sign means the second fit improved on the first; note that the
    magnitude semantics invert as the difference crosses 1, which is a
    property of the metric itself and is kept as defined.
    """
    return -symlog(before.reported_mse - after.reported_mse)
