"""Small dense numerical kernel used by every other module.

Nothing here knows about geometry. Determinants, metric Gram-Schmidt,
polynomial fitting and finite differencing are deliberately hand-rolled
(with closed forms for the tiny sizes that dominate the hot path) so the
behaviour is pinned by this package's own tests rather than by whatever
LAPACK happens to be linked in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBasisError,
    DimensionError,
    IllConditionedFitError,
    ParameterError,
)

__all__ = [
    "DiffConfig",
    "determinant",
    "directional_derivative",
    "fit_polynomial",
    "gram_schmidt",
    "kahan_sum",
]

GS_PIVOT_TOL = 1e-10
FIT_CONDITION_GUARD = 1e12
MAX_DET_DIM = 6


@dataclass(frozen=True)
class DiffConfig:
    """Step size and Richardson depth for central differences.

    step is the base half-width h; richardson_levels = 0 means a plain
    central difference, each extra level halves h and eliminates the next
    even error term (capped at 3).
    """

    step: float = 1e-4
    richardson_levels: int = 1

    def __post_init__(self):
        if not (self.step > 0.0) or not math.isfinite(self.step):
            raise ParameterError(f"step must be a positive finite float, got {self.step}")
        if not 0 <= int(self.richardson_levels) <= 3:
            raise ParameterError(
                f"richardson_levels must be in 0..3, got {self.richardson_levels}"
            )


DEFAULT_DIFF = DiffConfig()


def determinant(m) -> float:
    """Determinant of a small square matrix (dimension <= 6).

    Closed cofactor formulas for n <= 3, LU with partial pivoting above.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"determinant needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0 or n > MAX_DET_DIM:
        raise DimensionError(f"determinant supports 1..{MAX_DET_DIM}, got {n}")
    if n == 1:
        return float(a[0, 0])
    if n == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if n == 3:
        return float(
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    # LU with partial pivoting, in place on a copy
    lu = a.copy()
    sign = 1.0
    for col in range(n - 1):
        pivot = col + int(np.argmax(np.abs(lu[col:, col])))
        if pivot != col:
            lu[[col, pivot]] = lu[[pivot, col]]
            sign = -sign
        p = lu[col, col]
        if p == 0.0:
            return 0.0
        lu[col + 1 :, col] /= p
        lu[col + 1 :, col + 1 :] -= np.outer(lu[col + 1 :, col], lu[col, col + 1 :])
    return float(sign * np.prod(np.diag(lu)))


def gram_schmidt(vectors, inner=None, pivot_tol: float = GS_PIVOT_TOL):
    """Orthonormalize vectors w.r.t. a metric inner product.

    Args:
        vectors: iterable of 1-d arrays, all the same length.
        inner: SPD matrix defining <x, y> = x @ inner @ y, or None for the
            standard dot product.
        pivot_tol: residual norms below this raise DegenerateBasisError.

    Returns:
        list of orthonormalized numpy arrays, in input order (modified
        Gram-Schmidt, two passes of projection for stability).
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        return []
    g = None if inner is None else np.asarray(inner, dtype=float)

    def dot(x, y):
        if g is None:
            return float(x @ y)
        return float(x @ g @ y)

    basis: list[np.ndarray] = []
    for v in vecs:
        w = v.astype(float, copy=True)
        for _ in range(2):  # re-orthogonalize once; cheap and removes drift
            for b in basis:
                w = w - dot(w, b) * b
        norm = math.sqrt(max(dot(w, w), 0.0))
        if norm < pivot_tol:
            raise DegenerateBasisError(
                f"Gram-Schmidt pivot {norm:.3e} below {pivot_tol:.1e} "
                f"(vector {len(basis)} of {len(vecs)})"
            )
        basis.append(w / norm)
    return basis


def fit_polynomial(ts, ys, degree: int) -> np.ndarray:
    """Least-squares polynomial fit, coefficients ordered low to high.

    Raises IllConditionedFitError when the Vandermonde condition estimate
    exceeds 1e12. With len(ts) == degree + 1 this is exact interpolation.
    """
    t = np.asarray(ts, dtype=float)
    y = np.asarray(ys, dtype=float)
    if t.ndim != 1 or y.shape[0] != t.shape[0]:
        raise DimensionError(f"fit needs matching 1-d samples, got {t.shape} vs {y.shape}")
    if degree < 0 or t.shape[0] < degree + 1:
        raise DimensionError(
            f"degree {degree} needs at least {degree + 1} samples, got {t.shape[0]}"
        )
    vand = np.vander(t, degree + 1, increasing=True)
    cond = np.linalg.cond(vand)
    if not np.isfinite(cond) or cond > FIT_CONDITION_GUARD:
        raise IllConditionedFitError(
            f"Vandermonde condition {cond:.3e} exceeds guard {FIT_CONDITION_GUARD:.1e}"
        )
    coeffs, *_ = np.linalg.lstsq(vand, y, rcond=None)
    return coeffs


# Neville-style weights are derived on the fly; for ratio-2 step halving and
# second-order base error the classic (4^k D_fine - D_coarse)/(4^k - 1) table.
def directional_derivative(fn, point, direction, cfg: DiffConfig = DEFAULT_DIFF):
    """d/dt fn(point + t * direction) at t = 0.

    Central differences with cfg.richardson_levels rounds of Richardson
    extrapolation (step ratio 2, error order 2 per level). fn may return a
    scalar or an ndarray.
    """
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    levels = int(cfg.richardson_levels)

    def central(h):
        hi = np.asarray(fn(p + h * d), dtype=float)
        lo = np.asarray(fn(p - h * d), dtype=float)
        return (hi - lo) / (2.0 * h)

    h = float(cfg.step)
    table = [central(h / (2.0**i)) for i in range(levels + 1)]
    for lev in range(1, levels + 1):
        fac = 4.0**lev
        table = [
            (fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)
        ]
    return table[0]


def kahan_sum(values) -> float:
    """Compensated summation in the given (deterministic) order."""
    total = 0.0
    comp = 0.0
    for v in values:
        y = float(v) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
