"""Independent reference solutions.

Two closed forms (the four-cell tree model and an affine four-cell model)
and a brute-force likelihood search over the multiplicative parameters
``delta_i = prod_j theta_j ** a_ji``.  None of them touches the iterative
scaling code, so they can be used to check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .design import DesignMatrix, build_design
from .errors import (BoundaryMLE, DimensionMismatch, OracleResolutionExceeded,
                     ZeroSufficientStatistic)

__all__ = [
    "ClosedFormResult", "OracleGrid", "TREE_DESIGN", "AFFINE_DESIGN",
    "AFFINE_KERNEL", "tree_model_mle", "affine_closed_form_mle",
    "grid_search_mle",
]

TREE_DESIGN = ((3, 2, 1, 0), (0, 1, 1, 1))
AFFINE_DESIGN = ((1, 0, 3, 2), (1, 3, 0, 2))
AFFINE_KERNEL = ((2, 0, 0, -1), (1, -1, -1, 1))


@dataclass
class ClosedFormResult:
    estimate: np.ndarray
    gamma: float
    intermediates: dict = field(default_factory=dict)
    exact: tuple = ()


def _four_counts(y) -> list[Fraction]:
    vals = list(np.asarray(y).ravel())
    if len(vals) != 4:
        raise DimensionMismatch("closed forms are for four cells")
    out = [Fraction(v).limit_denominator(10**12) if isinstance(v, float)
           else Fraction(int(v)) for v in vals]
    if any(v < 0 for v in out):
        raise ValueError("counts must be non-negative")
    return out


def _row_factor(design, r, q) -> Fraction:
    factors = set()
    for row in design:
        num = sum(a * x for a, x in zip(row, r))
        den = sum(a * x for a, x in zip(row, q))
        factors.add(num / den)
    if len(factors) != 1:  # exact arithmetic: the factors agree or not at all
        raise AssertionError("row factors differ: %s" % factors)
    return factors.pop()


def tree_model_mle(y) -> ClosedFormResult:
    """Closed-form MLE for probabilities ``(t0^3, t0^2 t1, t0 t1, t1)``.

    With ``z1 = 3y1 + 2y2 + y3``, ``z2 = y2 + y3 + y4`` and ``z3 = z1 + z2``,
    ``t0 = z1/z3`` and ``t1 = z2/z3``; the adjustment factor is
    ``N (z1^2 + z1 z3 + z3^2) / z3^3``.
    """
    y1, y2, y3, y4 = _four_counts(y)
    z1 = 3 * y1 + 2 * y2 + y3
    z2 = y2 + y3 + y4
    z3 = z1 + z2
    if z1 == 0 or z2 == 0:
        raise BoundaryMLE("z1 = %s, z2 = %s: the MLE is on the boundary"
                          % (z1, z2))
    n = y1 + y2 + y3 + y4
    t0, t1 = z1 / z3, z2 / z3
    p = (t0 ** 3, t0 ** 2 * t1, t0 * t1, t1)
    gamma = n * (z1 ** 2 + z1 * z3 + z3 ** 2) / z3 ** 3
    return ClosedFormResult(
        np.array([float(x) for x in p]), float(gamma),
        {"z1": float(z1), "z2": float(z2), "z3": float(z3),
         "theta0": float(t0), "theta1": float(t1)},
        exact=p)


def affine_closed_form_mle(y) -> ClosedFormResult:
    """Closed-form MLE in the affine model of ``AFFINE_DESIGN``.

    The model fixes ``r1^2 / r4 = 12`` and ``r1 r4 / (r2 r3) = 9/8``.  The
    adjustment factor is the common row ratio, computed exactly.
    """
    y1, y2, y3, y4 = _four_counts(y)
    z1 = y1 + y2 + 2 * y3 + 2 * y4
    z2 = y1 + 3 * y3 + 2 * y4
    z3 = y1 + 3 * y2 + 2 * y4
    z4 = y1 + 2 * y2 + y3 + 2 * y4
    if min(z1, z2, z3, z4) <= 0:
        raise BoundaryMLE("closed form needs z1..z4 > 0")
    r = (2 * z2 * z3 / (3 * z1 * z4),
         4 * z3 ** 3 / (27 * z1 * z4 ** 2),
         4 * z2 ** 3 / (27 * z1 ** 2 * z4),
         z2 ** 2 * z3 ** 2 / (27 * z1 ** 2 * z4 ** 2))
    n = y1 + y2 + y3 + y4
    gamma = _row_factor(AFFINE_DESIGN, r, [v / n for v in (y1, y2, y3, y4)])
    return ClosedFormResult(
        np.array([float(x) for x in r]), float(gamma),
        {"z1": float(z1), "z2": float(z2), "z3": float(z3), "z4": float(z4)},
        exact=r)


# ---------------------------------------------------------------------------
# brute-force likelihood search

@dataclass(frozen=True)
class OracleGrid:
    """Search settings for :func:`grid_search_mle`.

    A full tensor grid of ``points`` values per log-parameter on
    ``[-bound, bound]`` locates the maximum; then a local grid of
    ``2 * zoom_half + 1`` points per axis spanning ``zoom_width`` current
    spacings either side is re-centred and shrunk until the spacing drops
    below ``resolution``.
    """

    points: int = 400
    bound: float = 10.0
    zoom_half: int = 20
    zoom_width: float = 4.0
    resolution: float = 1e-11
    bisection_steps: int = 200
    max_params: int = 3


def _poisson_loglik(a, y, beta):
    # beta: (..., J)
    eta = beta @ a
    return eta @ y - np.exp(eta).sum(axis=-1)


def _poisson_coarse(a, y, axis):
    """Best point of the full tensor grid, without materializing it.

    ``sum_i exp(eta_i)`` factorizes over the log-parameters, so each slice of
    the grid is a small matrix product of per-parameter exponential tables.
    """
    J = a.shape[0]
    s = a @ y
    tables = [np.exp(np.outer(a[j], axis)) for j in range(J)]
    lin = [s[j] * axis for j in range(J)]
    if J == 1:
        vals = lin[0] - tables[0].sum(axis=0)
        k = int(np.argmax(vals))
        return vals[k], axis[[k]]
    if J == 2:
        vals = lin[0][:, None] + lin[1][None, :] - tables[0].T @ tables[1]
        k, l = np.unravel_index(int(np.argmax(vals)), vals.shape)
        return vals[k, l], axis[[k, l]]
    best_val, best = -np.inf, None
    for k in range(axis.size):
        mass = (tables[0][:, k, None] * tables[1]).T @ tables[2]
        vals = lin[0][k] + lin[1][:, None] + lin[2][None, :] - mass
        l, m = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[l, m] > best_val:
            best_val, best = vals[l, m], axis[[k, l, m]]
    return best_val, best


def _solve_last(a, rest, lo=-60.0, hi=60.0, steps=200, rtol=1e-15):
    """Solve ``sum exp(eta) = 1`` for the last log-parameter by bisection.

    Returns ``nan`` where no root exists in ``[lo, hi]``.
    """
    base = rest @ a[:-1] if a.shape[0] > 1 else np.zeros(rest.shape[:-1] + (a.shape[1],))
    last = a[-1]

    def total(b):
        return np.exp(base + b[..., None] * last).sum(axis=-1)

    shape = base.shape[:-1]
    lo_b = np.full(shape, lo)
    hi_b = np.full(shape, hi)
    ok = (total(lo_b) < 1.0) & (total(hi_b) > 1.0)
    for _ in range(steps):
        mid = 0.5 * (lo_b + hi_b)
        big = total(mid) > 1.0
        hi_b = np.where(big, mid, hi_b)
        lo_b = np.where(big, lo_b, mid)
        if np.all(hi_b - lo_b < rtol * np.maximum(1.0, np.abs(hi_b))):
            break
    return np.where(ok, 0.5 * (lo_b + hi_b), np.nan)


def _multinomial_loglik(a, y, rest, steps, rtol=1e-15):
    b = _solve_last(a, rest, steps=steps, rtol=rtol)
    beta = np.concatenate([rest, b[..., None]], axis=-1)
    val = (beta @ a) @ y
    return np.where(np.isnan(b), -np.inf, val), beta


def _evaluate(a, y, scheme, params, steps, rtol=1e-15):
    if scheme == "poisson":
        return _poisson_loglik(a, y, params), params
    return _multinomial_loglik(a, y, params, steps, rtol)


def _mesh(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, len(axes))


def grid_search_mle(A, y, scheme="poisson", grid: OracleGrid | None = None) -> np.ndarray:
    """Maximize the likelihood by exhaustive search over log-parameters.

    Poisson: maximize ``sum y log(delta) - sum delta`` over all ``J``
    log-parameters.  Multinomial: search ``J - 1`` log-parameters and solve
    ``1' delta = 1`` for the last one by bisection (the total is increasing
    in it), maximizing ``sum y log(delta)``.  Ties go to the lowest grid index.

    Raises
    ------
    OracleResolutionExceeded
        More than ``grid.max_params`` search dimensions, no feasible grid
        point, or a maximum on the edge of the initial box.
    """
    grid = grid or OracleGrid()
    if not isinstance(A, DesignMatrix):
        A = build_design(A)
    a = A.entries.astype(float)
    y = np.asarray(y, dtype=float)
    if y.shape != (A.num_cells,):
        raise DimensionMismatch("data has length %d, design has %d cells"
                                % (y.size, A.num_cells))
    if np.any(a @ y <= 0):
        raise ZeroSufficientStatistic(np.flatnonzero(a @ y <= 0).tolist())
    scheme = str(getattr(scheme, "value", scheme))
    J = A.num_rows
    if J > grid.max_params:
        raise OracleResolutionExceeded("grid search supports at most %d design rows"
                                       % grid.max_params)
    dims = J if scheme == "poisson" else J - 1
    steps = grid.bisection_steps

    if dims == 0:
        _, beta = _evaluate(a, y, scheme, np.zeros((1, 0)), steps)
        if np.isnan(beta).any():
            raise OracleResolutionExceeded("normalization has no solution")
        return np.exp(beta[0] @ a)

    axis = np.linspace(-grid.bound, grid.bound, grid.points)
    spacing = axis[1] - axis[0]
    if scheme == "poisson":
        best_val, best = _poisson_coarse(a, y, axis)
    else:
        pts = _mesh([axis] * dims)
        vals, _ = _evaluate(a, y, scheme, pts, steps, rtol=1e-9)
        k = int(np.argmax(vals))
        best_val, best = vals[k], pts[k]
    if not np.isfinite(best_val):
        raise OracleResolutionExceeded("no feasible grid point")
    if np.any(np.isclose(np.abs(best), grid.bound)):
        raise OracleResolutionExceeded("maximum on the edge of the search box")

    offsets = np.linspace(-grid.zoom_width, grid.zoom_width,
                          2 * grid.zoom_half + 1)
    local = _mesh([offsets] * dims)
    edge = np.any(np.abs(local) == grid.zoom_width, axis=1)
    shrink = grid.zoom_width / grid.zoom_half
    for _ in range(10_000):
        if spacing <= grid.resolution:
            break
        pts = best + spacing * local
        vals, _ = _evaluate(a, y, scheme, pts, steps)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best = vals[k], pts[k]
            if edge[k]:
                continue  # re-centre before shrinking
        spacing *= shrink
    else:
        raise OracleResolutionExceeded("local refinement did not settle")
    _, beta = _evaluate(a, y, scheme, best[None, :], steps)
    return np.exp(beta[0] @ a)
