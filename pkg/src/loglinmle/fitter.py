"""Maximum likelihood drivers for Poisson and multinomial sampling.

Poisson intensities need a single GIS(1) run on ``q = y``.  For
probabilities in a model without the overall effect the GIS(gamma) limit
need not sum to one, so a core run is alternated with a Newton update of
``gamma`` until the total is 1.  Affine models (prescribed log odds ratios
``D log delta = psi``) use the same machinery started from a vector with
the required odds ratios.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .design import (DesignMatrix, NormalizedDesign, as_kernel,
                     build_design, kernel_basis, normalize)
from .errors import (DimensionMismatch, InconsistentStart, NonPositiveGamma,
                     NotConverged, SingularSystem)
from .gis import GisConfig, StepTrace, run_gis

__all__ = [
    "SamplingScheme", "FitConfig", "FitResult",
    "fit_poisson", "fit_multinomial", "fit_affine", "fit",
    "gamma_adjust", "initial_point_from_psi",
]

_ODDS_TOL = 1e-8
_MAX_HALVINGS = 30


class SamplingScheme(str, enum.Enum):
    POISSON = "poisson"
    MULTINOMIAL = "multinomial"


@dataclass(frozen=True)
class FitConfig:
    """Tolerances for both loops.

    ``strict_paper`` restarts every core run from the initial vector instead
    of warm-starting from the previous limit; the result is the same, only
    the iteration counts differ.
    """

    core: GisConfig = field(default_factory=GisConfig)
    tol_total: float = 1e-6
    max_adjust: int = 500
    strict_paper: bool = False

    def __post_init__(self):
        if not self.tol_total > 0:
            raise ValueError("tol_total must be positive")
        if self.max_adjust < 1:
            raise ValueError("max_adjust must be at least 1")


@dataclass
class FitResult:
    estimate: np.ndarray
    gamma_hat: float
    total: float
    adjust_steps: int
    core_iterations: list[int]
    traces: list[list[StepTrace]]
    scheme: SamplingScheme
    gammas: list[float] = field(default_factory=list)
    core_totals: list[float] = field(default_factory=list)
    converged: bool = True


def _design(A) -> DesignMatrix:
    return A if isinstance(A, DesignMatrix) else build_design(A)


def _counts(y, num_cells: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (num_cells,):
        raise DimensionMismatch("data has length %d, design has %d cells"
                                % (y.size, num_cells))
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValueError("counts must be finite and non-negative")
    return y


def gamma_adjust(gamma: float, delta_tilde, A: NormalizedDesign, q) -> float:
    """Newton update of the adjustment factor towards ``1' delta = 1``.

    The derivative of the core limit's total with respect to gamma is
    ``gamma (Aq)' (A diag(delta) A')^{-1} (Aq)``.  If the full step would make
    gamma non-positive it is halved, at most 30 times.
    """
    if isinstance(A, DesignMatrix):
        A = normalize(A)
    delta = np.asarray(delta_tilde, dtype=float)
    q = np.asarray(q, dtype=float)
    a = A.entries
    aq = a @ q
    info = (a * delta) @ a.T
    try:
        slope = gamma * float(aq @ np.linalg.solve(info, aq))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("A diag(delta) A' is singular") from exc
    if not np.isfinite(slope) or slope <= 0:
        raise SingularSystem("non-positive Newton slope %r" % slope)
    step = (delta.sum() - 1.0) / slope
    for _ in range(_MAX_HALVINGS + 1):
        new = gamma - step
        if new > 0:
            return float(new)
        step /= 2.0
    raise NonPositiveGamma("gamma update stays non-positive after %d halvings"
                           % _MAX_HALVINGS)


def initial_point_from_psi(D, psi) -> np.ndarray:
    """Minimum-norm positive vector with ``D log(delta) = psi``."""
    d = np.asarray(as_kernel(D).entries, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (d.shape[0],):
        raise DimensionMismatch("psi has %d entries, kernel has %d rows"
                                % (psi.size, d.shape[0]))
    if not np.all(np.isfinite(psi)):
        raise ValueError("psi must be finite")
    if d.shape[0] == 0:
        return np.ones(d.shape[1])
    try:
        w = np.linalg.solve(d @ d.T, psi)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("kernel basis is not of full row rank") from exc
    return np.exp(d.T @ w)


def _poisson(A: DesignMatrix, y, cfg: FitConfig, start) -> FitResult:
    out = run_gis(y, 1.0, normalize(A), cfg.core, start=start)
    return FitResult(out.limit, 1.0, float(out.limit.sum()), 0,
                     [out.iterations], [out.trace], SamplingScheme.POISSON,
                     gammas=[1.0], core_totals=[float(out.limit.sum())])


def _multinomial(A: DesignMatrix, y, cfg: FitConfig, start) -> FitResult:
    if y.sum() <= 0:
        raise ValueError("multinomial data need a positive total")
    A1 = normalize(A)
    q = y / y.sum()
    gamma = 1.0
    initial = None if start is None else np.asarray(start, dtype=float)
    current = initial
    iterations, traces, gammas, totals = [], [], [], []
    for d in range(cfg.max_adjust + 1):
        out = run_gis(q, gamma, A1, cfg.core, start=current)
        iterations.append(out.iterations)
        traces.append(out.trace)
        gammas.append(gamma)
        total = float(out.limit.sum())
        totals.append(total)
        if abs(total - 1.0) <= cfg.tol_total:
            return FitResult(out.limit, gamma, total, d, iterations, traces,
                             SamplingScheme.MULTINOMIAL, gammas, totals)
        if d == cfg.max_adjust:
            break
        gamma = gamma_adjust(gamma, out.limit, A1, q)
        current = initial if cfg.strict_paper else out.limit
    raise NotConverged("total %.10g still off 1 after %d gamma adjustments"
                       % (total, cfg.max_adjust),
                       last=out.limit, trace=traces, iterations=cfg.max_adjust)


def fit_poisson(A, y, cfg: FitConfig | None = None) -> FitResult:
    """MLE of Poisson intensities: GIS(1) on the normalized design, ``q = y``."""
    A = _design(A)
    return _poisson(A, _counts(y, A.num_cells), cfg or FitConfig(), None)


def fit_multinomial(A, y, cfg: FitConfig | None = None) -> FitResult:
    """MLE of cell probabilities by alternating GIS(gamma) and gamma updates."""
    A = _design(A)
    return _multinomial(A, _counts(y, A.num_cells), cfg or FitConfig(), None)


def fit_affine(A, y, scheme=SamplingScheme.MULTINOMIAL,
               cfg: FitConfig | None = None, *, psi=None, start=None,
               kernel=None) -> FitResult:
    """MLE under ``D log(delta) = psi``.

    Give ``psi`` (log odds ratios aligned with ``kernel``, which defaults to
    the canonical :func:`kernel_basis`), an explicit positive ``start``, or
    both.  With both, ``start`` must reproduce ``psi`` within 1e-8.
    """
    A = _design(A)
    y = _counts(y, A.num_cells)
    scheme = SamplingScheme(scheme)
    D = kernel_basis(A) if kernel is None else as_kernel(kernel)
    if D.num_cells != A.num_cells:
        raise DimensionMismatch("kernel has %d columns, design has %d"
                                % (D.num_cells, A.num_cells))
    if start is None and psi is None:
        raise ValueError("fit_affine needs psi or start")
    if start is None:
        start = initial_point_from_psi(D, psi)
    else:
        start = np.asarray(start, dtype=float)
        if start.shape != (A.num_cells,) or np.any(start <= 0):
            raise InconsistentStart("start must be a positive vector of "
                                    "length %d" % A.num_cells)
        if psi is not None:
            psi = np.asarray(psi, dtype=float)
            got = D.log_odds(start)
            if psi.shape != got.shape or np.max(np.abs(got - psi), initial=0) > _ODDS_TOL:
                raise InconsistentStart(
                    "start has log odds %s, expected %s" % (got, psi))
    cfg = cfg or FitConfig()
    if scheme is SamplingScheme.POISSON:
        return _poisson(A, y, cfg, start)
    return _multinomial(A, y, cfg, start)


def fit(A, y, scheme=SamplingScheme.MULTINOMIAL,
        cfg: FitConfig | None = None) -> FitResult:
    if SamplingScheme(scheme) is SamplingScheme.POISSON:
        return fit_poisson(A, y, cfg)
    return fit_multinomial(A, y, cfg)
