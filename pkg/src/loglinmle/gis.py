"""GIS(gamma): generalized iterative scaling without the overall effect.

For a normalized design ``A`` (largest column sum 1), data ``q`` and a fixed
``gamma > 0`` the update is::

    delta_i <- delta_i * prod_j (gamma * A_j q / A_j delta) ** a_ji

It converges to the point with ``A delta = gamma A q`` whose generalized log
odds ratios equal those of the starting vector.  The update multiplies by
factors in the row span of ``A`` only, so the odds ratios never move.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .design import NormalizedDesign, as_normalized
from .errors import (DimensionMismatch, NonPositiveDelta, NotConverged,
                     UndefinedRatio, ZeroSufficientStatistic)

__all__ = [
    "GisConfig", "StepTrace", "GisOutcome",
    "kl_divergence", "bregman_divergence", "gis_step", "gis_iterates",
    "run_gis", "write_trace_csv", "TRACE_COLUMNS",
]

TRACE_COLUMNS = ("iter", "residual", "kl", "bregman", "total")


@dataclass(frozen=True)
class GisConfig:
    tol_core: float = 1e-10
    max_iters: int = 100_000

    def __post_init__(self):
        if not self.tol_core > 0:
            raise ValueError("tol_core must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class StepTrace:
    """Diagnostics of one iterate ``delta^(n)``.

    ``kl`` and ``bregman`` are measured from the scaled data ``gamma * q`` to
    the iterate; the Bregman value is the quantity GIS(gamma) decreases.
    """

    iter: int
    suffstat_residual: float
    kl: float
    bregman: float
    total: float

    def as_row(self) -> tuple:
        return (self.iter, self.suffstat_residual, self.kl, self.bregman,
                self.total)


@dataclass
class GisOutcome:
    limit: np.ndarray
    iterations: int
    converged: bool
    trace: list[StepTrace] = field(default_factory=list)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch("lengths %d and %d differ" % (p.size, q.size))
    return p, q


def _kl_terms(p, q):
    pos = p > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(pos, p * (np.log(p) - np.log(q)), 0.0)


def kl_divergence(p, q) -> float:
    """``sum_i p_i log(p_i / q_i)`` with ``0 log 0 = 0``.

    Not necessarily non-negative when ``p`` and ``q`` have different totals.
    """
    p, q = _pair(p, q)
    if np.any(q[p > 0] <= 0):
        raise UndefinedRatio("p_i > 0 where q_i = 0")
    return float(np.sum(_kl_terms(p, q)))


def _bregman_terms(t, u):
    r = t / u
    x = r - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.where(np.abs(x) < 0.5, np.log1p(x), np.log(t) - np.log(u))
        terms = np.where(t > 0, r * log_r - x, 1.0)
    return u * np.maximum(terms, 0.0)


def bregman_divergence(t, u) -> float:
    """Bregman divergence of ``x log x``: ``K(t, u) - (sum t - sum u)``.

    Evaluated cell-wise as ``u * (r log r - (r - 1))`` with ``r = t/u`` and
    ``log r`` from ``log1p`` near 1, which avoids cancellation when ``t`` is
    close to ``u``.
    """
    t, u = _pair(t, u)
    if np.any(u <= 0):
        raise ValueError("second argument must be strictly positive")
    if np.any(t < 0):
        raise ValueError("first argument must be non-negative")
    return float(np.sum(_bregman_terms(t, u)))


def _trace(scaled, iterates, residuals) -> list[StepTrace]:
    # all diagnostics in one vectorized pass over the stacked iterates
    d = np.array(iterates)
    with np.errstate(over="ignore", invalid="ignore"):
        kl = _kl_terms(scaled, d).sum(axis=1)
        breg = _bregman_terms(scaled, d).sum(axis=1)
        totals = d.sum(axis=1)
    return [StepTrace(n, *vals) for n, vals in
            enumerate(zip(residuals, kl.tolist(), breg.tolist(), totals.tolist()))]


def _check_suffstats(A: NormalizedDesign, q: np.ndarray) -> np.ndarray:
    if q.shape != (A.num_cells,):
        raise DimensionMismatch("data has length %d, design has %d cells"
                                % (q.size, A.num_cells))
    if np.any(q < 0):
        raise ValueError("data must be non-negative")
    aq = A.entries @ q
    zero = np.flatnonzero(aq <= 0)
    if zero.size:
        raise ZeroSufficientStatistic(zero.tolist())
    return aq


def _step(log_delta, delta, target, entries):
    return log_delta + entries.T @ (np.log(target) - np.log(entries @ delta))


def gis_step(delta, q, gamma: float, A) -> np.ndarray:
    """One GIS(gamma) update of ``delta``; the product is taken in log space."""
    A = as_normalized(A)
    q = np.asarray(q, dtype=float)
    delta = np.asarray(delta, dtype=float)
    aq = _check_suffstats(A, q)
    if delta.shape != q.shape:
        raise DimensionMismatch("delta and q differ in length")
    if np.any(delta <= 0) or not np.all(np.isfinite(delta)):
        raise NonPositiveDelta("delta must be strictly positive and finite")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return np.exp(_step(np.log(delta), delta, gamma * aq, A.entries))


def _start_vector(A, q, start) -> np.ndarray:
    if start is None:
        return np.ones(A.num_cells)
    delta = np.array(start, dtype=float)
    if delta.shape != q.shape:
        raise DimensionMismatch("start and q differ in length")
    if np.any(delta <= 0):
        raise NonPositiveDelta("start must be strictly positive")
    return delta


def gis_iterates(q, gamma: float, A, start=None) -> Iterator[np.ndarray]:
    """Yield ``delta^(0), delta^(1), ...`` indefinitely.

    ``delta^(0)`` is the all-ones vector unless ``start`` is given.
    """
    A = as_normalized(A)
    q = np.asarray(q, dtype=float)
    target = gamma * _check_suffstats(A, q)
    delta = _start_vector(A, q, start)
    log_delta = np.log(delta)
    while True:
        yield delta
        log_delta = _step(log_delta, delta, target, A.entries)
        delta = np.exp(log_delta)


def run_gis(q, gamma: float, A, cfg: GisConfig | None = None,
            start=None) -> GisOutcome:
    """Iterate GIS(gamma) until ``||A delta - gamma A q||_2 <= cfg.tol_core``.

    Raises
    ------
    ZeroSufficientStatistic
        Some ``A_j q`` is zero.
    NotConverged
        ``cfg.max_iters`` updates were not enough; the exception carries the
        last iterate and the trace.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    cfg = cfg or GisConfig()
    A = as_normalized(A)
    q = np.asarray(q, dtype=float)
    scaled = gamma * q
    target = gamma * _check_suffstats(A, q)
    delta = _start_vector(A, q, start)
    log_target, a, at = np.log(target), A.entries, A.entries.T.copy()
    log_delta = np.log(delta)
    iterates, residuals = [], []
    n = 0
    while True:
        ad = a @ delta
        diff = ad - target
        resid = math.sqrt(diff @ diff)
        iterates.append(delta)
        residuals.append(resid)
        if resid <= cfg.tol_core:
            return GisOutcome(delta, n, True, _trace(scaled, iterates, residuals))
        if n >= cfg.max_iters:
            raise NotConverged(
                "GIS(%g) did not converge in %d iterations (residual %.3g); "
                "the MLE may not exist" % (gamma, n, resid),
                last=delta, trace=_trace(scaled, iterates, residuals), iterations=n)
        if not math.isfinite(resid) or not np.all(delta > 0):
            raise NotConverged(
                "GIS(%g) iterate left the positive orthant at step %d; "
                "the MLE may not exist" % (gamma, n),
                last=delta, trace=_trace(scaled, iterates, residuals), iterations=n)
        log_delta = log_delta + at @ (log_target - np.log(ad))
        delta = np.exp(log_delta)
        n += 1
    raise AssertionError("unreachable")


def write_trace_csv(path, trace) -> None:
    """Write a trace as CSV with columns ``iter,residual,kl,bregman,total``.

    ``trace`` is a list of :class:`StepTrace` or a list of such lists (one
    per core run of a multinomial fit); in the latter case ``iter`` counts
    rows across all runs so the file stays a single plottable series.
    """
    runs = trace if trace and isinstance(trace[0], list) else [trace]
    steps = [step for run in runs for step in run]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for k, step in enumerate(steps):
            writer.writerow([k if len(runs) > 1 else step.iter] +
                            [repr(float(x)) for x in step.as_row()[1:]])
