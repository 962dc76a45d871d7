"""Goodness of fit and the empirical adjustment factor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DesignMatrix, build_design
from .errors import DimensionMismatch, InconsistentFactor, ZeroExpected, ZeroSufficientStatistic

__all__ = [
    "GofReport", "pearson_chi2", "deviance", "degrees_of_freedom",
    "adjustment_factor", "gof_report",
]


@dataclass(frozen=True)
class GofReport:
    pearson_x2: float
    deviance_g2: float
    df: int


def _expected(p_hat, y) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p_hat, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.shape != y.shape:
        raise DimensionMismatch("estimate and data differ in length")
    n = y.sum()
    if n <= 0:
        raise ValueError("data total must be positive")
    if np.any(p <= 0):
        raise ZeroExpected("zero expected count in cell(s) %s"
                           % np.flatnonzero(p <= 0).tolist())
    return n * p, y


def pearson_chi2(p_hat, y) -> float:
    """``sum (y - N p)^2 / (N p)``."""
    m, y = _expected(p_hat, y)
    return float(np.sum((y - m) ** 2 / m))


def deviance(p_hat, y) -> float:
    """``2 sum y log(y / (N p))`` with ``0 log 0 = 0``."""
    m, y = _expected(p_hat, y)
    pos = y > 0
    return float(2.0 * np.sum(y[pos] * np.log(y[pos] / m[pos])))


def degrees_of_freedom(A) -> int:
    """``I - J``; the same count holds for Poisson and multinomial sampling."""
    a = np.asarray(getattr(A, "entries", A))
    return int(a.shape[1] - a.shape[0])


def adjustment_factor(delta_hat, q, A, tol: float = 1e-6) -> float:
    """Common ratio ``A_j delta / A_j q`` over the design rows.

    Row scaling of ``A`` does not change the ratios, so raw or normalized
    designs give the same answer.

    Raises
    ------
    InconsistentFactor
        The ratios spread by more than ``tol``: ``delta_hat`` does not solve
        ``A delta = gamma A q`` for any single gamma.
    """
    a = np.asarray(getattr(A, "entries", A), dtype=float)
    delta = np.asarray(delta_hat, dtype=float)
    q = np.asarray(q, dtype=float)
    if delta.shape != (a.shape[1],) or q.shape != (a.shape[1],):
        raise DimensionMismatch("vectors must have one entry per column")
    aq = a @ q
    if np.any(aq <= 0):
        raise ZeroSufficientStatistic(np.flatnonzero(aq <= 0).tolist())
    ratios = (a @ delta) / aq
    spread = float(ratios.max() - ratios.min())
    if spread > tol:
        raise InconsistentFactor("row factors %s spread by %.3g"
                                 % (np.round(ratios, 8).tolist(), spread))
    return float(ratios.mean())


def _poisson_deviance(mu, y) -> float:
    pos = y > 0
    return float(2.0 * (np.sum(y[pos] * np.log(y[pos] / mu[pos])) - np.sum(y - mu)))


def gof_report(estimate, y, A, scheme="multinomial") -> GofReport:
    """X^2, G^2 and df for a fitted vector.

    For Poisson fits ``estimate`` holds intensities (expected counts) whose
    total need not equal ``N``, so G^2 keeps the ``-(y - mu)`` term.
    """
    y = np.asarray(y, dtype=float)
    est = np.asarray(estimate, dtype=float)
    if not isinstance(A, DesignMatrix):
        A = build_design(A)
    df = degrees_of_freedom(A)
    if str(getattr(scheme, "value", scheme)) == "poisson":
        p = est / y.sum()
        mu, y = _expected(p, y)
        return GofReport(pearson_chi2(p, y), _poisson_deviance(mu, y), df)
    return GofReport(pearson_chi2(est, y), deviance(est, y), df)
