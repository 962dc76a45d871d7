"""Exception hierarchy for log-linear model fitting."""

from __future__ import annotations


class LogLinearError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(LogLinearError, ValueError):
    pass


class NegativeEntry(LogLinearError, ValueError):
    pass


class ZeroColumn(LogLinearError, ValueError):
    pass


class RankDeficient(LogLinearError, ValueError):
    pass


class DimensionMismatch(LogLinearError, ValueError):
    pass


class UndefinedRatio(LogLinearError, ValueError):
    """A cell has p_i > 0 while q_i = 0."""


class ZeroSufficientStatistic(LogLinearError, ValueError):
    """Some row j of the design has A_j q = 0, so the MLE may not exist."""

    def __init__(self, rows, message=None):
        self.rows = list(rows)
        if message is None:
            message = "zero sufficient statistic in design row(s) %s" % (
                ", ".join(str(r) for r in self.rows))
        super().__init__(message)


class NonPositiveDelta(LogLinearError, ValueError):
    pass


class NotConverged(LogLinearError, RuntimeError):
    """Iteration limit reached.

    The last iterate and the trace recorded so far are attached, since
    persistent non-convergence usually signals that the MLE does not exist.
    """

    def __init__(self, message, last=None, trace=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.trace = trace if trace is not None else []
        self.iterations = iterations


class SingularSystem(LogLinearError, ArithmeticError):
    pass


class NonPositiveGamma(LogLinearError, ArithmeticError):
    pass


class InconsistentStart(LogLinearError, ValueError):
    pass


class ZeroExpected(LogLinearError, ValueError):
    pass


class InconsistentFactor(LogLinearError, ValueError):
    pass


class BoundaryMLE(LogLinearError, ValueError):
    pass


class OracleResolutionExceeded(LogLinearError, RuntimeError):
    pass


__all__ = [name for name, obj in list(globals().items())
           if isinstance(obj, type) and issubclass(obj, LogLinearError)]
