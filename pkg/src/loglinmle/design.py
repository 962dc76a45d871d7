"""Design matrices, normalization, the overall effect and integer kernel bases.

A general log-linear model is given by a J x I non-negative integer matrix
``A`` of full row rank without zero columns: ``log(delta)`` lies in the row
span of ``A``.  Its dual description uses an integer matrix ``D`` whose rows
span ``Ker(A)``, so that ``D @ log(delta) = 0`` (or a prescribed ``psi`` for
affine models).

All rank and kernel computations are exact (rational arithmetic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (DimensionMismatch, EmptyInput, NegativeEntry,
                     RankDeficient, ZeroColumn)

__all__ = [
    "DesignMatrix", "NormalizedDesign", "KernelBasis",
    "build_design", "l1_norm", "normalize", "has_overall_effect",
    "kernel_basis", "check_kernel_pair", "exact_rank", "as_normalized",
    "read_matrix_csv", "write_matrix_csv",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Validated J x I non-negative integer design matrix.

    Build instances with :func:`build_design`; the constructor does not
    re-validate.
    """

    entries: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def num_cells(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return "DesignMatrix(%s)" % self.entries.tolist()


@dataclass(frozen=True, eq=False)
class NormalizedDesign:
    """Design divided by its L1 norm so the largest column sum is 1.

    ``slack[i] = 1 - sum_j entries[j, i]`` is the weight the GIS update
    implicitly puts on a unit factor for cell ``i``.
    """

    entries: np.ndarray
    slack: np.ndarray
    norm: int = 1

    @property
    def num_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def num_cells(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class KernelBasis:
    """Integer matrix whose rows form a basis of ``Ker(A)``."""

    entries: np.ndarray

    @property
    def num_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def num_cells(self) -> int:
        return self.entries.shape[1]

    def log_odds(self, delta) -> np.ndarray:
        """Generalized log odds ratios ``D @ log(delta)``."""
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.num_cells,):
            raise DimensionMismatch(
                "vector of length %d does not match %d cells"
                % (delta.size, self.num_cells))
        return self.entries.astype(float) @ np.log(delta)

    def __eq__(self, other):
        if not isinstance(other, KernelBasis):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return "KernelBasis(%s)" % self.entries.tolist()


# ---------------------------------------------------------------------------
# exact linear algebra helpers

def _rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivots)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def exact_rank(matrix) -> int:
    """Rank over the rationals of an integer (or rational) matrix."""
    rows = [list(row) for row in np.asarray(matrix, dtype=object)]
    if not rows or not rows[0]:
        return 0
    return len(_rref(rows)[1])


def _as_int_matrix(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=object)
    except ValueError as exc:  # ragged input on newer numpy
        raise DimensionMismatch("rows have unequal lengths") from exc
    if arr.ndim != 2:
        raise DimensionMismatch("rows have unequal lengths")
    out = np.empty(arr.shape, dtype=np.int64)
    for idx, x in np.ndenumerate(arr):
        if isinstance(x, (float, np.floating)):
            if not float(x).is_integer():
                raise ValueError("design entries must be integers, got %r" % x)
            x = int(x)
        elif isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError("design entries must be integers, got %r" % x)
            x = int(x)
        out[idx] = int(x)
    return out


# ---------------------------------------------------------------------------
# operations

def build_design(rows: Iterable[Sequence[int]]) -> DesignMatrix:
    """Validate integer rows and return a :class:`DesignMatrix`.

    Raises
    ------
    EmptyInput
        No rows, or rows of length zero.
    NegativeEntry, ZeroColumn, RankDeficient
        Structural invariants violated.
    """
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        raise EmptyInput("design matrix needs at least one non-empty row")
    if len({len(r) for r in rows}) != 1:
        raise DimensionMismatch("rows have unequal lengths")
    a = _as_int_matrix(rows)
    if (a < 0).any():
        j, i = map(int, np.argwhere(a < 0)[0])
        raise NegativeEntry("negative entry %d at row %d, column %d"
                            % (a[j, i], j, i))
    zero = np.flatnonzero(a.sum(axis=0) == 0)
    if zero.size:
        raise ZeroColumn("all-zero column(s): %s" % zero.tolist())
    J, I = a.shape
    rank = exact_rank(a)
    if rank < J:
        raise RankDeficient("rank %d < %d rows" % (rank, J))
    return DesignMatrix(_frozen(a))


def l1_norm(A: DesignMatrix) -> int:
    """Maximal column sum of ``A``."""
    return int(np.asarray(A.entries).sum(axis=0).max())


def normalize(A: DesignMatrix) -> NormalizedDesign:
    norm = l1_norm(A)
    entries = A.entries.astype(float) / norm
    # from integer column sums, so the zero slack of the max column is exact
    slack = (norm - A.entries.sum(axis=0)) / norm
    return NormalizedDesign(_frozen(entries), _frozen(slack.astype(float)), norm)


def as_normalized(A) -> NormalizedDesign:
    """Accept a DesignMatrix, a NormalizedDesign, or raw integer rows."""
    if isinstance(A, NormalizedDesign):
        return A
    if not isinstance(A, DesignMatrix):
        A = build_design(A)
    return normalize(A)


def has_overall_effect(A: DesignMatrix, tol: float = 1e-9) -> bool:
    """True iff the all-ones row vector lies in the row span of ``A``.

    Decided by the residual norm of the least-squares fit ``A.T @ x = 1``.
    Plain (possibly rank deficient) arrays are accepted as well.
    """
    a = np.asarray(getattr(A, "entries", A), dtype=float)
    ones = np.ones(a.shape[1])
    x, *_ = np.linalg.lstsq(a.T, ones, rcond=None)
    return bool(np.linalg.norm(a.T @ x - ones) <= tol)


def _canonical_row(row: Sequence[Fraction]) -> list[int]:
    den = 1
    for x in row:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x != 0)
    if first < 0:
        ints = [-x for x in ints]
    return ints


def kernel_basis(A: DesignMatrix) -> KernelBasis:
    """Canonical integer basis of ``Ker(A)``.

    One row per free column of the RREF of ``A``: the free variable is set to
    one, pivots are back-substituted, denominators cleared, the row divided
    by its gcd and its first nonzero entry made positive.  For square ``A``
    the basis is empty (shape ``0 x I``).
    """
    a = np.asarray(A.entries)
    J, I = a.shape
    rref, pivots = _rref(a.tolist())
    free = [c for c in range(I) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * I
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -rref[r][f]
        basis.append(_canonical_row(v))
    entries = np.array(basis, dtype=np.int64).reshape(len(basis), I)
    return KernelBasis(_frozen(entries))


def check_kernel_pair(A: DesignMatrix, D) -> bool:
    """True iff ``D @ A.T == 0`` and ``rank(D) == I - J``."""
    d = np.asarray(D.entries if isinstance(D, KernelBasis) else D)
    a = np.asarray(A.entries)
    if d.size == 0:
        return a.shape[0] == a.shape[1]
    if d.ndim != 2 or d.shape[1] != a.shape[1]:
        raise DimensionMismatch("kernel has %s columns, design has %d"
                                % (d.shape[-1], a.shape[1]))
    prod = d.astype(object) @ a.T.astype(object)
    if any(x != 0 for x in prod.ravel()):
        return False
    return exact_rank(d) == a.shape[1] - a.shape[0]


def as_kernel(D) -> KernelBasis:
    if isinstance(D, KernelBasis):
        return D
    return KernelBasis(_frozen(_as_int_matrix([list(r) for r in D])))


# ---------------------------------------------------------------------------
# CSV files: one matrix row per line, comma separated integers

def read_matrix_csv(path) -> list[list[int]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise ValueError("%s:%d: expected comma separated integers"
                             % (path, lineno)) from exc
    return rows


def write_matrix_csv(path, matrix) -> None:
    m = np.asarray(getattr(matrix, "entries", matrix))
    text = "".join(",".join(str(int(x)) for x in row) + "\n" for row in m)
    Path(path).write_text(text)
