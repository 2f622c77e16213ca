"""Matrices over the top field and rank computations over the subfield.

Two rank notions coexist here.  rank_ext is the usual rank of a matrix
over F_q^s.  rank_fq expands every entry into its s coordinates over F_q,
concatenates them along each row, and takes the rank of the resulting
r x (n*s) matrix over F_q.  The second notion is what the query matrices
of the PIR scheme leak: it cannot exceed rank_ext * s and it is invariant
under applying any fixed invertible F_q-linear map to every entry, so an
observer needs no knowledge of the hidden basis to evaluate it.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotInformationSet,
    RankDeficientGenerator,
)
from .fields import ExtElement, FieldTower, Fq


@dataclass(frozen=True)
class IndexSet:
    """A strictly increasing set of 1-based column positions."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if idx and idx[0] < 1:
            raise IndexOutOfRange("positions are 1-based")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64) - 1

    def check_range(self, n: int):
        if self.indices and self.indices[-1] > n:
            raise IndexOutOfRange(f"position {self.indices[-1]} exceeds width {n}")

    def complement(self, n: int) -> "IndexSet":
        self.check_range(n)
        inside = set(self.indices)
        return IndexSet(tuple(i for i in range(1, n + 1) if i not in inside))


class ExtMatrix:
    """Dense matrix over F_q^s stored as an (rows, cols, s) coordinate array."""

    __slots__ = ("tower", "data")

    def __init__(self, tower: FieldTower, data: np.ndarray):
        data = np.asarray(data, dtype=np.int64)
        if data.ndim != 3 or data.shape[2] != tower.s:
            raise DimensionMismatch(f"expected (rows, cols, {tower.s}) array, got {data.shape}")
        self.tower = tower
        self.data = data

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def entry(self, i: int, j: int) -> ExtElement:
        return tuple(int(c) for c in self.data[i, j])

    def copy(self) -> "ExtMatrix":
        return ExtMatrix(self.tower, self.data.copy())

    def __eq__(self, other):
        if not isinstance(other, ExtMatrix):
            return NotImplemented
        return self.tower.same_field(other.tower) and self.data.shape == other.data.shape and np.array_equal(self.data, other.data)

    def __add__(self, other: "ExtMatrix") -> "ExtMatrix":
        self._check_same(other)
        return ExtMatrix(self.tower, self.tower.fq.vadd(self.data, other.data))

    def __sub__(self, other: "ExtMatrix") -> "ExtMatrix":
        self._check_same(other)
        return ExtMatrix(self.tower, self.tower.fq.vsub(self.data, other.data))

    def __matmul__(self, other: "ExtMatrix") -> "ExtMatrix":
        if not isinstance(other, ExtMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        return ExtMatrix(self.tower, self.tower.matmul(self.data, other.data))

    def _check_same(self, other: "ExtMatrix"):
        if not self.tower.same_field(other.tower) or self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def to_rows(self) -> list[list[ExtElement]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    @classmethod
    def zeros(cls, tower: FieldTower, rows: int, cols: int) -> "ExtMatrix":
        return cls(tower, np.zeros((rows, cols, tower.s), dtype=np.int64))

    @classmethod
    def from_rows(cls, tower: FieldTower, rows) -> "ExtMatrix":
        if not rows:
            return cls.zeros(tower, 0, 0)
        data = np.array([[tower.validate(x) for x in row] for row in rows], dtype=np.int64)
        return cls(tower, data)

    @classmethod
    def random(cls, tower: FieldTower, rows: int, cols: int, rng: np.random.Generator) -> "ExtMatrix":
        return cls(tower, tower.rand(rng, (rows, cols)))


# -- subfield matrix toolkit (numpy arrays of F_q encodings) --------------------


def fq_echelon(arr: np.ndarray, fq: Fq, reduced: bool = False) -> tuple[np.ndarray, list[int]]:
    """Row echelon form over F_q with leftmost-column, topmost-row pivoting.

    Args:
        arr: (rows, cols) array of F_q encodings.
        fq: subfield context.
        reduced: eliminate above pivots too and normalise them to 1.

    Returns:
        The echelon form and the list of pivot column indices.
    """
    R = np.array(arr, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        pinv = fq.inv(int(R[r, c]))
        if pinv != 1:
            R[r] = fq.vmul(np.int64(pinv), R[r])
        if reduced:
            others = np.flatnonzero(R[:, c])
            others = others[others != r]
        else:
            below = np.flatnonzero(R[r + 1 :, c])
            others = below + r + 1
        if others.size:
            factors = R[others, c][:, None]
            R[others] = fq.vsub(R[others], fq.vmul(factors, R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def fq_rank(arr: np.ndarray, fq: Fq) -> int:
    arr = np.asarray(arr)
    if arr.size == 0:
        return 0
    return len(fq_echelon(arr, fq)[1])


def fq_matmul(a: np.ndarray, b: np.ndarray, fq: Fq) -> np.ndarray:
    return fq.matmul(a, b)


def fq_inv_matrix(arr: np.ndarray, fq: Fq) -> np.ndarray:
    """Inverse of a square matrix of F_q encodings; ValueError when singular."""
    arr = np.asarray(arr, dtype=np.int64)
    n = arr.shape[0]
    if arr.shape != (n, n):
        raise DimensionMismatch(f"expected square matrix, got {arr.shape}")
    eye = np.zeros((n, n), dtype=np.int64)
    np.fill_diagonal(eye, 1)
    R, pivots = fq_echelon(np.hstack([arr, eye]), fq, reduced=True)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:, n:]


# -- ranks over the two fields ---------------------------------------------------


def _ext_echelon_rows(rows: list[list[ExtElement]], tower: FieldTower) -> int:
    """In-place scalar elimination over F_q^s; returns the rank."""
    if not rows:
        return 0
    cols = len(rows[0])
    rank = 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(rows)) if any(rows[i][c])), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pinv = tower.ext_inv(rows[rank][c])
        rows[rank] = [tower.ext_mul(pinv, x) for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and any(rows[i][c]):
                f = rows[i][c]
                rows[i] = [tower.ext_sub(x, tower.ext_mul(f, y)) for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def rank_ext(m: ExtMatrix) -> int:
    """Rank of the matrix over the top field F_q^s."""
    return _ext_echelon_rows(m.to_rows(), m.tower)


def rank_fq(m: ExtMatrix) -> int:
    """Rank over F_q after expanding every entry into its s coordinates.

    Rows of length n become rows of length n*s over F_q; the result is at
    most min(rows, n*s) and at least rank_ext(m).
    """
    r, c = m.shape
    if r == 0 or c == 0:
        return 0
    expanded = m.data.reshape(r, c * m.tower.s)
    return fq_rank(expanded, m.tower.fq)


def change_basis(m: ExtMatrix, transform: np.ndarray) -> ExtMatrix:
    """Apply an F_q-linear map entrywise: coordinates become coords @ transform.

    For invertible transforms this re-expresses every entry in another
    basis of F_q^s over F_q; rank_fq does not change under such maps.
    """
    transform = np.asarray(transform, dtype=np.int64)
    s = m.tower.s
    if transform.shape != (s, s):
        raise DimensionMismatch(f"expected ({s}, {s}) transform, got {transform.shape}")
    r, c = m.shape
    flat = m.data.reshape(r * c, s)
    out = m.tower.fq.matmul(flat, transform).reshape(r, c, s)
    return ExtMatrix(m.tower, out)


# -- column selection --------------------------------------------------------------


def puncture(m: ExtMatrix, where: IndexSet) -> ExtMatrix:
    """Keep only the columns listed in ``where`` (in increasing order)."""
    where.check_range(m.cols)
    return ExtMatrix(m.tower, m.data[:, where.zero_based(), :])


def extend_by_zeros(m: ExtMatrix, where: IndexSet, n: int) -> ExtMatrix:
    """Spread columns of m onto positions ``where`` of a width-n matrix, zeros elsewhere.

    Round trip: puncture(extend_by_zeros(m, where, n), where) == m.
    """
    where.check_range(n)
    if m.cols != len(where):
        raise DimensionMismatch(f"matrix has {m.cols} columns but {len(where)} positions given")
    out = np.zeros((m.rows, n, m.tower.s), dtype=np.int64)
    out[:, where.zero_based(), :] = m.data
    return ExtMatrix(m.tower, out)


# -- information sets ----------------------------------------------------------------


def is_information_set(gen: ExtMatrix, columns: IndexSet) -> bool:
    """Whether the selected k columns of a full-rank k x n generator are invertible."""
    k = gen.rows
    if rank_ext(gen) != k:
        raise RankDeficientGenerator("generator matrix does not have full row rank")
    columns.check_range(gen.cols)
    if len(columns) != k:
        return False
    return rank_ext(puncture(gen, columns)) == k


def ext_inv_matrix(m: ExtMatrix) -> ExtMatrix:
    """Inverse of a square matrix over F_q^s via Gauss-Jordan elimination."""
    n = m.rows
    if m.cols != n:
        raise DimensionMismatch(f"expected square matrix, got {m.shape}")
    tower = m.tower
    rows = [row + [tower.one if i == j else tower.zero for j in range(n)] for i, row in enumerate(m.to_rows())]
    for c in range(n):
        pivot = next((i for i in range(c, n) if any(rows[i][c])), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        rows[c], rows[pivot] = rows[pivot], rows[c]
        pinv = tower.ext_inv(rows[c][c])
        rows[c] = [tower.ext_mul(pinv, x) for x in rows[c]]
        for i in range(n):
            if i != c and any(rows[i][c]):
                f = rows[i][c]
                rows[i] = [tower.ext_sub(x, tower.ext_mul(f, y)) for x, y in zip(rows[i], rows[c])]
    return ExtMatrix.from_rows(tower, [row[n:] for row in rows])


def solve_on_columns(gen: ExtMatrix, columns: IndexSet, targets: ExtMatrix) -> ExtMatrix:
    """Coefficients L with (L @ gen) restricted to ``columns`` equal to ``targets``.

    The selected submatrix is inverted once and reused for every row of
    ``targets``, so solving for many rows costs one inversion plus a
    matrix product.
    """
    if not is_information_set(gen, columns):
        raise NotInformationSet(f"columns {tuple(columns)} are not an information set")
    if targets.cols != gen.rows:
        raise DimensionMismatch(f"targets have {targets.cols} columns, expected {gen.rows}")
    inv = ext_inv_matrix(puncture(gen, columns))
    return targets @ inv
