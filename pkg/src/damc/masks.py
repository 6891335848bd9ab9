"""Observation masks: index sets over matrix positions and the mask/vec operators.

An :class:`IndexSet` is a canonically ordered set of (row, col) positions of a
fixed matrix shape.  The canonical order is row-major lexicographic, and every
vectorization in the package (``vec_extract`` / ``vec_scatter``) follows it, so
element order is reproducible across runs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError

__all__ = [
    "IndexSet",
    "as_matrix",
    "apply_mask",
    "complement",
    "vec_extract",
    "vec_scatter",
]


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains NaN or Inf entries")
    return a


class IndexSet:
    """A sorted, duplicate-free set of (row, col) positions of a fixed shape.

    Parameters
    ----------
    shape : tuple of int
        (rows, cols) of the host matrix; both strictly positive.
    positions : iterable of (int, int), optional
        Zero-based positions.  They are sorted row-major lexicographically;
        duplicates or out-of-bounds positions raise :class:`DimensionError`.
    """

    __slots__ = ("shape", "_flat", "rows_idx", "cols_idx")

    def __init__(self, shape, positions=()):
        rows, cols = int(shape[0]), int(shape[1])
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"shape must be positive, got {(rows, cols)}")
        self.shape = (rows, cols)
        pos = np.asarray(list(positions) if not isinstance(positions, np.ndarray) else positions)
        if pos.size == 0:
            flat = np.empty(0, dtype=np.int64)
        else:
            if pos.ndim != 2 or pos.shape[1] != 2:
                raise DimensionError("positions must be pairs (i, j)")
            i = pos[:, 0].astype(np.int64)
            j = pos[:, 1].astype(np.int64)
            if (i < 0).any() or (i >= rows).any() or (j < 0).any() or (j >= cols).any():
                raise DimensionError(f"positions out of bounds for shape {(rows, cols)}")
            flat = np.sort(i * cols + j)
            if flat.size > 1 and (np.diff(flat) == 0).any():
                raise DimensionError("duplicate positions in index set")
        self._flat = flat
        self.rows_idx = flat // cols
        self.cols_idx = flat % cols

    @classmethod
    def _from_flat(cls, shape, flat: np.ndarray) -> "IndexSet":
        # internal: flat is already sorted, unique, and in bounds
        s = cls.__new__(cls)
        s.shape = (int(shape[0]), int(shape[1]))
        s._flat = np.asarray(flat, dtype=np.int64)
        s.rows_idx = s._flat // s.shape[1]
        s.cols_idx = s._flat % s.shape[1]
        return s

    @classmethod
    def from_mask(cls, mask) -> "IndexSet":
        """Build from a boolean matrix; True marks membership."""
        m = np.asarray(mask, dtype=bool)
        if m.ndim != 2:
            raise DimensionError("mask must be 2-D")
        return cls._from_flat(m.shape, np.flatnonzero(m.ravel()))

    @classmethod
    def full(cls, shape) -> "IndexSet":
        """All positions of the given shape."""
        rows, cols = int(shape[0]), int(shape[1])
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"shape must be positive, got {(rows, cols)}")
        return cls._from_flat((rows, cols), np.arange(rows * cols, dtype=np.int64))

    def __len__(self) -> int:
        return int(self._flat.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IndexSet)
            and self.shape == other.shape
            and np.array_equal(self._flat, other._flat)
        )

    def __hash__(self):
        return hash((self.shape, self._flat.tobytes()))

    def __repr__(self) -> str:
        return f"IndexSet(shape={self.shape}, size={len(self)})"

    def positions(self):
        """Positions as a list of (i, j) tuples in canonical order."""
        return list(zip(self.rows_idx.tolist(), self.cols_idx.tolist()))

    def contains(self, i: int, j: int) -> bool:
        flat = i * self.shape[1] + j
        k = np.searchsorted(self._flat, flat)
        return bool(k < self._flat.size and self._flat[k] == flat)

    def boolean_mask(self) -> np.ndarray:
        """Dense boolean membership matrix."""
        m = np.zeros(self.shape, dtype=bool)
        m[self.rows_idx, self.cols_idx] = True
        return m

    def complement(self) -> "IndexSet":
        """All positions of the shape not in this set."""
        total = self.shape[0] * self.shape[1]
        if self._flat.size == 0:
            return IndexSet.full(self.shape)
        keep = np.ones(total, dtype=bool)
        keep[self._flat] = False
        return IndexSet._from_flat(self.shape, np.flatnonzero(keep))

    def _check_shape(self, X: np.ndarray):
        if X.shape != self.shape:
            raise DimensionError(f"matrix shape {X.shape} != index-set shape {self.shape}")


def apply_mask(X, S: IndexSet) -> np.ndarray:
    """Zero out every entry of ``X`` outside the index set ``S``."""
    X = as_matrix(X, "X")
    S._check_shape(X)
    out = np.zeros_like(X)
    out[S.rows_idx, S.cols_idx] = X[S.rows_idx, S.cols_idx]
    return out


def complement(S: IndexSet) -> IndexSet:
    """Complement of ``S`` within its shape."""
    return S.complement()


def vec_extract(X, S: IndexSet) -> np.ndarray:
    """Entries of ``X`` at the positions of ``S``, in canonical order."""
    X = as_matrix(X, "X")
    S._check_shape(X)
    return X[S.rows_idx, S.cols_idx].copy()


def vec_scatter(v, S: IndexSet) -> np.ndarray:
    """Matrix of ``S.shape`` with ``v`` placed at ``S``'s positions, zeros elsewhere.

    Inverse of :func:`vec_extract` on the support of ``S``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != len(S):
        raise DimensionError(f"vector length {v.size} != index-set size {len(S)}")
    out = np.zeros(S.shape, dtype=np.float64)
    out[S.rows_idx, S.cols_idx] = v
    return out
