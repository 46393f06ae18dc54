"""Edge reweighting schemes for the aggregation matrix.

Four schemes: ``none`` keeps raw counts, ``row`` divides each row by its
own sum (mean aggregation), ``sym`` scales entry (i, j) by
``1/sqrt(d_i d_j)`` with d the row sums, and ``dir`` scales by
``1/sqrt(in_i out_j)``. Degrees are always taken from the matrix being
normalized, so a powered matrix is normalized by its own row/column
sums. A zero degree inverts to 0 rather than infinity: nodes with
nothing to aggregate get a zero row, and the result reports how many.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graphs import SparseCountMatrix, add_self_loops

__all__ = ["NORM_SCHEMES", "WeightedAdjacency", "normalize", "gcn_canonical"]

NORM_SCHEMES = ("none", "row", "sym", "dir")


@dataclass(frozen=True)
class WeightedAdjacency:
    """Real-valued CSR matrix sharing the structure of its integer source.

    Values may be zero where a degenerate degree wiped an entry;
    ``zero_row_count`` says how many rows ended up with no mass.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    scheme: str
    zero_row_count: int

    def __post_init__(self):
        for name in ("row_offsets", "col_indices"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.int64))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if not np.all(np.isfinite(self.values)):
            raise InputError("weighted adjacency must be finite")

    @property
    def nnz(self) -> int:
        return int(len(self.col_indices))

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values.copy(), self.col_indices.copy(), self.row_offsets.copy()),
            shape=(self.n_rows, self.n_cols),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()


def _degree_sums(a: SparseCountMatrix) -> tuple[np.ndarray, np.ndarray]:
    m = a.to_scipy().astype(np.float64)
    out = np.asarray(m.sum(axis=1)).ravel()
    inn = np.asarray(m.sum(axis=0)).ravel()
    return out, inn


def _inv_sqrt(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = 1.0 / np.sqrt(x[pos])
    return out


def normalize(a: SparseCountMatrix, scheme: str) -> WeightedAdjacency:
    """Apply one of the four schemes to a count matrix.

    Rows of the ``row`` result sum to 1 wherever the source row is
    non-empty. Zero-degree factors are defined as 0, so isolated or
    source-less nodes simply aggregate nothing.
    """
    if scheme not in NORM_SCHEMES:
        raise InputError(f"unknown normalization scheme {scheme!r}")
    if not a.is_square:
        raise InputError("normalize requires a square matrix")
    out_deg, in_deg = _degree_sums(a)
    counts = a.values.astype(np.float64)
    rows = np.repeat(np.arange(a.n_rows), np.diff(a.row_offsets))
    cols = a.col_indices

    if scheme == "none":
        vals = counts
    elif scheme == "row":
        inv = np.zeros_like(out_deg)
        nz = out_deg > 0
        inv[nz] = 1.0 / out_deg[nz]
        vals = counts * inv[rows]
    elif scheme == "sym":
        f = _inv_sqrt(out_deg)
        vals = counts * f[rows] * f[cols]
    else:  # dir
        fi = _inv_sqrt(in_deg)
        fo = _inv_sqrt(out_deg)
        vals = counts * fi[rows] * fo[cols]

    row_mass = np.zeros(a.n_rows)
    np.add.at(row_mass, rows, np.abs(vals))
    zero_rows = int(np.count_nonzero(row_mass == 0))
    return WeightedAdjacency(
        n_rows=a.n_rows,
        n_cols=a.n_cols,
        row_offsets=a.row_offsets.copy(),
        col_indices=a.col_indices.copy(),
        values=vals,
        scheme=scheme,
        zero_row_count=zero_rows,
    )


def gcn_canonical(a: SparseCountMatrix) -> WeightedAdjacency:
    """Self-loops plus symmetric normalization with the looped degrees."""
    if not a.is_square:
        raise InputError("gcn_canonical requires a square matrix")
    return normalize(add_self_loops(a), "sym")
