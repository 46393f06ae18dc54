"""Directed multigraphs as integer CSR matrices.

The adjacency matrix is stored in compressed sparse row form with
non-negative integer values: entry ``(i, j)`` counts the parallel edges
from node ``i`` to node ``j``. Matrix powers of this representation count
directed walks, so edge multiplicities are preserved rather than
deduplicated, and adding self-loops is additive (the matrix gains +1 on
every diagonal entry).

All types are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError

__all__ = [
    "SparseCountMatrix",
    "DegreeVector",
    "GraphMeta",
    "from_edge_list",
    "from_dense",
    "add_self_loops",
    "transpose",
    "symmetrize",
    "degrees",
    "graph_meta",
    "read_edge_list",
    "parse_edge_list",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SparseCountMatrix:
    """CSR matrix over the non-negative integers.

    Invariants (checked on construction):
      * ``row_offsets`` has length ``n_rows + 1``, is non-decreasing and
        ends at ``len(col_indices)``;
      * column indices are strictly increasing within each row;
      * every stored value is positive (no explicit zeros).
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _frozen(np.asarray(self.row_offsets, dtype=np.int64)))
        object.__setattr__(self, "col_indices", _frozen(np.asarray(self.col_indices, dtype=np.int64)))
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.int64)))
        self._validate()

    def _validate(self):
        ro, ci, v = self.row_offsets, self.col_indices, self.values
        if self.n_rows < 0 or self.n_cols < 0:
            raise InputError("matrix dimensions must be non-negative")
        if ro.shape != (self.n_rows + 1,):
            raise InputError("row_offsets must have length n_rows + 1")
        if ro[0] != 0 or ro[-1] != len(ci) or np.any(np.diff(ro) < 0):
            raise InputError("row_offsets must be non-decreasing from 0 to nnz")
        if len(ci) != len(v):
            raise InputError("col_indices and values must have equal length")
        if len(ci) and (ci.min() < 0 or ci.max() >= self.n_cols):
            raise InputError("column index out of range")
        if np.any(v <= 0):
            raise InputError("stored values must be positive")
        for i in range(self.n_rows):
            row = ci[ro[i]:ro[i + 1]]
            if len(row) > 1 and np.any(np.diff(row) <= 0):
                raise InputError(f"column indices not strictly increasing in row {i}")

    @property
    def nnz(self) -> int:
        return int(len(self.col_indices))

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of row ``i``."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values.copy(), self.col_indices.copy(), self.row_offsets.copy()),
            shape=(self.n_rows, self.n_cols),
        )

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        for i in range(self.n_rows):
            cols, vals = self.row(i)
            out[i, cols] = vals
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseCountMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.n_rows, self.n_cols, self.col_indices.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"SparseCountMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


@dataclass(frozen=True)
class DegreeVector:
    """Per-node degree with edge multiplicity counted."""

    kind: str  # "in" or "out"
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("in", "out"):
            raise InputError(f"degree kind must be 'in' or 'out', got {self.kind!r}")
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.int64)))

    @property
    def total(self) -> int:
        return int(self.values.sum())


@dataclass(frozen=True)
class GraphMeta:
    """Structural flags recomputable from the matrix."""

    n_nodes: int
    has_self_loops: bool
    is_symmetric: bool


def _from_scipy(m: sp.spmatrix) -> SparseCountMatrix:
    m = sp.csr_matrix(m)
    m.sum_duplicates()
    m.sort_indices()
    m.eliminate_zeros()
    return SparseCountMatrix(
        n_rows=m.shape[0],
        n_cols=m.shape[1],
        row_offsets=m.indptr.astype(np.int64),
        col_indices=m.indices.astype(np.int64),
        values=m.data.astype(np.int64),
    )


def from_edge_list(edges, n_nodes: int) -> SparseCountMatrix:
    """Build the adjacency matrix of a directed multigraph.

    Duplicate ``(src, dst)`` pairs accumulate into the integer entry, so a
    doubled edge yields value 2.
    """
    if n_nodes < 0:
        raise InputError("n_nodes must be non-negative")
    edges = list(edges)
    if not edges:
        return SparseCountMatrix(n_nodes, n_nodes, np.zeros(n_nodes + 1, dtype=np.int64), [], [])
    arr = np.asarray(edges, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("edges must be (src, dst) pairs")
    if arr.min() < 0 or arr.max() >= n_nodes:
        bad = arr[(arr < 0).any(axis=1) | (arr >= n_nodes).any(axis=1)][0]
        raise InputError(f"edge endpoint out of range for n_nodes={n_nodes}: {tuple(bad)}")
    data = np.ones(len(arr), dtype=np.int64)
    coo = sp.coo_matrix((data, (arr[:, 0], arr[:, 1])), shape=(n_nodes, n_nodes))
    return _from_scipy(coo)


def from_dense(dense) -> SparseCountMatrix:
    """Adjacency matrix from a dense integer array (test convenience)."""
    dense = np.asarray(dense)
    if dense.ndim != 2:
        raise InputError("dense input must be 2-D")
    if np.any(dense < 0):
        raise InputError("entries must be non-negative")
    return _from_scipy(sp.csr_matrix(dense.astype(np.int64)))


def _require_square(a: SparseCountMatrix, op: str):
    if not a.is_square:
        raise InputError(f"{op} requires a square matrix, got {a.n_rows}x{a.n_cols}")


def add_self_loops(a: SparseCountMatrix) -> SparseCountMatrix:
    """Return the matrix with every diagonal entry incremented by 1."""
    _require_square(a, "add_self_loops")
    return _from_scipy(a.to_scipy() + sp.eye(a.n_rows, dtype=np.int64, format="csr"))


def transpose(a: SparseCountMatrix) -> SparseCountMatrix:
    _require_square(a, "transpose")
    return _from_scipy(a.to_scipy().T)


def symmetrize(a: SparseCountMatrix) -> SparseCountMatrix:
    """Return ``A + A^T`` (values add; a bidirected pair becomes 2)."""
    _require_square(a, "symmetrize")
    m = a.to_scipy()
    return _from_scipy(m + m.T)


def degrees(a: SparseCountMatrix, kind: str) -> DegreeVector:
    """Row value sums (out) or column value sums (in)."""
    _require_square(a, "degrees")
    m = a.to_scipy()
    axis = 1 if kind == "out" else 0
    vals = np.asarray(m.sum(axis=axis)).ravel()
    return DegreeVector(kind=kind, values=vals)


def graph_meta(a: SparseCountMatrix) -> GraphMeta:
    _require_square(a, "graph_meta")
    m = a.to_scipy()
    has_loops = bool(np.any(m.diagonal() > 0))
    sym = (m != m.T).nnz == 0
    return GraphMeta(n_nodes=a.n_rows, has_self_loops=has_loops, is_symmetric=sym)


def parse_edge_list(text: str, n_nodes: int | None = None, dedup: bool = False) -> SparseCountMatrix:
    """Parse the tab-separated edge-list format.

    One ``src<TAB>dst`` pair per line; ``#`` starts a comment; an optional
    ``%nodes N`` header fixes the node count, which is otherwise inferred
    as ``max endpoint + 1``. With ``dedup``, repeated pairs collapse to a
    single unit edge.
    """
    edges: list[tuple[int, int]] = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("%"):
            parts = line[1:].split()
            if len(parts) != 2 or parts[0] != "nodes":
                raise InputError(f"line {lineno}: bad header {raw.strip()!r}")
            declared = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected 'src<TAB>dst', got {raw.strip()!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise InputError(f"line {lineno}: non-integer endpoint in {raw.strip()!r}") from exc
        edges.append((src, dst))
    if n_nodes is None:
        n_nodes = declared
    if n_nodes is None:
        n_nodes = 1 + max((max(s, d) for s, d in edges), default=-1)
    if dedup:
        edges = sorted(set(edges))
    return from_edge_list(edges, n_nodes)


def read_edge_list(path: str | os.PathLike, n_nodes: int | None = None, dedup: bool = False) -> SparseCountMatrix:
    """Load a graph from an edge-list text file (see :func:`parse_edge_list`)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read edge list {path}: {exc}") from exc
    return parse_edge_list(text, n_nodes=n_nodes, dedup=dedup)
