"""Loading dataset directories and writing CSV artifacts.

A dataset directory holds plain text files:

* ``edges.tsv`` — the edge-list format of :mod:`hopscope.graphs`
  (``src<TAB>dst`` lines, ``#`` comments, optional ``%nodes N`` header);
* ``labels.tsv`` — one ``node<TAB>class`` line per node;
* ``features.csv`` — optional; one ``node,v1,v2,...`` row per node.
  When absent the bundle is tagged as uniform-feature.

Node and class ids may be arbitrary non-negative integers; the loader
remaps both to dense ranges. All CSV output uses UTF-8, ``.`` decimals,
a header row, deterministic row order, and 12 significant digits for
reals, so identical inputs always produce byte-identical files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, InputError
from .graphs import SparseCountMatrix, from_dense, from_edge_list
from .normalization import WeightedAdjacency

__all__ = [
    "DATA_DIR_ENV",
    "DatasetBundle",
    "DatasetStats",
    "dataset_stats",
    "load_dataset",
    "resolve_dataset_dir",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_sweep_csv",
    "save_dataset",
    "fmt_real",
]

DATA_DIR_ENV = "HOPSCOPE_DATA_DIR"


def fmt_real(x: float) -> str:
    """12-significant-digit decimal rendering used by every CSV writer."""
    return format(float(x), ".12g")


@dataclass(frozen=True)
class DatasetStats:
    n_nodes: int
    n_edges: int
    n_classes: int
    pct_no_in: float
    pct_no_out: float
    class_sizes: tuple[int, ...]


@dataclass(frozen=True)
class DatasetBundle:
    graph: SparseCountMatrix
    features: np.ndarray | None  # None means uniform (all-ones) features
    labels: np.ndarray
    name: str
    n_classes: int
    stats: DatasetStats

    def __post_init__(self):
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)


def dataset_stats(graph: SparseCountMatrix, labels: np.ndarray) -> DatasetStats:
    """Recompute the summary statistics from in-memory data."""
    m = graph.to_scipy()
    out_deg = np.asarray(m.sum(axis=1)).ravel()
    in_deg = np.asarray(m.sum(axis=0)).ravel()
    n = graph.n_rows
    counts = np.bincount(labels)
    return DatasetStats(
        n_nodes=n,
        n_edges=int(graph.values.sum()),
        n_classes=int(labels.max()) + 1 if len(labels) else 0,
        pct_no_in=100.0 * float(np.count_nonzero(in_deg == 0)) / n if n else 0.0,
        pct_no_out=100.0 * float(np.count_nonzero(out_deg == 0)) / n if n else 0.0,
        class_sizes=tuple(int(c) for c in counts),
    )


def _read_lines(path: Path) -> list[tuple[int, str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"missing or unreadable file: {path}") from exc
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def _parse_edges(path: Path) -> tuple[list[tuple[int, int]], int | None]:
    pairs = []
    declared = None
    for lineno, line in _read_lines(path):
        if line.startswith("%"):
            parts = line[1:].split()
            if len(parts) != 2 or parts[0] != "nodes":
                raise DatasetError(f"{path}:{lineno}: bad header {line!r}")
            declared = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DatasetError(f"{path}:{lineno}: expected 'src<TAB>dst'")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise DatasetError(f"{path}:{lineno}: non-integer endpoint") from exc
    return pairs, declared


def load_dataset(dir_path: str | os.PathLike, dedup: bool = False) -> DatasetBundle:
    """Load a dataset directory into a validated bundle.

    With a ``%nodes N`` header the edge ids must already be dense below
    N (isolated nodes allowed); otherwise the sorted distinct endpoint
    ids are remapped to 0..n-1. Every node needs exactly one label;
    features, when present, need exactly one row per node.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    pairs, declared = _parse_edges(root / "edges.tsv")
    if dedup:
        pairs = sorted(set(pairs))

    if declared is not None:
        n = declared
        if pairs and max(max(p) for p in pairs) >= n:
            raise DatasetError(f"edge endpoint exceeds declared %nodes {n}")
        remap = None
    else:
        ids = sorted({x for p in pairs for x in p})
        n = len(ids)
        remap = {orig: i for i, orig in enumerate(ids)}
        pairs = [(remap[s], remap[d]) for s, d in pairs]
    graph = from_edge_list(pairs, n)

    raw_labels: dict[int, int] = {}
    for lineno, line in _read_lines(root / "labels.tsv"):
        parts = line.split()
        if len(parts) != 2:
            raise DatasetError(f"labels.tsv:{lineno}: expected 'node<TAB>class'")
        node, cls = int(parts[0]), int(parts[1])
        if remap is not None:
            if node not in remap:
                raise DatasetError(f"labels.tsv:{lineno}: unknown node {node}")
            node = remap[node]
        elif not (0 <= node < n):
            raise DatasetError(f"labels.tsv:{lineno}: unknown node {node}")
        if node in raw_labels:
            raise DatasetError(f"labels.tsv:{lineno}: duplicate label for node {node}")
        raw_labels[node] = cls
    missing = [i for i in range(n) if i not in raw_labels]
    if missing:
        raise DatasetError(f"labels.tsv: no label for node(s) {missing[:5]}")
    class_ids = sorted(set(raw_labels.values()))
    class_map = {c: i for i, c in enumerate(class_ids)}
    labels = np.array([class_map[raw_labels[i]] for i in range(n)], dtype=np.int64)

    features = None
    fpath = root / "features.csv"
    if fpath.exists():
        rows: dict[int, list[float]] = {}
        width = None
        for lineno, line in _read_lines(fpath):
            parts = line.split(",")
            if len(parts) < 2:
                raise DatasetError(f"features.csv:{lineno}: expected 'node,v1,...'")
            node = int(parts[0])
            if remap is not None:
                if node not in remap:
                    raise DatasetError(f"features.csv:{lineno}: unknown node {node}")
                node = remap[node]
            elif not (0 <= node < n):
                raise DatasetError(f"features.csv:{lineno}: unknown node {node}")
            vals = [float(v) for v in parts[1:]]
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DatasetError(f"features.csv:{lineno}: ragged row ({len(vals)} != {width})")
            rows[node] = vals
        missing = [i for i in range(n) if i not in rows]
        if missing:
            raise DatasetError(f"features.csv: no features for node(s) {missing[:5]}")
        features = np.array([rows[i] for i in range(n)], dtype=np.float64)

    return DatasetBundle(
        graph=graph,
        features=features,
        labels=labels,
        name=root.name,
        n_classes=len(class_ids),
        stats=dataset_stats(graph, labels),
    )


def resolve_dataset_dir(name_or_path: str) -> Path:
    """Interpret a dataset argument as a path, else under $HOPSCOPE_DATA_DIR."""
    p = Path(name_or_path)
    if p.is_dir():
        return p
    root = os.environ.get(DATA_DIR_ENV)
    if root:
        candidate = Path(root) / name_or_path
        if candidate.is_dir():
            return candidate
    raise DatasetError(f"dataset not found: {name_or_path!r} (also tried ${DATA_DIR_ENV})")


# ---------------------------------------------------------------------------
# artifact writers


def save_matrix_csv(m, path: str | os.PathLike):
    """Write a matrix as a dense CSV with a c0..c{m-1} header row.

    Integer matrices round-trip exactly; real values carry 12
    significant digits.
    """
    if isinstance(m, SparseCountMatrix):
        dense = m.to_dense()
        integral = True
    elif isinstance(m, WeightedAdjacency):
        dense = m.to_dense()
        integral = False
    else:
        dense = np.asarray(m)
        integral = np.issubdtype(dense.dtype, np.integer)
    lines = ["," .join(f"c{j}" for j in range(dense.shape[1]))]
    for row in dense:
        if integral:
            lines.append(",".join(str(int(v)) for v in row))
        else:
            lines.append(",".join(fmt_real(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_matrix_csv(path: str | os.PathLike) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines:
        raise InputError(f"empty matrix file {path}")
    data = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return np.array(data, dtype=np.float64)


def save_sweep_csv(rows, path: str | os.PathLike):
    """Write sweep results; an empty sweep still gets the header row."""
    lines = ["arch,k,norm,propagation,acc_mean,acc_std,density,failures"]
    for r in rows:
        lines.append(
            f"{r.arch},{r.k},{r.norm},{r.propagation},"
            f"{fmt_real(r.acc_mean)},{fmt_real(r.acc_std)},{fmt_real(r.density)},{r.failures}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_dataset(graph: SparseCountMatrix, features: np.ndarray | None, labels, out_dir: str | os.PathLike):
    """Write a dataset directory in the loadable on-disk format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"%nodes {graph.n_rows}"]
    for i in range(graph.n_rows):
        cols, vals = graph.row(i)
        for c, v in zip(cols.tolist(), vals.tolist()):
            lines.extend([f"{i}\t{c}"] * v)
    (out / "edges.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    labels = np.asarray(labels, dtype=np.int64)
    (out / "labels.tsv").write_text(
        "\n".join(f"{i}\t{int(c)}" for i, c in enumerate(labels)) + "\n", encoding="utf-8"
    )
    if features is not None:
        rows = [
            str(i) + "," + ",".join(fmt_real(v) for v in row) for i, row in enumerate(np.asarray(features))
        ]
        (out / "features.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
