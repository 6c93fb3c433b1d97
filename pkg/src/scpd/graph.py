"""Snapshot data model and the shifted normalized Laplacian operator.

A snapshot is one undirected, weighted graph observed at an integer timestep.
Global node identifiers are remapped to dense local indices ``0..n-1`` in
ascending id order; attribute rows follow the same order.

The spectral operator is ``H = L_sym - I = -D^{-1/2} A D^{-1/2}``, whose
spectrum lies in ``[-1, 1]``.  Isolated nodes (weighted degree 0) get an all
zero row and column in ``H``, i.e. they contribute eigenvalue 0 to ``H`` and
eigenvalue 1 to ``L_sym``.  This shifts one histogram bin's mass per isolated
node and is applied identically to every snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

CATEGORICAL = "categorical"
NUMERICAL = "numerical"


class GraphError(ValueError):
    """Raised for malformed snapshot or attribute input."""


@dataclass
class AttributeTable:
    """Per-snapshot node attributes.

    Attributes
    ----------
    node_ids : ndarray of int
        Global node id for each row.
    columns : dict
        Column name -> 1-D array with one entry per row.  Categorical columns
        hold strings, numerical columns hold floats.
    kinds : dict
        Column name -> ``"categorical"`` or ``"numerical"``.
    vocabulary : dict
        Column name -> ordered list of known categories (categorical only).
    """

    node_ids: np.ndarray
    columns: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    vocabulary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        n = len(self.node_ids)
        for name, values in list(self.columns.items()):
            kind = self.kinds.get(name)
            if kind not in (CATEGORICAL, NUMERICAL):
                raise GraphError(f"column {name!r} has unknown kind {kind!r}")
            if kind == CATEGORICAL:
                values = np.asarray([str(v) for v in values], dtype=object)
                vocab = list(self.vocabulary.get(name, []))
                for cat in sorted(set(values) - set(vocab)):
                    vocab.append(cat)
                self.vocabulary[name] = vocab
            else:
                values = np.asarray(values, dtype=np.float64)
            if len(values) != n:
                raise GraphError(
                    f"attribute column {name!r} has {len(values)} rows, expected {n}"
                )
            self.columns[name] = values
        if len(np.unique(self.node_ids)) != n:
            raise GraphError("attribute table has duplicate node ids")

    @property
    def n_rows(self) -> int:
        return len(self.node_ids)

    def reindexed(self, node_ids: np.ndarray) -> "AttributeTable":
        """Return the table with rows reordered to match ``node_ids``."""
        pos = {int(g): r for r, g in enumerate(self.node_ids)}
        try:
            order = np.array([pos[int(g)] for g in node_ids], dtype=np.int64)
        except KeyError as exc:
            raise GraphError(
                f"attribute rows do not cover node {exc.args[0]}: "
                f"{self.n_rows} rows for {len(node_ids)} nodes"
            ) from None
        return AttributeTable(
            node_ids=np.asarray(node_ids),
            columns={k: v[order] for k, v in self.columns.items()},
            kinds=dict(self.kinds),
            vocabulary={k: list(v) for k, v in self.vocabulary.items()},
        )

    def __eq__(self, other):
        if not isinstance(other, AttributeTable):
            return NotImplemented
        if not np.array_equal(self.node_ids, other.node_ids):
            return False
        if self.kinds != other.kinds or set(self.columns) != set(other.columns):
            return False
        return all(np.array_equal(self.columns[c], other.columns[c]) for c in self.columns)


@dataclass(frozen=True, eq=False)
class Snapshot:
    """One timestamped undirected weighted graph.

    ``adjacency`` is a symmetric CSR matrix over local indices with no
    diagonal entries.  ``node_ids[i]`` is the global id of local node ``i``.
    """

    timestep: int
    node_ids: np.ndarray
    adjacency: sp.csr_matrix
    attributes: Optional[AttributeTable] = None

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        """Number of undirected edges (distinct unordered pairs)."""
        return self.adjacency.nnz // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 3)`` array of ``(i, j, w)`` global ids with i < j."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        out = np.empty((len(order), 3))
        out[:, 0] = self.node_ids[upper.row[order]]
        out[:, 1] = self.node_ids[upper.col[order]]
        out[:, 2] = upper.data[order]
        return out


def build_snapshot(
    timestep: int,
    raw_edges: Iterable | np.ndarray,
    attributes: Optional[AttributeTable] = None,
    node_ids: Optional[Sequence[int]] = None,
) -> Snapshot:
    """Build a snapshot from ``(i, j, w)`` edges.

    Duplicate pairs are summed, both orientations included, and self-loops
    are dropped.  Nodes listed in ``node_ids`` or in the attribute table are
    kept even if they have no edges.
    """
    if not isinstance(raw_edges, np.ndarray):
        raw_edges = list(raw_edges)
    edges = np.asarray(raw_edges, dtype=np.float64)
    if edges.size == 0:
        edges = np.empty((0, 3))
    if edges.ndim != 2 or edges.shape[1] not in (2, 3):
        raise GraphError("edges must be (i, j) or (i, j, w) records")
    if edges.shape[1] == 2:
        edges = np.column_stack([edges, np.ones(len(edges))])
    src, dst, w = edges[:, 0], edges[:, 1], edges[:, 2]
    bad = ~np.isfinite(w) | (w < 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise GraphError(f"invalid weight in edge {tuple(edges[k])} at t={timestep}")
    if (src < 0).any() or (dst < 0).any() or (src != np.floor(src)).any() or (dst != np.floor(dst)).any():
        k = int(np.flatnonzero((src < 0) | (dst < 0) | (src != np.floor(src)) | (dst != np.floor(dst)))[0])
        raise GraphError(f"invalid node id in edge {tuple(edges[k])} at t={timestep}")
    src = src.astype(np.int64)
    dst = dst.astype(np.int64)

    ids = [src, dst]
    if node_ids is not None:
        ids.append(np.asarray(node_ids, dtype=np.int64))
    if attributes is not None:
        ids.append(attributes.node_ids)
    all_ids = np.unique(np.concatenate(ids)) if ids else np.empty(0, np.int64)
    if attributes is not None and len(all_ids) != attributes.n_rows:
        raise GraphError(
            f"attribute table has {attributes.n_rows} rows but snapshot t={timestep} "
            f"has {len(all_ids)} nodes"
        )

    n = len(all_ids)
    keep = src != dst
    i = np.searchsorted(all_ids, src[keep])
    j = np.searchsorted(all_ids, dst[keep])
    w = w[keep]
    adj = sp.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n, n),
    ).tocsr()
    adj.sum_duplicates()
    adj.sort_indices()

    table = attributes.reindexed(all_ids) if attributes is not None else None
    return Snapshot(timestep=int(timestep), node_ids=all_ids, adjacency=adj, attributes=table)


class SpectralOperator:
    """Matrix-free view of ``H = -D^{-1/2} A D^{-1/2}`` for one snapshot.

    The scaled adjacency is cached once, so ``op @ x`` is a single sparse
    pass over the edges.  ``x`` may be a vector or an ``(n, b)`` block.
    """

    def __init__(self, snapshot: Snapshot):
        self.snapshot = snapshot
        deg = snapshot.degrees
        inv_sqrt = np.zeros_like(deg)
        nz = deg > 0
        inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
        self.inv_sqrt_degree = inv_sqrt
        scale = sp.diags(inv_sqrt)
        self._matrix = (-(scale @ snapshot.adjacency @ scale)).tocsr()

    @property
    def shape(self) -> tuple:
        n = self.snapshot.node_count
        return (n, n)

    @property
    def n(self) -> int:
        return self.snapshot.node_count

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._matrix @ x

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        return self._matrix.toarray()


def laplacian_operator(snapshot: Snapshot) -> SpectralOperator:
    return SpectralOperator(snapshot)


def encode_attribute(table: AttributeTable, column: str) -> list:
    """Turn one attribute column into ``(label, vector)`` pairs.

    Categorical columns give one 0/1 indicator per category present in this
    table, in vocabulary order.  Numerical columns give a single vector
    divided by its sum, labelled with the column name.
    """
    if column not in table.columns:
        raise KeyError(f"no attribute column {column!r}")
    values = table.columns[column]
    if table.kinds[column] == NUMERICAL:
        total = values.sum()
        if total == 0 or not np.isfinite(total):
            raise GraphError(f"numerical column {column!r} sums to {total}; cannot normalize")
        return [(column, values / total)]
    present = set(values)
    return [
        (cat, (values == cat).astype(np.float64))
        for cat in table.vocabulary[column]
        if cat in present
    ]
