"""Flat-file formats.

Edge list: one ``t,i,j[,w]`` record per line, ``#`` lines ignored.
Attributes: CSV with header ``t,node_id,name:kind,...`` where kind is
``categorical`` or ``numerical``.
Signatures: ``t,kind,label,b0..b{k-1}``.  Scores: ``t,Z,Zstar``.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import CATEGORICAL, NUMERICAL, AttributeTable, GraphError, build_snapshot


class DataError(ValueError):
    """Malformed input file; message carries the path and line number."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_edge_list(path, snapshots) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# t,i,j,w\n")
        for s in snapshots:
            for i, j, w in s.edges():
                fh.write(f"{s.timestep},{int(i)},{int(j)},{_fmt(w)}\n")


def read_edge_list(path) -> dict:
    """Parse an edge list into ``{t: (m, 3) array}`` in file order of first appearance."""
    rows = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) not in (3, 4):
                raise DataError(f"{path}:{lineno}: expected t,i,j[,w], got {line!r}")
            try:
                t, i, j = int(parts[0]), int(parts[1]), int(parts[2])
                w = float(parts[3]) if len(parts) == 4 and parts[3].strip() else 1.0
            except ValueError:
                raise DataError(f"{path}:{lineno}: cannot parse {line!r}") from None
            rows[t].append((i, j, w))
    return {t: np.asarray(v, dtype=np.float64) for t, v in rows.items()}


def write_attributes(path, snapshots, column_order: Optional[list] = None) -> None:
    tables = [(s.timestep, s.attributes) for s in snapshots if s.attributes is not None]
    if not tables:
        raise ValueError("no snapshot carries attributes")
    first = tables[0][1]
    names = column_order or list(first.columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "node_id"] + [f"{n}:{first.kinds[n]}" for n in names])
        for t, tbl in tables:
            for r, node in enumerate(tbl.node_ids):
                row = [t, int(node)]
                for n in names:
                    v = tbl.columns[n][r]
                    row.append(_fmt(v) if tbl.kinds[n] == NUMERICAL else v)
                w.writerow(row)


def read_attributes(path) -> dict:
    """Parse an attribute file into ``{t: AttributeTable}``.

    Categorical vocabularies accumulate across timesteps in first-seen order.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty attribute file") from None
        if header[:2] != ["t", "node_id"]:
            raise DataError(f"{path}:1: header must start with t,node_id")
        names, kinds = [], {}
        for col in header[2:]:
            name, _, kind = col.rpartition(":")
            if kind not in (CATEGORICAL, NUMERICAL) or not name:
                raise DataError(f"{path}:1: column {col!r} must be name:categorical or name:numerical")
            names.append(name)
            kinds[name] = kind
        per_t = defaultdict(lambda: ([], [[] for _ in names]))
        for lineno, row in enumerate(reader, 2):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                t, node = int(row[0]), int(row[1])
                ids, cols = per_t[t]
                ids.append(node)
                for c, (name, v) in enumerate(zip(names, row[2:])):
                    cols[c].append(float(v) if kinds[name] == NUMERICAL else v)
            except ValueError:
                raise DataError(f"{path}:{lineno}: cannot parse {row!r}") from None
    vocab = {n: [] for n in names if kinds[n] == CATEGORICAL}
    out = {}
    for t in sorted(per_t):
        ids, cols = per_t[t]
        for n, values in zip(names, cols):
            if n in vocab:
                for v in values:
                    if v not in vocab[n]:
                        vocab[n].append(v)
        try:
            out[t] = AttributeTable(
                node_ids=np.asarray(ids),
                columns={n: v for n, v in zip(names, cols)},
                kinds=dict(kinds),
                vocabulary={n: list(v) for n, v in vocab.items()},
            )
        except GraphError as exc:
            raise DataError(f"{path}: t={t}: {exc}") from None
    # later tables see the full vocabulary so label order is stable
    for tbl in out.values():
        for n, v in vocab.items():
            tbl.vocabulary[n] = list(v)
    return out


def load_series(edges_path, attributes_path=None) -> list:
    """Read files into snapshots sorted by timestep."""
    edges = read_edge_list(edges_path)
    attrs = read_attributes(attributes_path) if attributes_path else {}
    snapshots = []
    for t in sorted(set(edges) | set(attrs)):
        try:
            snapshots.append(build_snapshot(t, edges.get(t, np.empty((0, 3))), attributes=attrs.get(t)))
        except GraphError as exc:
            raise DataError(f"t={t}: {exc}") from None
    return snapshots


def write_signatures(path, embeddings) -> None:
    """Dump global (and local) signatures of :func:`~scpd.dos.embed_series` output."""
    sigs = []
    for e in embeddings:
        sigs.append(e.dos)
        sigs.extend(e.ldos or [])
    k = sigs[0].k
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "kind", "label"] + [f"b{i}" for i in range(k)])
        for s in sigs:
            w.writerow([s.timestep, s.kind, s.label or ""] + [_fmt(b) for b in s.bins])


def read_signatures(path) -> list:
    from .dos import SignatureVector

    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.append(SignatureVector(np.array([float(x) for x in row[3:]]), row[1], row[2] or None, int(row[0])))
    return out


def write_scores(path, series) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "Z", "Zstar"])
        for t, z, zs in zip(series.timesteps, series.z, series.zstar):
            w.writerow([int(t), _fmt(z), _fmt(zs)])


def read_scores(path):
    from .scoring import ScoreSeries

    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ScoreSeries(data[:, 0].astype(np.int64), data[:, 1], data[:, 2])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
