"""Synthetic dynamic graphs with planted anomalies.

Every snapshot is an independent draw from the generative model active at
its timestep.  Randomness comes from numpy's PCG64 seeded through
``SeedSequence([seed, timestep, stream])``, so a snapshot depends only on
the seed and its timestep.

Schedules mirror the benchmark tables: one row per segment with the time it
starts.  Timesteps run ``1..T``; the row starting at time 0 is the initial
configuration and is not an anomaly.  An *event* row applies to its own
timestep only, after which the previous non-event row resumes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .graph import CATEGORICAL, AttributeTable, build_snapshot

EVENT = "event"
CHANGE_POINT = "change_point"
ATTRIBUTE_CHANGE_POINT = "attribute_change_point"
ANOMALY_TYPES = (EVENT, CHANGE_POINT, ATTRIBUTE_CHANGE_POINT)

ATTRIBUTE_COLUMN = "label"
_GRAPH_STREAM = 0xB10C
_ATTR_STREAM = 0xA77E


@dataclass
class AnomalySchedule:
    anomalies: list = field(default_factory=list)  # (timestep, type)

    @property
    def timesteps(self) -> list:
        return [t for t, _ in self.anomalies]

    def of_type(self, kind: str) -> list:
        return [t for t, k in self.anomalies if k == kind]

    def to_json(self) -> dict:
        return {"anomalies": [{"t": t, "type": k} for t, k in self.anomalies]}

    @classmethod
    def from_json(cls, obj: dict) -> "AnomalySchedule":
        return cls([(int(a["t"]), a["type"]) for a in obj["anomalies"]])


@dataclass
class SbmSegment:
    start: int
    sizes: list
    p_in: float
    p_out: float
    attributes: str = "none"  # none | homogeneous | heterogeneous
    event: bool = False
    kind: Optional[str] = None


@dataclass
class SbmSchedule:
    segments: list
    total_steps: int = 151

    def __post_init__(self):
        self.segments = [s if isinstance(s, SbmSegment) else SbmSegment(**s) for s in self.segments]
        starts = [s.start for s in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        if self.segments[0].event:
            raise ValueError("the first segment cannot be an event")
        for s in self.segments:
            if not (0 <= s.p_in <= 1 and 0 <= s.p_out <= 1):
                raise ValueError(f"probabilities out of range in segment at t={s.start}")
            if sum(s.sizes) <= 0 or any(c <= 0 for c in s.sizes):
                raise ValueError(f"invalid community sizes {s.sizes} at t={s.start}")
            if s.attributes not in ("none", "homogeneous", "heterogeneous"):
                raise ValueError(f"unknown attribute mode {s.attributes!r}")
            if s.attributes == "homogeneous" and len(s.sizes) % 2:
                raise ValueError(f"homogeneous attributes need an even community count (t={s.start})")

    def active(self, t: int) -> SbmSegment:
        current = None
        for s in self.segments:
            if s.start > t:
                break
            if s.event:
                if s.start == t:
                    return s
            else:
                current = s
        return current

    def truth(self) -> AnomalySchedule:
        out = []
        for s in self.segments:
            if s.start < 1:
                continue
            out.append((s.start, s.kind or (EVENT if s.event else CHANGE_POINT)))
        return AnomalySchedule(out)

    def to_json(self) -> dict:
        return {"generator": "sbm", "total_steps": self.total_steps, "segments": [asdict(s) for s in self.segments]}


@dataclass
class BaSegment:
    start: int
    m: int
    kind: Optional[str] = None


@dataclass
class BaSchedule:
    segments: list
    n_nodes: int = 500
    total_steps: int = 151

    def __post_init__(self):
        self.segments = [s if isinstance(s, BaSegment) else BaSegment(**s) for s in self.segments]
        starts = [s.start for s in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        for s in self.segments:
            if s.m < 1:
                raise ValueError("m must be >= 1")
            if s.m >= self.n_nodes:
                raise ValueError(f"m={s.m} must be smaller than the node count {self.n_nodes}")

    def active(self, t: int) -> BaSegment:
        current = None
        for s in self.segments:
            if s.start > t:
                break
            current = s
        return current

    def truth(self) -> AnomalySchedule:
        return AnomalySchedule([(s.start, s.kind or CHANGE_POINT) for s in self.segments if s.start >= 1])

    def to_json(self) -> dict:
        return {
            "generator": "ba",
            "n_nodes": self.n_nodes,
            "total_steps": self.total_steps,
            "segments": [asdict(s) for s in self.segments],
        }


def schedule_from_json(obj: dict):
    kind = obj.get("generator")
    body = {k: v for k, v in obj.items() if k != "generator"}
    if kind == "sbm":
        return SbmSchedule(**body)
    if kind == "ba":
        return BaSchedule(**body)
    raise ValueError(f"unknown generator {kind!r}")


def load_schedule(path) -> SbmSchedule | BaSchedule:
    with open(path, encoding="utf-8") as fh:
        return schedule_from_json(json.load(fh))


def _rng(seed: int, t: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, t, stream])))


def _triu_decode(k: np.ndarray, n: int):
    """Map linear indices over the strict upper triangle (row-major) to (i, j)."""
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * k)) / 2).astype(np.int64)
    offset = i * (2 * n - i - 1) // 2
    # guard against float rounding at row boundaries
    over = offset > k
    i[over] -= 1
    offset = i * (2 * n - i - 1) // 2
    under = k - offset >= n - 1 - i
    i[under] += 1
    offset = i * (2 * n - i - 1) // 2
    j = k - offset + i + 1
    return i, j


def _sample_pairs(n_pairs: int, p: float, rng: np.random.Generator) -> np.ndarray:
    if p <= 0 or n_pairs == 0:
        return np.empty(0, np.int64)
    if p >= 1:
        return np.arange(n_pairs, dtype=np.int64)
    count = rng.binomial(n_pairs, p)
    return np.sort(rng.choice(n_pairs, size=count, replace=False))


def sbm_edges(sizes, p_in: float, p_out: float, rng: np.random.Generator) -> np.ndarray:
    """Unweighted SBM edge array ``(m, 2)`` over nodes ``0..sum(sizes)-1``.

    Communities are contiguous id ranges in the order given.
    """
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    parts = []
    for a, na in enumerate(sizes):
        idx = _sample_pairs(na * (na - 1) // 2, p_in, rng)
        i, j = _triu_decode(idx, na)
        parts.append(np.column_stack([i + offsets[a], j + offsets[a]]))
        for b in range(a + 1, len(sizes)):
            nb = sizes[b]
            idx = _sample_pairs(na * nb, p_out, rng)
            parts.append(np.column_stack([idx // nb + offsets[a], idx % nb + offsets[b]]))
    return np.concatenate(parts) if parts else np.empty((0, 2), np.int64)


def sbm_labels(sizes, mode: str, rng: np.random.Generator) -> np.ndarray:
    """Binary node labels ``"1"``/``"2"``.

    Homogeneous: the first half of the communities are all ``"1"``, the rest
    all ``"2"``.  Heterogeneous: each node is ``"1"`` or ``"2"`` with
    probability 0.5.
    """
    n = int(sum(sizes))
    if mode == "heterogeneous":
        return np.where(rng.random(n) < 0.5, "1", "2").astype(object)
    half = len(sizes) // 2
    return np.concatenate([np.full(c, "1" if a < half else "2", dtype=object) for a, c in enumerate(sizes)])


def generate_sbm_series(schedule: SbmSchedule, seed: int = 0):
    """Sample every timestep of an SBM schedule; returns ``(snapshots, truth)``."""
    snapshots = []
    for t in range(1, schedule.total_steps + 1):
        seg = schedule.active(t)
        n = int(sum(seg.sizes))
        edges = sbm_edges(seg.sizes, seg.p_in, seg.p_out, _rng(seed, t, _GRAPH_STREAM))
        table = None
        if seg.attributes != "none":
            labels = sbm_labels(seg.sizes, seg.attributes, _rng(seed, t, _ATTR_STREAM))
            table = AttributeTable(
                node_ids=np.arange(n),
                columns={ATTRIBUTE_COLUMN: labels},
                kinds={ATTRIBUTE_COLUMN: CATEGORICAL},
                vocabulary={ATTRIBUTE_COLUMN: ["1", "2"]},
            )
        snapshots.append(build_snapshot(t, edges, attributes=table, node_ids=np.arange(n)))
    return snapshots, schedule.truth()


def ba_edges(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Barabasi-Albert graph grown from an ``m``-clique.

    Each new node links to ``m`` distinct existing nodes drawn with
    probability proportional to degree.  Edge count is ``C(m,2) + m(n-m)``.
    """
    if m < 1 or m >= n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    src = np.empty(m * (m - 1) // 2 + m * (n - m), np.int64)
    dst = np.empty_like(src)
    ends = np.empty(2 * len(src), np.int64)  # each node repeated once per incident edge
    e = 0
    for a in range(m):
        for b in range(a + 1, m):
            src[e], dst[e] = a, b
            ends[2 * e], ends[2 * e + 1] = a, b
            e += 1
    n_ends = 2 * e
    uniforms = rng.random(4 * m * (n - m) + 16)
    u = 0
    for new in range(m, n):
        targets: list = []
        while len(targets) < m:
            if u == len(uniforms):
                uniforms, u = rng.random(len(uniforms)), 0
            if n_ends == 0:
                cand = int(uniforms[u] * new)
            else:
                cand = int(ends[int(uniforms[u] * n_ends)])
            u += 1
            if cand not in targets:
                targets.append(cand)
        for tgt in targets:
            src[e], dst[e] = tgt, new
            ends[n_ends], ends[n_ends + 1] = tgt, new
            n_ends += 2
            e += 1
    return np.column_stack([src, dst])


def generate_ba_series(schedule: BaSchedule, seed: int = 0):
    snapshots = []
    n = schedule.n_nodes
    for t in range(1, schedule.total_steps + 1):
        seg = schedule.active(t)
        edges = ba_edges(n, seg.m, _rng(seed, t, _GRAPH_STREAM))
        snapshots.append(build_snapshot(t, edges, node_ids=np.arange(n)))
    return snapshots, schedule.truth()


def generate_series(schedule, seed: int = 0):
    if isinstance(schedule, SbmSchedule):
        return generate_sbm_series(schedule, seed)
    return generate_ba_series(schedule, seed)


def _equal(n_comm: int, total: int) -> list:
    return [total // n_comm] * n_comm


def builtin_schedule(name: str, scale: float = 1.0):
    """Canonical schedule of a builtin experiment, node counts multiplied by ``scale``."""

    def sz(x):
        v = int(round(x * scale))
        if v < 2:
            raise ValueError(f"scale {scale} too small for experiment {name!r}")
        return v

    if name == "sbm_hybrid":
        total = sz(1200)
        rows = [
            (0, 4, 0.005, False),
            (16, 4, 0.015, True),
            (31, 10, 0.005, False),
            (61, 10, 0.015, True),
            (76, 2, 0.005, False),
            (91, 2, 0.015, True),
            (106, 4, 0.005, False),
            (136, 4, 0.015, True),
        ]
        return SbmSchedule([SbmSegment(t, _equal(c, total), 0.030, pout, event=ev) for t, c, pout, ev in rows])
    if name == "sbm_attribute":
        total = sz(1200)
        rows = [
            (0, 4, "homogeneous", None),
            (16, 4, "heterogeneous", ATTRIBUTE_CHANGE_POINT),
            (31, 10, "heterogeneous", CHANGE_POINT),
            (61, 10, "homogeneous", ATTRIBUTE_CHANGE_POINT),
            (76, 2, "homogeneous", CHANGE_POINT),
            (91, 2, "heterogeneous", ATTRIBUTE_CHANGE_POINT),
            (106, 4, "heterogeneous", CHANGE_POINT),
            (136, 4, "homogeneous", ATTRIBUTE_CHANGE_POINT),
        ]
        return SbmSchedule([SbmSegment(t, _equal(c, total), 0.030, 0.005, mode, kind=k) for t, c, mode, k in rows])
    if name == "sbm_evolving":
        c, h = sz(300), sz(150)
        rows = [
            (0, [c, c], 0.005, False),
            (16, [c, c, c], 0.005, False),
            (31, [c, c, c, c], 0.005, False),
            (61, [c, c, h, h, h, h], 0.005, False),
            (76, [c, c, c, c], 0.005, False),
            (91, [h, h, h, h, c, c], 0.005, False),
            (106, [c, c, c, c], 0.005, False),
            (136, [c, c, c, c], 0.015, True),
        ]
        return SbmSchedule([SbmSegment(t, sizes, 0.030, pout, event=ev) for t, sizes, pout, ev in rows])
    if name == "ba_change":
        starts = [0, 16, 31, 61, 76, 91, 106, 136]
        return BaSchedule([BaSegment(t, m) for m, t in enumerate(starts, start=1)], n_nodes=sz(500))
    raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(BUILTINS)}")


BUILTINS = ("sbm_hybrid", "sbm_attribute", "sbm_evolving", "ba_change")


def builtin_experiment(name: str, scale: float = 1.0, seed: int = 0):
    """Generate a builtin benchmark; returns ``(snapshots, truth)``."""
    return generate_series(builtin_schedule(name, scale), seed)
