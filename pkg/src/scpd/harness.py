"""Hits@n evaluation, multi-seed experiment runs, sweeps and scaling probes."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dos import DosConfig, embed_series
from .generators import ATTRIBUTE_COLUMN, AnomalySchedule, builtin_schedule, generate_series
from .oracle import lad_embedding, pad_embeddings
from .scoring import ScoreSeries, ScoringConfig, score_attribute_series, score_series


class ExperimentError(RuntimeError):
    pass


def hits_from_ranking(ranking: Sequence[int], truth, n: Optional[int] = None, last_t: Optional[int] = None) -> float:
    """Fraction of true anomalies among the first ``n`` entries of ``ranking``."""
    truth_t = set(truth.timesteps if isinstance(truth, AnomalySchedule) else truth)
    if not truth_t:
        raise ValueError("truth is empty")
    if n is None:
        n = len(truth_t)
    if n < 1:
        raise ValueError("n must be >= 1")
    last = max(ranking) if last_t is None else last_t
    if max(truth_t) > last:
        raise ValueError(f"score series ends at t={last} but truth reaches t={max(truth_t)}")
    return len({int(t) for t in ranking[:n]} & truth_t) / len(truth_t)


def hits_at_n(scores: ScoreSeries, truth: AnomalySchedule | Sequence[int], n: Optional[int] = None) -> float:
    """Fraction of true anomalies among the ``n`` top-scoring timesteps (Hits@n)."""
    return hits_from_ranking([int(t) for t in scores.ranking()], truth, n, int(np.max(scores.timesteps)))


def lad_scores(snapshots, score_cfg: ScoringConfig = ScoringConfig()) -> ScoreSeries:
    """Score a series with full-spectrum (LAD) embeddings."""
    X = pad_embeddings([lad_embedding(s) for s in snapshots])
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)
    return score_series(X, score_cfg, [s.timestep for s in snapshots])


def detect(snapshots, dos_cfg: DosConfig, score_cfg: ScoringConfig, attribute: Optional[str] = None,
           embedding: str = "dos", threads: int = 1) -> dict:
    """Embed and score one series.

    Returns a dict with ``"general"`` (:class:`ScoreSeries`), and when
    ``attribute`` is given ``"attribute"`` (aggregate) and ``"per_label"``.
    Wall-clock seconds go to ``"timings"``.
    """
    out: dict = {"timings": {}}
    t0 = time.perf_counter()
    if embedding == "lad":
        if attribute is not None:
            raise ValueError("attribute scoring needs the dos embedding")
        X = pad_embeddings([lad_embedding(s) for s in snapshots])
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)
        out["timings"]["embed"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        out["general"] = score_series(X, score_cfg, [s.timestep for s in snapshots])
        out["timings"]["score"] = time.perf_counter() - t1
        return out
    if embedding != "dos":
        raise ValueError(f"unknown embedding {embedding!r}")
    emb = embed_series(snapshots, dos_cfg, attribute=attribute, threads=threads)
    out["embeddings"] = emb
    out["timings"]["embed"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    steps = [e.timestep for e in emb]
    out["general"] = score_series([e.dos for e in emb], score_cfg, steps)
    if attribute is not None:
        per_label, agg = score_attribute_series([e.ldos_map() for e in emb], score_cfg, steps)
        out["per_label"] = per_label
        out["attribute"] = agg
    out["timings"]["score"] = time.perf_counter() - t1
    return out


@dataclass
class ExperimentReport:
    name: str
    config: dict
    seeds: list
    hits: list
    top_n: list
    timings: dict = field(default_factory=dict)  # phase -> per-seed seconds
    edges: list = field(default_factory=list)  # per-seed total edges processed
    n: int = 7

    @property
    def mean(self) -> float:
        return float(np.mean(self.hits))

    @property
    def std(self) -> float:
        return float(np.std(self.hits))

    @property
    def edges_processed(self) -> int:
        return int(sum(self.edges))

    def to_json(self) -> dict:
        d = asdict(self)
        d.update(mean=self.mean, std=self.std, edges_processed=self.edges_processed)
        return d

    def to_text(self) -> str:
        lines = [
            f"experiment {self.name}",
            f"  hits@{self.n}  {self.mean:.2f} +/- {self.std:.2f}",
        ]
        for s, h, top in zip(self.seeds, self.hits, self.top_n):
            lines.append(f"  seed {s:<4d} hits {h:.3f}  top {sorted(top)}")
        for phase, secs in self.timings.items():
            lines.append(f"  {phase:<9s} {np.sum(secs):8.2f} s")
        lines.append(f"  edges     {self.edges_processed}")
        return "\n".join(lines)


def _resolve(experiment, scale):
    if isinstance(experiment, str):
        return experiment, builtin_schedule(experiment, scale)
    return "custom", experiment


def run_experiment(
    experiment,
    dos_cfg: DosConfig = DosConfig(),
    score_cfg: ScoringConfig = ScoringConfig(),
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    scale: float = 1.0,
    embedding: str = "dos",
    attribute: Optional[str] = None,
    n: Optional[int] = None,
    threads: int = 1,
    _cache: Optional[dict] = None,
) -> ExperimentReport:
    """Generate, embed, score and evaluate a benchmark for each seed.

    ``experiment`` is a builtin name or a schedule object.  The attribute
    benchmark is scored on its aggregated attribute scores.  The embedding
    seed of each run equals its generation seed.
    """
    name, schedule = _resolve(experiment, scale)
    if attribute is None and name == "sbm_attribute":
        attribute = ATTRIBUTE_COLUMN

    def one(seed):
        phase = "generate"
        try:
            t0 = time.perf_counter()
            key = (name, scale, seed)
            if _cache is not None and key in _cache:
                snaps, truth = _cache[key]
            else:
                snaps, truth = generate_series(schedule, seed)
                if _cache is not None:
                    _cache[key] = (snaps, truth)
            gen_t = time.perf_counter() - t0
            phase = "embed/score"
            res = detect(snaps, replace(dos_cfg, rng_seed=seed), score_cfg, attribute, embedding)
        except Exception as exc:
            raise ExperimentError(f"{name} seed {seed} ({phase}): {exc}") from exc
        series = res["attribute"] if attribute is not None else res["general"]
        k = n or len(truth.timesteps)
        return (
            hits_at_n(series, truth, k),
            series.top_n(k),
            {"generate": gen_t, **res["timings"]},
            sum(s.edge_count for s in snaps),
            k,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    timings: dict = {}
    for r in results:
        for phase, secs in r[2].items():
            timings.setdefault(phase, []).append(secs)
    config = {
        "dos": asdict(dos_cfg),
        "scoring": asdict(score_cfg),
        "scale": scale,
        "embedding": embedding,
        "attribute": attribute,
    }
    return ExperimentReport(
        name=name,
        config=config,
        seeds=list(seeds),
        hits=[r[0] for r in results],
        top_n=[r[1] for r in results],
        timings=timings,
        edges=[r[3] for r in results],
        n=results[0][4] if results else (n or 7),
    )


SWEEPABLE = ("n_probe", "n_moments", "n_bins")


@dataclass
class SweepRow:
    param: str
    value: int
    mean: float
    std: float
    hits: list


def sensitivity_sweep(
    experiment: str,
    grid: dict,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    scale: float = 1.0,
    dos_cfg: DosConfig = DosConfig(),
    score_cfg: ScoringConfig = ScoringConfig(),
) -> list:
    """Vary one DOS hyperparameter at a time, others at ``dos_cfg``.

    ``grid`` maps ``n_probe`` / ``n_moments`` / ``n_bins`` to value lists.
    Each seed's graphs are generated once and reused across the grid.
    """
    if not grid or not any(grid.values()):
        raise ValueError("empty sweep grid")
    cache: dict = {}
    rows = []
    for param, values in grid.items():
        if param not in SWEEPABLE:
            raise ValueError(f"cannot sweep {param!r}; choose from {SWEEPABLE}")
        for value in values:
            rep = run_experiment(experiment, replace(dos_cfg, **{param: int(value)}), score_cfg, seeds, scale, _cache=cache)
            rows.append(SweepRow(param, int(value), rep.mean, rep.std, rep.hits))
    return rows


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param", "value", "hits_mean", "hits_std", "hits"])
        for r in rows:
            w.writerow([r.param, r.value, f"{r.mean:.4f}", f"{r.std:.4f}", " ".join(f"{h:.4f}" for h in r.hits)])


@dataclass
class ScalingReport:
    scales: list
    edges: list
    seconds: list
    slope: float
    r2: float

    def to_json(self) -> dict:
        return asdict(self)


def through_origin_fit(x, y):
    """Least-squares ``y = a x``; returns ``(a, R^2)`` with the uncentered R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a = float(x @ y / (x @ x))
    r2 = 1.0 - float(np.sum((y - a * x) ** 2) / np.sum(y ** 2))
    return a, r2


def scaling_probe(
    experiment: str,
    sizes: Sequence[float],
    seed: int = 0,
    dos_cfg: DosConfig = DosConfig(),
    max_steps: Optional[int] = None,
) -> ScalingReport:
    """Time global-DOS embedding against total edge count across scales.

    ``max_steps`` keeps only the first snapshots of each series to bound the
    run time at large scales.
    """
    if len(sizes) < 3:
        raise ValueError("scaling probe needs at least 3 sizes")
    edges, secs = [], []
    for scale in sizes:
        snaps, _ = generate_series(builtin_schedule(experiment, scale), seed)
        if max_steps:
            snaps = snaps[:max_steps]
        t0 = time.perf_counter()
        embed_series(snaps, replace(dos_cfg, rng_seed=seed))
        secs.append(time.perf_counter() - t0)
        edges.append(int(sum(s.edge_count for s in snaps)))
    slope, r2 = through_origin_fit(edges, secs)
    return ScalingReport(list(sizes), edges, secs, slope, r2)
