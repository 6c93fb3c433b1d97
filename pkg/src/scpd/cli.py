"""Command-line entry point: ``scpd generate | detect | eval | bench``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 compute error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import io
from .dos import DosConfig
from .generators import (
    BUILTINS,
    AnomalySchedule,
    builtin_schedule,
    generate_series,
    load_schedule,
)
from .graph import GraphError
from .harness import detect, hits_from_ranking, run_experiment, scaling_probe, sensitivity_sweep, write_sweep_csv
from .oracle import OracleSizeError
from .scoring import ScoreSeries, ScoringConfig

log = logging.getLogger("scpd")

EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 1, 2, 3


class UsageError(Exception):
    pass


def _default_threads() -> int:
    env = os.environ.get("SCPD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"SCPD_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _int_list(text: str) -> list:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return values


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nz", type=int, default=100, help="probe vectors (default 100)")
    p.add_argument("--nm", type=int, default=20, help="Chebyshev moments / Lanczos steps (default 20)")
    p.add_argument("--bins", type=int, default=50, help="histogram bins (default 50)")
    p.add_argument("--damping", choices=["jackson", "none"], default="jackson")
    p.add_argument("--short-window", type=int, default=5)
    p.add_argument("--long-window", type=int, default=10)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $SCPD_THREADS or CPU count)")


def _configs(args, seed: int = 0):
    dos = DosConfig(n_probe=args.nz, n_moments=args.nm, n_bins=args.bins, rng_seed=seed, damping=args.damping)
    scoring = ScoringConfig(args.short_window, args.long_window)
    return dos, scoring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scpd", description="Spectral change point detection for dynamic graphs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic benchmark to disk")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--experiment", choices=BUILTINS, default="sbm_hybrid")
    src.add_argument("--schedule", type=Path, help="JSON schedule file")
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    d = sub.add_parser("detect", help="score an edge-list dataset")
    d.add_argument("edges", type=Path)
    d.add_argument("--attributes", type=Path, help="attribute CSV")
    d.add_argument("--attribute", help="attribute column to score")
    d.add_argument("--embedding", choices=["dos", "lad"], default="dos")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--top-n", type=int, default=7)
    d.add_argument("--signatures", action="store_true", help="also dump signatures.csv")
    d.add_argument("--out", type=Path, required=True)
    _add_model_flags(d)

    e = sub.add_parser("eval", help="Hits@n of a detect summary against truth")
    e.add_argument("summary", type=Path)
    e.add_argument("truth", type=Path)
    e.add_argument("--top-n", type=int, default=None, help="default: number of true anomalies")
    e.add_argument("--scores", choices=["general", "attribute"], default="general")
    e.add_argument("--out", type=Path, help="write the result as JSON here")

    b = sub.add_parser("bench", help="multi-seed runs, scaling probe and sweeps")
    b.add_argument("--experiment", choices=BUILTINS, default="sbm_hybrid")
    b.add_argument("--scale", type=float, default=1.0)
    b.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    b.add_argument("--sizes", type=_float_list, default=None, help="scale factors for the scaling probe, e.g. 1,2,4")
    b.add_argument("--max-steps", type=int, default=None, help="snapshots per scale in the scaling probe")
    b.add_argument("--sweep", action="append", default=[], help="param=v1,v2,... with param in nz, nm, k")
    b.add_argument("--embedding", choices=["dos", "lad"], default="dos")
    b.add_argument("--out", type=Path, required=True)
    _add_model_flags(b)
    return parser


def cmd_generate(args) -> int:
    schedule = load_schedule(args.schedule) if args.schedule else builtin_schedule(args.experiment, args.scale)
    snaps, truth = generate_series(schedule, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    io.write_edge_list(args.out / "edges.csv", snaps)
    if any(s.attributes is not None for s in snaps):
        io.write_attributes(args.out / "attributes.csv", snaps)
    io.write_json(args.out / "truth.json", {**truth.to_json(), "total_steps": len(snaps)})
    io.write_json(args.out / "schedule.json", schedule.to_json())
    print(f"wrote {len(snaps)} snapshots, {len(truth.anomalies)} anomalies to {args.out}")
    return 0


def _summary(series: ScoreSeries, n: int) -> dict:
    return {
        "top_n": series.top_n(n),
        "ranking": [int(t) for t in series.ranking()],
        "n_steps": len(series),
        "first_t": int(series.timesteps[0]),
        "last_t": int(series.timesteps[-1]),
    }


def cmd_detect(args) -> int:
    if args.attributes and not args.attribute:
        raise UsageError("--attributes given without --attribute COLUMN")
    if args.attribute and not args.attributes:
        raise UsageError("--attribute requires --attributes FILE")
    if not args.edges.exists():
        raise UsageError(f"no such file: {args.edges}")
    snaps = io.load_series(args.edges, args.attributes)
    if not snaps:
        raise io.DataError(f"{args.edges}: no snapshots")
    for s in snaps:
        if s.node_count == 0:
            raise io.DataError(f"t={s.timestep}: snapshot has no nodes")
    if args.attribute and any(args.attribute not in (s.attributes.columns if s.attributes else {}) for s in snaps):
        raise UsageError(f"attribute column {args.attribute!r} missing from {args.attributes}")
    dos_cfg, score_cfg = _configs(args, args.seed)
    res = detect(snaps, dos_cfg, score_cfg, args.attribute, args.embedding, args.threads)

    args.out.mkdir(parents=True, exist_ok=True)
    io.write_scores(args.out / "scores.csv", res["general"])
    summary = {
        "config": {
            "dos": asdict(dos_cfg),
            "scoring": asdict(score_cfg),
            "embedding": args.embedding,
            "attribute": args.attribute,
            "top_n": args.top_n,
        },
        "general": _summary(res["general"], args.top_n),
        "top_n": res["general"].top_n(args.top_n),
    }
    if args.attribute:
        for label, series in res["per_label"].items():
            io.write_scores(args.out / f"scores_attr_{label}.csv", series)
        io.write_scores(args.out / "scores_attr.csv", res["attribute"])
        summary["attribute"] = _summary(res["attribute"], args.top_n)
    if args.signatures and "embeddings" in res:
        io.write_signatures(args.out / "signatures.csv", res["embeddings"])
    io.write_json(args.out / "summary.json", summary)
    print(f"top-{args.top_n}: {summary['top_n']}")
    if args.attribute:
        print(f"attribute top-{args.top_n}: {summary['attribute']['top_n']}")
    return 0


def cmd_eval(args) -> int:
    for p in (args.summary, args.truth):
        if not p.exists():
            raise UsageError(f"no such file: {p}")
    summary = io.read_json(args.summary)
    truth_obj = io.read_json(args.truth)
    truth = AnomalySchedule.from_json(truth_obj)
    block = summary.get(args.scores)
    if block is None:
        raise io.DataError(f"{args.summary}: no {args.scores!r} scores")
    expected = truth_obj.get("total_steps")
    if expected is not None and expected != block["n_steps"]:
        raise io.DataError(f"series length mismatch: summary has {block['n_steps']} steps, truth expects {expected}")
    n = args.top_n or len(truth.timesteps)
    try:
        value = hits_from_ranking(block["ranking"], truth, n, last_t=block["last_t"])
    except ValueError as exc:
        raise io.DataError(str(exc)) from None
    print(f"hits@{n} = {value:.3f}")
    if args.out:
        io.write_json(args.out, {"n": n, "hits": value, "scores": args.scores})
    return 0


_SWEEP_NAMES = {"nz": "n_probe", "nm": "n_moments", "k": "n_bins", "bins": "n_bins"}


def _parse_sweep(items) -> dict:
    grid = {}
    for item in items:
        name, _, values = item.partition("=")
        if name not in _SWEEP_NAMES or not values:
            raise UsageError(f"bad --sweep {item!r}; use nz=..., nm=... or k=...")
        try:
            grid[_SWEEP_NAMES[name]] = [int(v) for v in values.split(",") if v]
        except ValueError:
            raise UsageError(f"bad --sweep values in {item!r}") from None
        if not grid[_SWEEP_NAMES[name]]:
            raise UsageError(f"empty --sweep values in {item!r}")
    return grid


def cmd_bench(args) -> int:
    if args.sizes is not None and len(args.sizes) == 0:
        raise UsageError("--sizes needs at least one value")
    if args.sizes is not None and len(args.sizes) < 3:
        raise UsageError("--sizes needs at least 3 scale factors")
    if not args.seeds:
        raise UsageError("--seeds is empty")
    grid = _parse_sweep(args.sweep)
    dos_cfg, score_cfg = _configs(args)
    args.out.mkdir(parents=True, exist_ok=True)

    report = run_experiment(args.experiment, dos_cfg, score_cfg, args.seeds, args.scale, args.embedding, threads=args.threads)
    io.write_json(args.out / "report.json", report.to_json())
    (args.out / "report.txt").write_text(report.to_text() + "\n", encoding="utf-8")
    print(report.to_text())

    if args.sizes:
        sc = scaling_probe(args.experiment, args.sizes, args.seeds[0], dos_cfg, args.max_steps)
        io.write_json(args.out / "scaling.json", sc.to_json())
        print(f"scaling: edges {sc.edges} seconds {[round(s, 3) for s in sc.seconds]} R^2 {sc.r2:.4f}")
    if grid:
        rows = sensitivity_sweep(args.experiment, grid, args.seeds, args.scale, dos_cfg, score_cfg)
        write_sweep_csv(args.out / "sweep.csv", rows)
        for r in rows:
            print(f"sweep {r.param}={r.value}: hits {r.mean:.2f} +/- {r.std:.2f}")
    return 0


COMMANDS = {"generate": cmd_generate, "detect": cmd_detect, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "threads", 0) is None:
            args.threads = _default_threads()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.DataError, GraphError, FileNotFoundError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OracleSizeError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
