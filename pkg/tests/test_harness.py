import json

import numpy as np
import pytest

from scpd.dos import DosConfig
from scpd.generators import AnomalySchedule, builtin_schedule
from scpd.harness import (
    ExperimentError,
    hits_at_n,
    hits_from_ranking,
    run_experiment,
    scaling_probe,
    sensitivity_sweep,
    through_origin_fit,
    write_sweep_csv,
)
from scpd.scoring import ScoreSeries

TRUTH = [16, 31, 61, 76, 91, 106, 136]


def series_ranking(order, T=151):
    z = np.zeros(T)
    for rank, t in enumerate(order):
        z[t - 1] = len(order) - rank
    return ScoreSeries(np.arange(1, T + 1), z, z)


def test_hits_examples():
    assert hits_at_n(series_ranking(TRUTH), TRUTH, 7) == 1.0
    assert hits_at_n(series_ranking([1, 2, 3, 4, 5, 6, 7]), TRUTH, 7) == 0.0
    five = [16, 31, 61, 76, 91, 2, 3]
    assert hits_at_n(series_ranking(five), TRUTH, 7) == pytest.approx(5 / 7)


def test_hits_default_n_and_schedule_input():
    truth = AnomalySchedule([(t, "event") for t in TRUTH])
    assert hits_at_n(series_ranking(TRUTH), truth) == 1.0


def test_hits_monotone_in_n():
    rng = np.random.default_rng(0)
    s = ScoreSeries(np.arange(1, 152), rng.random(151), rng.random(151))
    values = [hits_at_n(s, TRUTH, n) for n in range(1, 152)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == 1.0


def test_hits_errors():
    s = series_ranking([1, 2], T=50)
    with pytest.raises(ValueError):
        hits_at_n(s, TRUTH, 7)
    with pytest.raises(ValueError):
        hits_at_n(s, [], 7)
    with pytest.raises(ValueError):
        hits_at_n(s, [3], 0)
    assert hits_from_ranking([3, 1, 2], [1], 1) == 0.0


def test_run_experiment_report_small_scale():
    rep = run_experiment("sbm_hybrid", DosConfig(n_probe=20), seeds=[0, 1], scale=0.25)
    assert len(rep.hits) == 2 and all(0 <= h <= 1 for h in rep.hits)
    assert rep.std >= 0
    assert set(rep.timings) == {"generate", "embed", "score"}
    assert rep.edges_processed == sum(rep.edges) > 0
    again = run_experiment("sbm_hybrid", DosConfig(n_probe=20), seeds=[0, 1], scale=0.25)
    assert again.hits == rep.hits and again.top_n == rep.top_n
    json.dumps(rep.to_json())
    assert "hits@7" in rep.to_text()


def test_run_experiment_errors_carry_seed():
    sched = builtin_schedule("sbm_hybrid", 0.05)
    with pytest.raises(ExperimentError, match="seed 3"):
        run_experiment(sched, seeds=[3], attribute="nope")


def test_sweep_degenerate_bins(tmp_path):
    rows = sensitivity_sweep("sbm_hybrid", {"n_bins": [2]}, seeds=[0], scale=0.1, dos_cfg=DosConfig(n_probe=10))
    assert len(rows) == 1 and 0 <= rows[0].mean <= 1
    write_sweep_csv(tmp_path / "s.csv", rows)
    assert (tmp_path / "s.csv").read_text().splitlines()[0].startswith("param,value")
    with pytest.raises(ValueError):
        sensitivity_sweep("sbm_hybrid", {})
    with pytest.raises(ValueError):
        sensitivity_sweep("sbm_hybrid", {"damping": [1]})


def test_through_origin_fit():
    a, r2 = through_origin_fit([1, 2, 4], [2, 4, 8])
    assert a == pytest.approx(2) and r2 == pytest.approx(1)


def test_scaling_probe_precondition():
    with pytest.raises(ValueError):
        scaling_probe("sbm_hybrid", [1.0])
