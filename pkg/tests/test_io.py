import numpy as np
import pytest

from scpd.dos import DosConfig, embed_series
from scpd.generators import builtin_experiment
from scpd.io import (
    DataError,
    load_series,
    read_attributes,
    read_edge_list,
    read_scores,
    read_signatures,
    write_attributes,
    write_edge_list,
    write_scores,
    write_signatures,
)
from scpd.scoring import score_series


@pytest.fixture(scope="module")
def small_attr_series():
    snaps, _ = builtin_experiment("sbm_attribute", scale=0.05, seed=3)
    return snaps[:20]


def test_snapshot_round_trip(tmp_path, small_attr_series):
    write_edge_list(tmp_path / "e.csv", small_attr_series)
    write_attributes(tmp_path / "a.csv", small_attr_series)
    again = load_series(tmp_path / "e.csv", tmp_path / "a.csv")
    assert len(again) == len(small_attr_series)
    for a, b in zip(small_attr_series, again):
        assert a.timestep == b.timestep
        assert np.array_equal(a.edges(), b.edges())
        assert a.attributes == b.attributes


def test_weighted_edges_round_trip(tmp_path):
    from scpd.graph import build_snapshot

    s = build_snapshot(2, [(0, 1, 0.1), (1, 2, 1 / 3)])
    write_edge_list(tmp_path / "e.csv", [s])
    (again,) = load_series(tmp_path / "e.csv")
    assert np.array_equal(s.edges(), again.edges())


def test_edge_list_weight_optional_and_comments(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("# header\n1,0,1\n\n1,1,2,2.5\n2,0,1\n")
    data = read_edge_list(p)
    assert data[1].tolist() == [[0, 1, 1.0], [1, 2, 2.5]]


@pytest.mark.parametrize("line", ["1,0", "1,a,2", "1,0,1,x"])
def test_edge_list_parse_errors_carry_line(tmp_path, line):
    p = tmp_path / "e.csv"
    p.write_text(f"1,0,1\n{line}\n")
    with pytest.raises(DataError, match=r"e\.csv:2"):
        read_edge_list(p)


def test_negative_weight_reported(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("1,0,1,-2\n")
    with pytest.raises(DataError, match="t=1"):
        load_series(p)


def test_attribute_header_validation(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("t,node_id,color:weird\n1,0,x\n")
    with pytest.raises(DataError):
        read_attributes(p)
    p.write_text("t,node,color:categorical\n")
    with pytest.raises(DataError):
        read_attributes(p)


def test_vocabulary_extends_across_timesteps(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("t,node_id,c:categorical\n1,0,a\n1,1,a\n2,0,a\n2,1,b\n")
    tables = read_attributes(p)
    assert tables[1].vocabulary["c"] == ["a", "b"]
    assert tables[2].vocabulary["c"] == ["a", "b"]


def test_signature_and_score_round_trip(tmp_path, small_attr_series):
    emb = embed_series(small_attr_series, DosConfig(n_probe=10), attribute="label")
    write_signatures(tmp_path / "s.csv", emb)
    sigs = read_signatures(tmp_path / "s.csv")
    assert len(sigs) == 3 * len(emb)
    assert np.array_equal(sigs[0].bins, emb[0].dos.bins)
    assert sigs[1].label == "1" and sigs[1].kind == "local_dos"

    res = score_series([e.dos for e in emb])
    write_scores(tmp_path / "z.csv", res)
    again = read_scores(tmp_path / "z.csv")
    assert np.array_equal(again.zstar, res.zstar) and np.array_equal(again.timesteps, res.timesteps)
