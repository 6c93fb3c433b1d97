import numpy as np
import pytest

from conftest import complete_graph, path_graph, random_graph
from scpd.generators import builtin_experiment
from scpd.graph import build_snapshot
from scpd.oracle import (
    OracleSizeError,
    exact_histogram,
    exact_spectrum,
    lad_embedding,
    pad_embeddings,
    sym_laplacian_dense,
)
from scpd.scoring import score_series


def test_path_spectrum():
    assert np.allclose(exact_spectrum(path_graph(3)).eigenvalues, [0, 1, 2], atol=1e-12)


def test_two_triangles_zero_multiplicity():
    s = build_snapshot(1, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    vals = exact_spectrum(s).eigenvalues
    assert np.sum(np.abs(vals) < 1e-10) == 2


def test_zero_multiplicity_equals_component_count():
    import scipy.sparse.csgraph as csgraph

    for seed in range(5):
        s = random_graph(60, 0.03, seed)
        s = build_snapshot(1, s.edges())  # drop isolated nodes
        n_comp = csgraph.connected_components(s.adjacency)[0]
        assert np.sum(np.abs(exact_spectrum(s).eigenvalues) < 1e-9) == n_comp


def test_hybrid_start_graph_trace():
    snaps, _ = builtin_experiment("sbm_hybrid", seed=0)
    vals = exact_spectrum(snaps[0]).eigenvalues
    assert len(vals) == 1200
    assert vals.sum() == pytest.approx(1200, abs=1e-6)
    assert vals.min() >= -1e-10 and vals.max() <= 2 + 1e-10


def test_isolated_nodes_count_in_trace():
    s = build_snapshot(1, [(0, 1)], node_ids=[0, 1, 2, 3])
    spectrum = exact_spectrum(s)
    assert spectrum.eigenvalues.sum() == pytest.approx(4.0)


def test_all_isolated_graph_histogram():
    s = build_snapshot(1, [], node_ids=[0, 1, 2])
    hist = exact_histogram(exact_spectrum(s), 2).bins
    # eigenvalue 1 of L_sym sits at H = 0, the edge between the two bins
    assert hist.tolist() == [0.0, 3.0]


def test_k3_histogram_and_lad():
    spectrum = exact_spectrum(complete_graph(3))
    assert exact_histogram(spectrum, 4).bins.tolist() == [1, 0, 0, 2]
    assert np.allclose(lad_embedding(complete_graph(3)), [0, 1.5, 1.5])


def test_eigenvector_local_histogram_is_indicator():
    s = random_graph(30, 0.2, 1)
    spectrum = exact_spectrum(s, with_vectors=True)
    q = spectrum.eigenvectors[:, 0]
    hist = exact_histogram(spectrum, 10, q).bins
    assert hist[0] == pytest.approx(1.0) and hist[1:].sum() == pytest.approx(0.0, abs=1e-12)


def test_local_without_vectors_raises():
    spectrum = exact_spectrum(path_graph(4))
    with pytest.raises(ValueError):
        exact_histogram(spectrum, 4, np.ones(4))


def test_orthonormality_and_residuals():
    s = random_graph(120, 0.06, 2)
    spectrum = exact_spectrum(s, with_vectors=True)
    Q, lam = spectrum.eigenvectors, spectrum.eigenvalues
    assert np.abs(Q.T @ Q - np.eye(120)).max() <= 1e-8
    L = sym_laplacian_dense(s)
    assert np.linalg.norm(L @ Q - Q * lam, axis=0).max() <= 1e-8


def test_cap():
    s = random_graph(30, 0.1, 3)
    with pytest.raises(OracleSizeError, match="kpm"):
        exact_spectrum(s, cap=20)
    with pytest.raises(OracleSizeError):
        lad_embedding(s, cap=10)


def test_pad_embeddings_left_pads():
    X = pad_embeddings([np.array([1.0, 2.0]), np.array([3.0])])
    assert X.tolist() == [[1.0, 2.0], [0.0, 3.0]]


def test_identical_snapshots_give_zero_lad_scores():
    s = random_graph(20, 0.3, 4)
    v = lad_embedding(s)
    res = score_series([v / np.linalg.norm(v)] * 12)
    assert np.all(res.zstar == 0)
