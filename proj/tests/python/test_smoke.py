import math

import networkx as nx
import numpy as np
import pytest

import txnet


def test_bh_matches_hand_values():
    adj = txnet.bh_adjust([0.01, 0.04, 0.03, 0.20])
    assert adj == pytest.approx([0.04, 0.16 / 3, 0.16 / 3, 0.20])


def test_tmm_identical_columns_are_one():
    counts = np.tile(np.arange(1, 41, dtype=np.int64).reshape(-1, 1), (1, 3))
    assert txnet.tmm_factors(counts) == pytest.approx([1.0, 1.0, 1.0])


def test_tmm_geometric_mean_one():
    rng = np.random.default_rng(3)
    counts = rng.poisson(50, size=(200, 4)).astype(np.int64)
    counts[:20, 0] *= 6
    f = txnet.tmm_factors(counts)
    assert math.exp(np.mean(np.log(f))) == pytest.approx(1.0, abs=1e-12)


def test_glasso_zero_penalty_inverts():
    S = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
    est = txnet.glasso(S, 1e-8)
    np.testing.assert_allclose(est["theta"], np.linalg.inv(S), atol=1e-5)
    assert est["converged"]
    assert all(b >= a - 1e-12 for a, b in zip(est["dual_trace"], est["dual_trace"][1:]))


def test_glasso_large_penalty_is_diagonal():
    S = np.array([[1.0, 0.4], [0.4, 1.0]])
    est = txnet.glasso(S, 0.5)
    assert est["theta"][0, 1] == 0.0


def test_lmm_single_group_is_ols():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(30), rng.normal(size=30)])
    y = X @ np.array([1.0, 2.0]) + rng.normal(scale=0.1, size=30)
    fit = txnet.fit_lmm(y, X, [0] * 30)
    assert fit["ols"]
    np.testing.assert_allclose(fit["beta"], np.linalg.lstsq(X, y, rcond=None)[0], atol=1e-10)


def test_cluster_two_cliques():
    edges = []
    for base in (0, 10):
        nodes = [f"n{base + i}" for i in range(5)]
        edges += [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
    edges.append(("n0", "n10"))
    labels, q = txnet.cluster_edges(edges, seed=7)
    assert labels["n1"] == labels["n4"]
    assert labels["n11"] == labels["n14"]
    assert labels["n1"] != labels["n11"]
    assert q > 0.4


def test_errors_are_translated():
    with pytest.raises(txnet.TxnetError):
        txnet.glasso(np.eye(2), -1.0)


SCENARIO = """
n_subjects=24
n_genes=300
de_count=30
module_pattern=block
module_genes=30
clinical_partners=4
"""


def test_simulate_and_pipeline(tmp_path):
    data = tmp_path / "data"
    genes, samples = txnet.simulate(SCENARIO, 11, data)
    assert genes == 300
    assert samples == 48

    rows = txnet.de_contrast(data / "counts.tsv", data / "meta.tsv")
    assert len(rows) == 300
    assert all(0.0 <= r["p_value"] <= 1.0 for r in rows)

    run = tmp_path / "run"
    stages = txnet.run_pipeline(data / "counts.tsv", data / "meta.tsv", data / "clinical.tsv", run, seed=5)
    assert stages[0] == "qc"
    assert (run / "manifest.json").exists()

    g = nx.read_graphml(run / "network_1-2.graphml")
    assert g.number_of_nodes() > 0
    kinds = {d.get("kind") for _, d in g.nodes(data=True)}
    assert "gene" in kinds
