import math

import pytest

import lmrt


def test_grow_and_analyse():
    t = lmrt.grow_tree(lmrt.mesoscopic(0.5), 2000, 7)
    assert t.n == 2000 == len(t)
    assert t.parent(1) == 0
    assert all(1 <= t.parent(v) < v for v in range(2, 2001))
    assert t.height() == max(t.depths())
    assert sum(t.degree_histogram().values()) == 2000
    back = lmrt.tree_from_csv(t.to_csv())
    assert back == t
    assert t.to_dot().startswith("digraph")


def test_streaming_matches_full_tree():
    s = lmrt.macroscopic(0.5)
    t = lmrt.grow_tree(s, 10000, 3)
    g = lmrt.grow_streaming(s, 10000, 3)
    assert g["height"] == t.height()
    assert g["degree_histogram"] == t.degree_histogram()


def test_constants():
    for theta in (0.1, 0.5, 0.9):
        h = lmrt.height_constants(theta)
        assert abs(h["kappa"] * h["alpha_max"] - 1.0) <= 1e-6
    assert abs(lmrt.macro_degree_pmf(0.5, 1) - 5.0 / 12.0) < 1e-9
    assert abs(lmrt.meso_degree_pmf(1) - math.exp(-1.0)) < 1e-15
    assert lmrt.f_beta(0.5, 0.0) == 1.0
    assert lmrt.height_constant_meso(0.5) == 4.0


def test_exploration_and_subtree():
    t = lmrt.Tree.from_parents([0, 0] + list(range(1, 9)))  # path on 9 vertices
    tr = lmrt.explore_ancestral_lines(t, 2)
    assert tr["termination"] == 1
    assert tr["terminal_label"] == 8
    sub = lmrt.spanned_subtree(t, [9, 8])
    assert sub["branchpoints"][0]["label"] == 8


def test_chain_and_fringe():
    chain = lmrt.simulate_chain(10000, 0.5, 1)
    assert chain[0] == 10000 and chain[-1] == 1
    assert lmrt.chain_fluid_deviation(chain, 10000, 0.5, 3.0) < 0.2
    fr = lmrt.grow_tree(lmrt.mesoscopic(0.5), 5000, 2).empirical_fringe(3)
    assert fr["total"] == 5000
    assert sum(fr["counts"].values()) + fr["truncated"] == 5000
    assert abs(fr["counts"]["()"] / 5000 - math.exp(-1.0)) < 0.03


def test_ks_with_python_cdf():
    xs = [lmrt.branchpoint_sample(2, lmrt.derive_seed(1, i))[0] for i in range(2000)]
    assert lmrt.ks_one_sample(xs, lambda x: min(max(x, 0.0), 1.0) ** 8) < 0.05


def test_sweep_roundtrip():
    report = lmrt.run_sweep({
        "schedule": lmrt.mesoscopic(0.5),
        "n": [1000],
        "replications": 4,
        "master_seed": 5,
        "statistics": ["height", "degree_hist"],
    })
    assert report["complete"] is True
    assert len(report["cells"]) == 4
    assert report["generator"] == lmrt.GENERATOR
    assert report["cells"][0]["seed"] == lmrt.derive_seed(5, 0)


def test_errors():
    with pytest.raises(ValueError):
        lmrt.grow_tree(lmrt.mesoscopic(1.5), 10, 1)
    with pytest.raises(ValueError):
        lmrt.grow_tree({"type": "nope"}, 10, 1)
    with pytest.raises(ValueError):
        lmrt.explore_ancestral_lines(lmrt.grow_tree(lmrt.mesoscopic(0.5), 10, 1), 1)
    with pytest.raises(OSError):
        lmrt.run_sweep({
            "schedule": lmrt.mesoscopic(0.5), "n": [10], "statistics": ["height"],
            "output": {"json": "/nonexistent-dir/x/r.json"},
        })
