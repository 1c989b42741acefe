import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph
from dpnetepi import SbmParams, fit_sbm, mixing_matrix, sample_sbm
from dpnetepi.models.sbm import _pairs_from_index, pair_counts


def test_fit_worked_example(fig3):
    p = fit_sbm(mixing_matrix(fig3, "shape"), fig3.schema("shape"))
    expect = [[2 / 3, 1 / 3, 0], [1 / 3, 1, 1 / 2], [0, 1 / 2, 1]]
    np.testing.assert_allclose(p.edge_prob, expect, rtol=0, atol=1e-15)


def test_fit_clips_noisy_counts(fig3):
    noisy = np.array([[9.0, 2.0, 0.0], [2.0, 0.5, 2.0], [0.0, 2.0, 1.0]])
    p = fit_sbm(noisy, fig3.schema("shape"))
    assert p.edge_prob[0, 0] == 1.0
    assert p.edge_prob[1, 1] == 0.5


def test_fit_validation(fig3):
    schema = fig3.schema("shape")
    with pytest.raises(ValueError):
        fit_sbm(np.zeros((2, 2)), schema)
    with pytest.raises(ValueError):
        fit_sbm(np.array([[1.0, 2, 0], [0, 1, 0], [0, 0, 1]]), schema)
    with pytest.raises(ValueError):
        fit_sbm(-np.eye(3), schema)


def test_empty_group_gets_zero_probability(fig3):
    from dpnetepi.graph import AttributeSchema

    schema = AttributeSchema("shape", ("a", "b", "c"), (3, 0, 4))
    p = fit_sbm(np.array([[1.0, 0, 2], [0, 0, 0], [2, 0, 3]]), schema)
    assert np.all(p.edge_prob[1] == 0)


@given(st.integers(2, 60))
def test_triangle_index_is_a_bijection(n):
    total = n * (n - 1) // 2
    r, c = _pairs_from_index(np.arange(total), n)
    assert np.all(r < c)
    iu, ju = np.triu_indices(n, 1)
    np.testing.assert_array_equal(r, iu)
    np.testing.assert_array_equal(c, ju)


def test_round_trip_binomial_bands():
    rng = np.random.default_rng(21)
    g = random_graph(rng, 500, 0.0, k=(5,), names=("age",))
    target = np.array([[300, 40, 10, 5, 2], [40, 250, 30, 8, 4], [10, 30, 200, 20, 6],
                       [5, 8, 20, 150, 12], [2, 4, 6, 12, 90]], dtype=float)
    params = fit_sbm(target, g.schema("age"))
    pairs = pair_counts(g.schema("age").group_sizes)
    expect = pairs * params.edge_prob
    mats = np.array([mixing_matrix(sample_sbm(params, g, rng), "age") for _ in range(100)])
    mean = mats.mean(axis=0)
    sd = np.sqrt(pairs * params.edge_prob * (1 - params.edge_prob) / 100)
    big = expect >= 10
    assert big.sum() >= 10
    assert np.all(np.abs(mean - expect)[big] <= 3 * sd[big])
    np.testing.assert_allclose(expect, target)


def test_pairs_are_uniform_within_a_block():
    # every pair of a 6-node block should appear with probability p
    g = random_graph(np.random.default_rng(0), 6, 0.0, k=(1,), names=("age",))
    params = SbmParams("age", [[0.3]])
    rng = np.random.default_rng(4)
    counts = np.zeros((6, 6))
    reps = 20_000
    for _ in range(reps):
        for u, v in sample_sbm(params, g, rng).edges:
            counts[u, v] += 1
    freq = counts[np.triu_indices(6, 1)] / reps
    assert np.all(np.abs(freq - 0.3) < 4 * np.sqrt(0.3 * 0.7 / reps))


def test_extreme_probabilities(fig3):
    ones = SbmParams("shape", np.ones((3, 3)))
    full = sample_sbm(ones, fig3, np.random.default_rng(0))
    assert full.edge_count == 21
    empty = sample_sbm(SbmParams("shape", np.zeros((3, 3))), fig3, np.random.default_rng(0))
    assert empty.edge_count == 0


def test_params_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        SbmParams("a", [[0.1, 0.2], [0.3, 0.1]])
    with pytest.raises(ValueError):
        SbmParams("a", [[1.5]])
    p = SbmParams("a", [[0.1, 0.2], [0.2, 0.4]])
    p.save(tmp_path / "m.json", {"note": 1})
    doc = json.loads((tmp_path / "m.json").read_text())
    back = SbmParams.from_dict(doc)
    np.testing.assert_array_equal(back.edge_prob, p.edge_prob)
