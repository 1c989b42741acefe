import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from dpnetepi import (
    BASELINE,
    HIGH,
    TEST_AND_TREAT,
    SimConfig,
    from_edges,
    incidence_rate_ratio,
    prevalence_ratio,
    run_sis,
    summarize,
)
from dpnetepi.epidemic import EpidemicSummary
from oracles import sis_path3_prevalence

PATH3 = from_edges(3, [(0, 1), (1, 2)], {"a": [0, 1, 0]}, {"a": ("end", "mid")})
MIDDLE = np.array([0, 1, 0])


def short(p_inf, p_recov, steps, **kw):
    return SimConfig(p_inf=p_inf, p_recov=p_recov, burn_in=steps, analytic_window=0, **kw)


def test_markov_oracle_values():
    # frozen from the 8-state chain; t=1 is also hand-computable: 1/3 * (2 * 1/2 + 1/2)
    np.testing.assert_allclose(sis_path3_prevalence(0.5, 0.5, 3), [0.5, 0.40625, 0.3430989583333333], rtol=1e-12)


@pytest.mark.parametrize("p_inf,p_recov", [(0.5, 0.5), (0.8, 0.3)])
def test_path_matches_markov_chain(p_inf, p_recov):
    rng = np.random.default_rng(31)
    runs = 20_000
    prev = np.array([run_sis(PATH3, short(p_inf, p_recov, 3), rng, initial=MIDDLE).prevalence for _ in range(runs)])
    exact = sis_path3_prevalence(p_inf, p_recov, 3)
    se = prev.std(axis=0, ddof=1) / math.sqrt(runs)
    assert np.all(np.abs(prev.mean(axis=0) - exact) < 4 * se)


def test_forced_spread_and_recovery():
    rng = np.random.default_rng(0)
    path = from_edges(5, [(i, i + 1) for i in range(4)])
    tr = run_sis(path, short(1.0, 0.0, 4), rng, initial=[1, 0, 0, 0, 0])
    np.testing.assert_allclose(tr.prevalence, [0.4, 0.6, 0.8, 1.0])
    # one new infection per step out of 4, 3, 2, 1 susceptibles
    np.testing.assert_allclose(tr.incidence, [1 / 4, 1 / 3, 1 / 2, 1.0])
    gone = run_sis(path, short(0.0, 1.0, 3), rng, initial=[1, 1, 1, 1, 1])
    np.testing.assert_array_equal(gone.prevalence, [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(gone.incidence, [0.0, 0.0, 0.0])


def test_synchronous_update_alternates():
    # newly infected agents neither transmit nor recover within their step
    tr = run_sis(PATH3, short(1.0, 1.0, 4), np.random.default_rng(0), initial=MIDDLE)
    np.testing.assert_allclose(tr.prevalence, [2 / 3, 1 / 3, 2 / 3, 1 / 3])
    np.testing.assert_allclose(tr.group_prevalence[:, 0], [1, 0, 1, 0])
    np.testing.assert_allclose(tr.group_prevalence[:, 1], [0, 1, 0, 1])


def test_test_and_treat_forced():
    # every infected agent is tested and treated agents always recover
    g = from_edges(10, [])
    cfg = short(0.0, 0.0, 2, test_rate=1.0, test_duration=2, p_recov_treated=1.0)
    base = run_sis(g, cfg, np.random.default_rng(1), initial=np.ones(10))
    tt = run_sis(g, cfg.with_scenario(TEST_AND_TREAT), np.random.default_rng(1), initial=np.ones(10))
    np.testing.assert_array_equal(base.prevalence, [1.0, 1.0])
    np.testing.assert_array_equal(tt.prevalence, [0.0, 0.0])


def test_treatment_lasts_test_duration():
    # treated agents recover at 1.0 only while treatment lasts; with rate 0 they stay infected
    g = from_edges(4, [])
    cfg = short(0.0, 0.0, 5, test_rate=1.0, test_duration=3, p_recov_treated=0.0, scenario=TEST_AND_TREAT)
    tr = run_sis(g, cfg, np.random.default_rng(0), initial=np.ones(4))
    assert tr.max_treatment == 3
    assert tr.conservation_violations == 0


@pytest.mark.parametrize("change", [{"test_rate": 0.0}, {"p_recov_treated": 0.1}])
def test_inert_intervention_is_byte_identical(change):
    g = random_graph(np.random.default_rng(2), 200, 0.02)
    cfg = SimConfig(p_inf=0.6, p_recov=0.1, burn_in=50, analytic_window=20, **change)
    base = run_sis(g, cfg, np.random.default_rng(9))
    tt = run_sis(g, cfg.with_scenario(TEST_AND_TREAT), np.random.default_rng(9))
    assert base.prevalence.tobytes() == tt.prevalence.tobytes()
    assert base.group_incidence.tobytes() == tt.group_incidence.tobytes()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0, 1), st.sampled_from([BASELINE, TEST_AND_TREAT]))
def test_trajectory_invariants(seed, p_inf, p_recov, scenario):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 60, 0.05, k=(3, 2), names=("age", "race"))
    cfg = SimConfig(p_inf=p_inf, p_recov=p_recov, burn_in=30, analytic_window=10, scenario=scenario,
                    p_recov_treated=max(p_recov, 0.5))
    tr = run_sis(g, cfg, rng)
    assert tr.conservation_violations == 0
    assert tr.max_treatment <= cfg.test_duration
    assert np.all((tr.prevalence >= 0) & (tr.prevalence <= 1))
    assert np.all((tr.incidence >= 0) & (tr.incidence <= 1))
    # group prevalences of each attribute partition the population
    for attr, lo, hi in (("age", 0, 3), ("race", 3, 5)):
        sizes = np.bincount(g.attributes[attr], minlength=hi - lo)
        weighted = np.nansum(tr.group_prevalence[:, lo:hi] * sizes, axis=1) / g.node_count
        np.testing.assert_allclose(weighted, tr.prevalence)


def test_run_is_seed_deterministic():
    g = random_graph(np.random.default_rng(2), 100, 0.05)
    a = run_sis(g, HIGH, np.random.default_rng(3))
    b = run_sis(g, HIGH, np.random.default_rng(3))
    assert a.prevalence.tobytes() == b.prevalence.tobytes()
    assert len(a) == 600


def test_initial_prevalence_count():
    g = from_edges(50, [])
    cfg = SimConfig(p_inf=0.5, p_recov=0.0, burn_in=1, analytic_window=0, initial_prevalence=0.2)
    assert run_sis(g, cfg, np.random.default_rng(0)).prevalence[0] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        run_sis(from_edges(3, []), cfg, np.random.default_rng(0))


def test_summary_and_ratios():
    labels = (("a", "x"), ("a", "y"))
    base = EpidemicSummary(0.2, 0.1, np.array([0.1, 0.0]), np.array([0.05, 0.0]), labels)
    tt = EpidemicSummary(0.1, 0.05, np.array([0.05, 0.0]), np.array([0.01, 0.0]), labels, TEST_AND_TREAT)
    r = prevalence_ratio(tt, base)
    assert r.value == pytest.approx(0.5)
    assert r.groups[0] == pytest.approx(0.5) and np.isnan(r.groups[1])
    assert r.missing == 1
    assert incidence_rate_ratio(tt, base).groups[0] == pytest.approx(0.2)
    cfg = SimConfig(p_inf=0.5, burn_in=2, analytic_window=2)
    tr = run_sis(PATH3, cfg, np.random.default_rng(0), initial=MIDDLE)
    s = summarize(tr, cfg)
    assert s.prevalence == pytest.approx(tr.prevalence[2:].mean())


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(p_inf=1.5)
    with pytest.raises(ValueError):
        SimConfig(p_inf=0.5, scenario="vaccinate")
    with pytest.warns(UserWarning):
        SimConfig(p_inf=0.5, p_recov=0.5, p_recov_treated=0.1, scenario=TEST_AND_TREAT)


def test_trajectory_csv(tmp_path):
    tr = run_sis(PATH3, short(0.5, 0.5, 2), np.random.default_rng(0), initial=MIDDLE)
    tr.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "step,scenario,metric,group,value"
    # 2 steps x 2 metrics x (ALL + 2 groups)
    assert len(lines) == 1 + 12
