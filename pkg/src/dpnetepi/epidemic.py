"""Discrete-time SIS agent-based simulation on a fixed contact network.

Each step runs, from start-of-step states:

1. test: agents off treatment are selected with probability ``test_rate``;
   selected infected agents go on treatment for ``test_duration`` steps.
   Selecting a susceptible has no effect, so only infected agents draw, and
   they draw from a second stream: the main stream is then identical under
   both scenarios;
2. infect: every discordant edge transmits with probability ``p_inf``;
3. recover: agents infected at the start of the step recover with
   ``p_recov_treated`` while on treatment, else ``p_recov``;
4. treatment counters count down; an agent reaching zero while infected is
   untreated and test-eligible again;
5. prevalence and incidence rate are recorded.

Agents infected during a step neither transmit nor recover in that step.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from ._rng import new_state, next_double
from .graph import AttributedGraph

BASELINE = "baseline"
TEST_AND_TREAT = "test_and_treat"


@dataclass(frozen=True)
class SimConfig:
    p_inf: float
    p_recov: float = 0.1
    initial_prevalence: float = 0.2
    burn_in: int = 500
    analytic_window: int = 100
    scenario: str = BASELINE
    test_rate: float = 0.1
    test_duration: int = 2
    p_recov_treated: float = 0.5

    def __post_init__(self):
        for name in ("p_inf", "p_recov", "initial_prevalence", "test_rate", "p_recov_treated"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.burn_in < 0 or self.analytic_window < 0 or self.test_duration < 0:
            raise ValueError("burn_in, analytic_window and test_duration must be >= 0")
        if self.scenario not in (BASELINE, TEST_AND_TREAT):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.scenario == TEST_AND_TREAT and self.p_recov_treated < self.p_recov:
            warnings.warn("treated recovery rate is below the untreated rate", stacklevel=3)

    @property
    def steps(self) -> int:
        return self.burn_in + self.analytic_window

    def with_scenario(self, scenario: str) -> "SimConfig":
        return replace(self, scenario=scenario)


HIGH = SimConfig(p_inf=0.75)
LOW = SimConfig(p_inf=0.05)


@dataclass(eq=False)
class EpidemicTrajectory:
    """Per-step series; row ``t`` is the state after step ``t + 1``."""

    prevalence: np.ndarray
    incidence: np.ndarray
    group_prevalence: np.ndarray
    group_incidence: np.ndarray
    groups: tuple[tuple[str, str], ...]
    scenario: str
    conservation_violations: int = 0
    max_treatment: int = 0

    def __len__(self):
        return len(self.prevalence)

    def write_csv(self, path, start_step: int = 1) -> None:
        """Long format ``step,scenario,metric,group,value``."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "scenario", "metric", "group", "value"])
            labels = ["ALL", *(f"{a}={c}" for a, c in self.groups)]
            for t in range(len(self)):
                step = t + start_step
                for metric, pop, grp in (("prevalence", self.prevalence, self.group_prevalence),
                                         ("incidence", self.incidence, self.group_incidence)):
                    vals = [pop[t], *grp[t]]
                    for label, v in zip(labels, vals):
                        w.writerow([step, self.scenario, metric, label, repr(float(v))])


@dataclass(eq=False)
class EpidemicSummary:
    prevalence: float
    incidence: float
    group_prevalence: np.ndarray
    group_incidence: np.ndarray
    groups: tuple[tuple[str, str], ...]
    scenario: str = BASELINE


@dataclass(eq=False)
class Ratio:
    """Intervention-to-baseline ratio; ``nan`` entries are undefined (zero baseline)."""

    value: float
    groups: np.ndarray
    missing: int


@njit(cache=True)
def _sis(n, eu, ev, gid, n_groups, infected, p_inf, p_recov, p_treated, test_rate, test_duration,
         steps, main, tests, prev, inc, gprev, ginc, diag):
    n_attr = gid.shape[0]
    treat = np.zeros(n, dtype=np.int64)
    newinf = np.zeros(n, dtype=np.uint8)
    size = np.zeros(n_groups)
    i_g = np.zeros(n_groups)
    for v in range(n):
        for a in range(n_attr):
            size[gid[a, v]] += 1.0
            if infected[v] == 1:
                i_g[gid[a, v]] += 1.0
    n_i = 0
    for v in range(n):
        n_i += infected[v]
    s_prev = n - n_i
    s_prev_g = size - i_g
    new_g = np.zeros(n_groups)
    violations = 0
    max_treat = 0
    m = eu.shape[0]
    for t in range(steps):
        # test: only infected, untested agents can start treatment, so the
        # draws of the other agents are skipped; they live on their own stream
        if test_rate > 0.0:
            for v in range(n):
                if infected[v] == 1 and treat[v] == 0 and next_double(tests) < test_rate:
                    treat[v] = test_duration
        # infect from start-of-step states
        n_new = 0
        for e in range(m):
            a = infected[eu[e]]
            b = infected[ev[e]]
            if a != b and next_double(main) < p_inf:
                w = ev[e] if a == 1 else eu[e]
                if newinf[w] == 0:
                    newinf[w] = 1
                    n_new += 1
        # recover agents infected at the start of the step
        for g in range(n_groups):
            new_g[g] = 0.0
        for v in range(n):
            if infected[v] == 1:
                rate = p_treated if treat[v] > 0 else p_recov
                if next_double(main) < rate:
                    infected[v] = 0
                    treat[v] = 0
                    n_i -= 1
                    for a in range(n_attr):
                        i_g[gid[a, v]] -= 1.0
            elif newinf[v] == 1:
                infected[v] = 1
                newinf[v] = 0
                n_i += 1
                for a in range(n_attr):
                    i_g[gid[a, v]] += 1.0
                    new_g[gid[a, v]] += 1.0
            # countdown; reaching zero while infected makes the agent testable again
            if treat[v] > 0:
                if treat[v] > max_treat:
                    max_treat = treat[v]
                treat[v] -= 1
        # record
        n_s = n - n_i
        check = 0
        for v in range(n):
            check += infected[v]
        if check != n_i or n_s < 0:
            violations += 1
        prev[t] = n_i / n
        inc[t] = n_new / s_prev if s_prev > 0 else 0.0
        for g in range(n_groups):
            gprev[t, g] = i_g[g] / size[g] if size[g] > 0 else np.nan
            ginc[t, g] = new_g[g] / s_prev_g[g] if s_prev_g[g] > 0 else 0.0
            s_prev_g[g] = size[g] - i_g[g]
        s_prev = n_s
    diag[0] = violations
    diag[1] = max_treat


def _group_index(g: AttributedGraph, attrs):
    offsets, labels = [], []
    gid = np.zeros((max(len(attrs), 0), g.node_count), dtype=np.int64)
    off = 0
    for r, a in enumerate(attrs):
        cats = g.categories[a]
        gid[r] = g.attributes[a] + off
        labels += [(a, c) for c in cats]
        offsets.append(off)
        off += len(cats)
    return gid, off, tuple(labels)


def run_sis(g: AttributedGraph, cfg: SimConfig, rng: np.random.Generator, attrs=None,
            initial: np.ndarray | None = None) -> EpidemicTrajectory:
    """Simulate ``cfg.burn_in + cfg.analytic_window`` steps.

    ``attrs`` selects the attributes tracked per group (default: all).
    ``initial`` overrides the random index cases with an explicit boolean
    infection vector.
    """
    n = g.node_count
    attrs = list(g.categories) if attrs is None else list(attrs)
    if initial is None:
        n0 = int(math.floor(cfg.initial_prevalence * n + 1e-9))
        if n0 < 1:
            raise ValueError("initial prevalence leaves no index case")
        infected = np.zeros(n, dtype=np.uint8)
        infected[rng.choice(n, size=n0, replace=False)] = 1
    else:
        infected = np.asarray(initial, dtype=np.uint8).copy()
        if infected.shape != (n,):
            raise ValueError("initial infection vector must have one entry per node")
    main, tests = new_state(rng), new_state(rng)
    gid, n_groups, labels = _group_index(g, attrs)
    steps = cfg.steps
    prev = np.empty(steps)
    inc = np.empty(steps)
    gprev = np.empty((steps, n_groups))
    ginc = np.empty((steps, n_groups))
    diag = np.zeros(2, dtype=np.int64)
    test_rate = cfg.test_rate if cfg.scenario == TEST_AND_TREAT else 0.0
    eu = np.ascontiguousarray(g.edges[:, 0])
    ev = np.ascontiguousarray(g.edges[:, 1])
    _sis(n, eu, ev, gid, n_groups, infected, cfg.p_inf, cfg.p_recov, cfg.p_recov_treated, test_rate,
         int(cfg.test_duration), steps, main, tests, prev, inc, gprev, ginc, diag)
    return EpidemicTrajectory(prev, inc, gprev, ginc, labels, cfg.scenario, int(diag[0]), int(diag[1]))


def summarize(traj: EpidemicTrajectory, cfg: SimConfig) -> EpidemicSummary:
    """Means over the final ``cfg.analytic_window`` steps."""
    if len(traj) != cfg.steps:
        raise ValueError(f"trajectory has {len(traj)} steps, expected {cfg.steps}")
    w = slice(cfg.burn_in, cfg.steps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return EpidemicSummary(
            prevalence=float(np.mean(traj.prevalence[w])),
            incidence=float(np.mean(traj.incidence[w])),
            group_prevalence=np.mean(traj.group_prevalence[w], axis=0),
            group_incidence=np.mean(traj.group_incidence[w], axis=0),
            groups=traj.groups,
            scenario=traj.scenario,
        )


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def _paired_ratio(intervention: EpidemicSummary, baseline: EpidemicSummary, field_pop, field_grp) -> Ratio:
    if intervention.groups != baseline.groups:
        raise ValueError("summaries track different groups")
    value = float(_ratio(getattr(intervention, field_pop), getattr(baseline, field_pop)))
    groups = _ratio(getattr(intervention, field_grp), getattr(baseline, field_grp))
    missing = int(math.isnan(value)) + int(np.isnan(groups).sum())
    return Ratio(value, groups, missing)


def prevalence_ratio(intervention: EpidemicSummary, baseline: EpidemicSummary) -> Ratio:
    return _paired_ratio(intervention, baseline, "prevalence", "group_prevalence")


def incidence_rate_ratio(intervention: EpidemicSummary, baseline: EpidemicSummary) -> Ratio:
    return _paired_ratio(intervention, baseline, "incidence", "group_incidence")
