"""Factorial privacy experiment: release, fit, sample, simulate, tabulate.

A plan crosses model families with privacy budgets and truncation degrees.
Three conditions are run:

* ``OBSERVED``: epidemics directly on the ground-truth network;
* ``NO_DP``: a model fitted to the exact statistics of the ground truth,
  ``networks`` synthetic networks sampled from it;
* ``DP``: per (epsilon, delta) cell, ``releases`` private releases, one fit
  per release and ``networks`` synthetic networks per fit.

On every network each transmission setting runs ``sims`` paired baseline and
test-and-treat simulations. Every random stream is seeded by
:func:`derive_seed` from the master seed and the path of the task, so the
results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .epidemic import BASELINE, HIGH, LOW, TEST_AND_TREAT, SimConfig, incidence_rate_ratio, prevalence_ratio, run_sis, summarize
from .graph import AttributedGraph, degree_histogram, from_edges, mixing_matrix, quality_metrics
from .models.ergm import ErgmParams, ErgmSpec, FitConfig, McmcConfig, ergm_statistics, fit_ergm, sample_ergm, sample_ergm_networks
from .models.sbm import SbmParams, fit_sbm, matrix_from_values, mixing_stats, pair_counts, sample_sbm
from .release import ReleaseSpec, format_epsilon, parse_epsilon, release_statistics

OBSERVED, NO_DP, DP = "OBSERVED", "NO_DP", "DP"
CONDITIONS = (OBSERVED, NO_DP, DP)
FAMILIES = ("sbm", "ergm")
SCENARIOS = (BASELINE, TEST_AND_TREAT)
NETWORK = "network"
COLUMNS = ("model", "condition", "epsilon", "delta", "release", "network", "sim", "scenario", "metric", "group", "value", "flags")

__all__ = [
    "OBSERVED", "NO_DP", "DP", "COLUMNS",
    "AttributeSpec", "ObservedConfig", "ExperimentPlan", "ResultRow", "ExperimentResult",
    "derive_seed", "stream", "generate_observed_network", "run_experiment", "expected_row_count",
    "export_results", "parse_results", "format_results", "export_plot_data", "desk_observed", "PLOT_KINDS",
]


# --------------------------------------------------------------------------
# seeds


def derive_seed(master_seed: int, *path) -> int:
    """63-bit seed from a BLAKE2b hash of the master seed and a task path."""
    key = json.dumps([int(master_seed), *[_label(p) for p in path]], separators=(",", ":"))
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big") >> 1


def _label(p):
    if isinstance(p, float):
        return format_epsilon(p)
    if isinstance(p, (np.integer,)):
        return int(p)
    return p


def stream(master_seed: int, *path) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *path))


# --------------------------------------------------------------------------
# plan


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    categories: tuple[str, ...]
    proportions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        object.__setattr__(self, "proportions", tuple(float(p) for p in self.proportions))
        if len(self.categories) != len(self.proportions) or not self.categories:
            raise ValueError(f"attribute {self.name!r}: one proportion per category required")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"attribute {self.name!r}: categories must be distinct")
        if any(p < 0 for p in self.proportions) or not math.isclose(sum(self.proportions), 1.0, abs_tol=1e-9):
            raise ValueError(f"attribute {self.name!r}: proportions must be non-negative and sum to 1")


@dataclass(frozen=True)
class ObservedConfig:
    """Ground-truth generator: node count, attribute mix and a graph model.

    ``model`` is ``{"type": "ergm", "terms": [...], "theta": [...]}`` or
    ``{"type": "sbm", "attr": name, "edge_prob": k x k}``.
    """

    node_count: int
    attributes: tuple[AttributeSpec, ...]
    model: dict

    def __post_init__(self):
        attrs = tuple(a if isinstance(a, AttributeSpec) else AttributeSpec(**a) for a in self.attributes)
        object.__setattr__(self, "attributes", attrs)
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        kind = self.model.get("type")
        if kind == "ergm":
            if len(self.model.get("terms", ())) != len(self.model.get("theta", ())):
                raise ValueError("ERGM generator needs one theta per term")
        elif kind == "sbm":
            if self.model.get("attr") not in self.categories:
                raise ValueError("SBM generator attribute is not declared")
        else:
            raise ValueError(f"unknown generator model {kind!r}")

    @property
    def categories(self) -> dict[str, tuple[str, ...]]:
        return {a.name: a.categories for a in self.attributes}

    def to_dict(self) -> dict:
        return {"node_count": self.node_count, "attributes": [asdict(a) for a in self.attributes], "model": self.model}

    @classmethod
    def from_dict(cls, d: dict) -> "ObservedConfig":
        return cls(int(d["node_count"]), tuple(AttributeSpec(**a) for a in d["attributes"]), dict(d["model"]))


AGE = AttributeSpec("age", ("18-24", "25-34", "35-44", "45-54", "55-65"), (0.2, 0.25, 0.2, 0.2, 0.15))
RACE = AttributeSpec("race", ("black", "hispanic", "white_other"), (0.35, 0.2, 0.45))
DESK_THETA = (
    -7.3,                          # edges
    -0.5, -20.0,                   # degree >= 2, degree >= 4 (caps degree at 3)
    1.6, 1.5, 1.5, 1.4, 1.3,       # age nodematch per group
    0.8,                           # race total nodematch
    0.1, 0.2, 0.0, -0.2,           # age nodefactor, first group dropped
    0.1, -0.1,                     # race nodefactor, first group dropped
)


def desk_observed(node_count: int = 1000) -> ObservedConfig:
    cats = {AGE.name: AGE.categories, RACE.name: RACE.categories}
    spec = ErgmSpec.standard(cats)
    return ObservedConfig(node_count, (AGE, RACE), {"type": "ergm", "terms": spec.descriptors(), "theta": list(DESK_THETA)})


def _sim_to_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d.pop("scenario")
    return d


@dataclass(frozen=True)
class ExperimentPlan:
    model_families: tuple[str, ...] = FAMILIES
    epsilons: tuple[float, ...] = (0.5, 1.0, 5.0, 10.0, math.inf)
    delta_caps: tuple[int, ...] = (2, 3, 4, 5)
    releases: int = 5
    networks: int = 10
    sims: int = 10
    settings: tuple[tuple[str, SimConfig], ...] = (("high", HIGH), ("low", LOW))
    master_seed: int = 0
    observed: ObservedConfig = field(default_factory=desk_observed)
    sbm_attr: str = "age"
    ergm_terms: tuple[str, ...] | None = None
    fit: FitConfig = field(default_factory=FitConfig)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    degree_bins: int = 5

    def __post_init__(self):
        object.__setattr__(self, "model_families", tuple(self.model_families))
        object.__setattr__(self, "epsilons", tuple(parse_epsilon(e) for e in self.epsilons))
        object.__setattr__(self, "delta_caps", tuple(int(d) for d in self.delta_caps))
        object.__setattr__(self, "settings", tuple((str(k), v) for k, v in self.settings))
        if self.ergm_terms is not None:
            object.__setattr__(self, "ergm_terms", tuple(self.ergm_terms))
        if not self.model_families or any(f not in FAMILIES for f in self.model_families):
            raise ValueError(f"model families must be drawn from {FAMILIES}")
        if len(set(self.model_families)) != len(self.model_families):
            raise ValueError("model families must be distinct")
        if not self.epsilons or not self.delta_caps or not self.settings:
            raise ValueError("epsilons, delta_caps and settings must be non-empty")
        if any(not e > 0 for e in self.epsilons) or any(d < 1 for d in self.delta_caps):
            raise ValueError("epsilons must be positive and delta caps >= 1")
        if min(self.releases, self.networks, self.sims) < 1:
            raise ValueError("releases, networks and sims must be >= 1")
        if len({k for k, _ in self.settings}) != len(self.settings):
            raise ValueError("setting names must be distinct")
        if self.sbm_attr not in self.observed.categories:
            raise ValueError(f"SBM attribute {self.sbm_attr!r} is not declared")
        if self.degree_bins < 1:
            raise ValueError("degree_bins must be >= 1")

    @classmethod
    def desk(cls, master_seed: int = 0) -> "ExperimentPlan":
        return cls(master_seed=master_seed)

    @property
    def attrs(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.observed.attributes)

    def ergm_spec(self) -> ErgmSpec:
        if self.ergm_terms is not None:
            return ErgmSpec(self.ergm_terms)
        return ErgmSpec.standard(self.observed.categories)

    def group_labels(self) -> tuple[str, ...]:
        return ("ALL", *(f"{a.name}={c}" for a in self.observed.attributes for c in a.categories))

    def degree_labels(self) -> tuple[str, ...]:
        return (*(str(d) for d in range(self.degree_bins)), f"{self.degree_bins}+")

    def quality_names(self) -> tuple[str, ...]:
        return ("q_edges", "q_concurrent", *(f"q_nodematch_{a}" for a in self.attrs))

    def to_dict(self) -> dict:
        return {
            "model_families": list(self.model_families),
            "epsilons": [format_epsilon(e) if math.isinf(e) else e for e in self.epsilons],
            "delta_caps": list(self.delta_caps),
            "releases": self.releases,
            "networks": self.networks,
            "sims": self.sims,
            "settings": {k: _sim_to_dict(v) for k, v in self.settings},
            "master_seed": self.master_seed,
            "observed": self.observed.to_dict(),
            "sbm_attr": self.sbm_attr,
            "ergm_terms": None if self.ergm_terms is None else list(self.ergm_terms),
            "fit": asdict(self.fit),
            "mcmc": asdict(self.mcmc),
            "degree_bins": self.degree_bins,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentPlan":
        """Build a plan from a JSON-style mapping; missing keys take desk defaults."""
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown plan fields: {sorted(unknown)}")
        kw = dict(d)
        if "settings" in kw:
            kw["settings"] = tuple((k, SimConfig(**v)) for k, v in kw["settings"].items())
        if "observed" in kw:
            kw["observed"] = ObservedConfig.from_dict(kw["observed"])
        if "fit" in kw:
            kw["fit"] = FitConfig(**kw["fit"])
        if "mcmc" in kw:
            kw["mcmc"] = McmcConfig(**kw["mcmc"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


# --------------------------------------------------------------------------
# ground truth


def generate_observed_network(cfg: ObservedConfig, rng: np.random.Generator, mcmc: McmcConfig | None = None) -> AttributedGraph:
    """Draw node attributes by proportion, then a graph from the configured model."""
    n = cfg.node_count
    attrs = {a.name: rng.choice(len(a.categories), size=n, p=a.proportions).astype(np.int64) for a in cfg.attributes}
    nodes = from_edges(n, [], attrs, cfg.categories)
    m = cfg.model
    if m["type"] == "ergm":
        spec = ErgmSpec(tuple(m["terms"]))
        return sample_ergm(ErgmParams(np.array(m["theta"], dtype=float), max(20.0, float(np.max(np.abs(m["theta"]))))),
                           spec, nodes, mcmc, rng)
    return sample_sbm(SbmParams(m["attr"], np.array(m["edge_prob"], dtype=float)), nodes, rng)


# --------------------------------------------------------------------------
# results


class ResultRow(NamedTuple):
    model: str
    condition: str
    epsilon: float | None
    delta: int | None
    release: int | None
    network: int | None
    sim: int | None
    scenario: str
    metric: str
    group: str
    value: float
    flags: str = ""

    def key(self):
        def num(x):
            return -1 if x is None else x
        return (self.model, CONDITIONS.index(self.condition), num(self.epsilon), num(self.delta), num(self.release),
                num(self.network), num(self.sim), self.scenario, self.metric, self.group)

    def cells(self) -> list[str]:
        def opt(x):
            return "" if x is None else str(x)
        eps = "" if self.epsilon is None else format_epsilon(self.epsilon)
        return [self.model, self.condition, eps, opt(self.delta), opt(self.release), opt(self.network), opt(self.sim),
                self.scenario, self.metric, self.group, repr(float(self.value)), self.flags]

    @classmethod
    def from_cells(cls, cells) -> "ResultRow":
        def opt(x):
            return None if x == "" else int(x)
        model, cond, eps, delta, rel, net, sim, scen, metric, group, value, flags = cells
        return cls(model, cond, None if eps == "" else parse_epsilon(eps), opt(delta), opt(rel), opt(net), opt(sim),
                   scen, metric, group, float(value), flags)


@dataclass
class ExperimentResult:
    """Rows plus sweep-level diagnostics."""

    rows: list[ResultRow]
    simulations: int = 0
    conservation_violations: int = 0
    max_treatment: int = 0
    fits: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def expected_row_count(plan: ExperimentPlan) -> int:
    """Closed-form number of rows a plan emits.

    Per network: the quality and degree-fraction rows, plus per setting and
    simulation two scenarios x (prevalence, incidence) and the two ratios,
    each for every group.
    """
    groups = len(plan.group_labels())
    per_sim = 3 * 2 * groups
    per_network = len(plan.quality_names()) + len(plan.degree_labels()) + len(plan.settings) * plan.sims * per_sim
    synthetic = len(plan.model_families) * (1 + len(plan.epsilons) * len(plan.delta_caps) * plan.releases) * plan.networks
    return (1 + synthetic) * per_network


# --------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class _Task:
    condition: str
    family: str = ""
    epsilon: float | None = None
    delta: int | None = None
    release: int | None = None

    @property
    def path(self) -> tuple:
        if self.condition == OBSERVED:
            return (OBSERVED,)
        if self.condition == NO_DP:
            return (self.family, NO_DP)
        return (self.family, DP, self.epsilon, self.delta, self.release)


def _tasks(plan: ExperimentPlan) -> list[_Task]:
    tasks = [_Task(OBSERVED)]
    for fam in plan.model_families:
        tasks.append(_Task(NO_DP, fam))
        for eps in plan.epsilons:
            for delta in plan.delta_caps:
                for r in range(plan.releases):
                    tasks.append(_Task(DP, fam, eps, delta, r))
    return tasks


class _Acc:
    def __init__(self):
        self.rows = []
        self.simulations = 0
        self.violations = 0
        self.max_treatment = 0
        self.fits = []


def _network_rows(plan, base, g: AttributedGraph, observed: AttributedGraph, flags, acc):
    q = quality_metrics(g, observed, plan.attrs)
    for name, key in zip(plan.quality_names(), q):
        acc.rows.append(ResultRow(*base, None, NETWORK, name, "ALL", q[key], flags))
    hist = degree_histogram(g)
    top = plan.degree_bins
    counts = np.zeros(top + 1)
    counts[: min(len(hist), top)] = hist[:top]
    counts[top] = hist[top:].sum()
    for label, c in zip(plan.degree_labels(), counts / g.node_count):
        acc.rows.append(ResultRow(*base, None, NETWORK, "degree_fraction", label, float(c), flags))


def _simulate(plan, base, seed_path, g: AttributedGraph, flags, acc):
    labels = plan.group_labels()
    for setting, cfg in plan.settings:
        for m in range(plan.sims):
            rng = stream(plan.master_seed, *seed_path, setting, m)
            n0 = int(math.floor(cfg.initial_prevalence * g.node_count + 1e-9))
            if n0 < 1:
                raise ValueError("initial prevalence leaves no index case")
            initial = np.zeros(g.node_count, dtype=np.uint8)
            initial[rng.choice(g.node_count, size=n0, replace=False)] = 1
            summaries = {}
            for scen in SCENARIOS:
                c = cfg.with_scenario(scen)
                traj = run_sis(g, c, stream(plan.master_seed, *seed_path, setting, m, scen), plan.attrs, initial)
                acc.simulations += 1
                acc.violations += traj.conservation_violations
                acc.max_treatment = max(acc.max_treatment, traj.max_treatment)
                s = summaries[scen] = summarize(traj, c)
                label = f"{setting}/{scen}"
                for metric, pop, grp in (("prevalence", s.prevalence, s.group_prevalence),
                                         ("incidence", s.incidence, s.group_incidence)):
                    for gl, v in zip(labels, (pop, *grp)):
                        acc.rows.append(ResultRow(*base, m, label, metric, gl, float(v), flags))
            for metric, fn in (("prevalence_ratio", prevalence_ratio), ("incidence_rate_ratio", incidence_rate_ratio)):
                r = fn(summaries[TEST_AND_TREAT], summaries[BASELINE])
                for gl, v in zip(labels, (r.value, *r.groups)):
                    f = _join(flags, "zero_baseline") if math.isnan(v) else flags
                    acc.rows.append(ResultRow(*base, m, f"{setting}/ratio", metric, gl, float(v), f))


def _join(*flags):
    return ";".join(sorted({x for f in flags for x in f.split(";") if x}))


def _fit_family(plan, task: _Task, observed: AttributedGraph, acc):
    """Fit the task's model; returns (network sampler, flags)."""
    seed = plan.master_seed
    path = task.path
    nodes = observed.with_edges(np.empty((0, 2), dtype=np.int64))
    if task.family == "sbm":
        k = len(observed.categories[plan.sbm_attr])
        stats = mixing_stats(plan.sbm_attr, k)
        if task.condition == NO_DP:
            matrix = mixing_matrix(observed, plan.sbm_attr).astype(float)
        else:
            rel = release_statistics(observed, ReleaseSpec(stats, task.epsilon, task.delta), stream(seed, *path, "release"))
            matrix = matrix_from_values(stats, rel.values, k)
        pairs = pair_counts(observed.schema(plan.sbm_attr).group_sizes)
        clamped = bool(np.any(matrix > pairs))
        params = fit_sbm(matrix, observed.schema(plan.sbm_attr))
        acc.fits.append({"task": [_label(p) for p in path], "model": "sbm", "converged": True, "clamped": clamped})

        def sampler():
            return [sample_sbm(params, nodes, stream(seed, *path, "network", j)) for j in range(plan.networks)]

        return sampler, "clamped" if clamped else ""

    spec = plan.ergm_spec()
    if task.condition == NO_DP:
        targets = ergm_statistics(observed, spec)
    else:
        rel = release_statistics(observed, ReleaseSpec(spec.terms, task.epsilon, task.delta), stream(seed, *path, "release"))
        targets = rel.values
    res = fit_ergm(targets, spec, nodes, plan.fit, plan.mcmc, stream(seed, *path, "fit"))
    acc.fits.append({"task": [_label(p) for p in path], "model": "ergm", **res.diagnostics(),
                     "theta": [float(x) for x in res.theta]})
    flags = _join("" if res.converged else "nonconverged", "clamped" if res.clamped else "")

    def sampler():
        rngs = (stream(seed, *path, "network", j) for j in range(plan.networks))
        return sample_ergm_networks(res.params, spec, nodes, rngs, plan.mcmc, stream(seed, *path, "burn"))

    return sampler, flags


def _run_task(plan: ExperimentPlan, observed: AttributedGraph, task: _Task) -> _Acc:
    acc = _Acc()
    if task.condition == OBSERVED:
        base = ("observed", OBSERVED, None, None, None, None)
        _network_rows(plan, base, observed, observed, "", acc)
        _simulate(plan, base, task.path, observed, "", acc)
        return acc
    sampler, flags = _fit_family(plan, task, observed, acc)
    for j, g in enumerate(sampler()):
        base = (task.family, task.condition, task.epsilon, task.delta, task.release, j)
        _network_rows(plan, base, g, observed, flags, acc)
        _simulate(plan, base, (*task.path, "network", j), g, flags, acc)
    return acc


_WORKER = {}


def _init_worker(plan, observed):
    _WORKER["plan"] = plan
    _WORKER["observed"] = observed


def _worker(task):
    return _run_task(_WORKER["plan"], _WORKER["observed"], task)


def run_experiment(plan: ExperimentPlan, jobs: int = 1, observed: AttributedGraph | None = None) -> ExperimentResult:
    """Run the whole plan; ``jobs`` worker processes, output independent of ``jobs``.

    The ground truth is generated from the plan unless ``observed`` is given.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if observed is None:
        observed = generate_observed_network(plan.observed, stream(plan.master_seed, "observed"), plan.mcmc)
    tasks = _tasks(plan)
    if jobs == 1:
        parts = [_run_task(plan, observed, t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(plan, observed)) as ex:
            parts = list(ex.map(_worker, tasks))
    rows = [r for p in parts for r in p.rows]
    rows.sort(key=ResultRow.key)
    return ExperimentResult(
        rows=rows,
        simulations=sum(p.simulations for p in parts),
        conservation_violations=sum(p.violations for p in parts),
        max_treatment=max((p.max_treatment for p in parts), default=0),
        fits=[f for p in parts for f in p.fits],
    )


# --------------------------------------------------------------------------
# files


def format_results(rows) -> str:
    """The results CSV as text, rows sorted by key."""
    lines = [",".join(COLUMNS)]
    for r in sorted(rows, key=ResultRow.key):
        lines.append(",".join(r.cells()))
    return "\n".join(lines) + "\n"


def export_results(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_results(rows))


def parse_results(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected results header")
        return [ResultRow.from_cells(row) for row in reader if row]


def _groupby(rows, keyfn):
    out: dict = {}
    for r in rows:
        k = keyfn(r)
        if k is not None:
            out.setdefault(k, []).append(r.value)
    return out


def _summary(values):
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    if not len(v):
        return float("nan"), float("nan"), 0
    sd = float(v.std(ddof=1)) if len(v) > 1 else float("nan")
    return float(v.mean()), sd, len(v)


def _cell(r):
    eps = "" if r.epsilon is None else format_epsilon(r.epsilon)
    return (r.model, r.condition, eps, "" if r.delta is None else str(r.delta))


def _cell_sort(k):
    model, cond, eps, delta = k[:4]
    return (model, CONDITIONS.index(cond), -1 if eps == "" else parse_epsilon(eps), -1 if delta == "" else int(delta), *k[4:])


PLOT_KINDS = ("prevalence_ratio", "groups", "quality", "degree", "variance")


def export_plot_data(rows, figure_kind: str, path) -> None:
    """Tidy CSV tables for one figure family.

    ``prevalence_ratio``: population ratios by cell and setting;
    ``groups``: per-group ratios; ``quality``: network quality metrics;
    ``degree``: degree fractions; ``variance``: per-release and per-network
    means of every scenario's population prevalence.
    """
    cell_cols = ["model", "condition", "epsilon", "delta"]
    if figure_kind in ("prevalence_ratio", "groups"):
        def key(r):
            if r.metric not in ("prevalence_ratio", "incidence_rate_ratio"):
                return None
            if figure_kind == "prevalence_ratio" and r.group != "ALL":
                return None
            return (*_cell(r), r.scenario.split("/")[0], r.metric, r.group)
        header = [*cell_cols, "setting", "metric", "group", "mean", "sd", "count"]
    elif figure_kind in ("quality", "degree"):
        def key(r):
            if r.scenario != NETWORK:
                return None
            if (figure_kind == "quality") != r.metric.startswith("q_"):
                return None
            return (*_cell(r), r.metric, r.group)
        header = [*cell_cols, "metric", "group", "mean", "sd", "count"]
    elif figure_kind == "variance":
        def key(r):
            if r.metric != "prevalence" or r.group != "ALL":
                return None
            return (*_cell(r), r.scenario, -1 if r.release is None else r.release,
                    -1 if r.network is None else r.network)
        header = [*cell_cols, "scenario", "release", "network", "mean", "sd", "count"]
    else:
        raise ValueError(f"unknown figure kind {figure_kind!r}; choose from {PLOT_KINDS}")
    groups = _groupby(rows, key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in sorted(groups, key=_cell_sort):
            mean, sd, count = _summary(groups[k])
            cells = ["" if isinstance(x, int) and x < 0 else x for x in k]
            w.writerow([*cells, repr(mean), repr(sd), count])
