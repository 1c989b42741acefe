"""Exponential random graph models over attributed graphs.

Supported terms are the dyad-independent ``edges``, ``nodematch``,
``total_nodematch``, ``nodefactor`` and ``mixing`` statistics plus the
degree-threshold counts ``min_degree(d)``. Sampling is Metropolis-Hastings
over single-dyad toggles with uniform dyad proposals; fitting matches the
simulated mean statistics to (possibly noisy) targets by stochastic
approximation.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import minimize

from .._rng import bounded, new_state, next_double, next_u64
from ..graph import AttributedGraph, Stat, statistics

log = logging.getLogger(__name__)

THETA_CAP = 20.0

DYAD_INDEPENDENT = frozenset({"edges", "nodematch", "total_nodematch", "nodefactor", "mixing"})


@dataclass(frozen=True)
class ErgmSpec:
    terms: tuple[Stat, ...]

    def __post_init__(self):
        terms = tuple(Stat.parse(t) if isinstance(t, str) else t for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if len(set(terms)) != len(terms):
            raise ValueError("ERGM terms must be distinct")
        if Stat.edges() not in terms:
            raise ValueError("ERGM spec must include the edges term")

    def __len__(self):
        return len(self.terms)

    def descriptors(self) -> list[str]:
        return [str(t) for t in self.terms]

    @classmethod
    def standard(cls, categories, age="age", race="race", degrees=(2, 4), drop_reference=True) -> "ErgmSpec":
        """Edges, degree thresholds, per-group age nodematch, total race
        nodematch and age/race nodefactor (first group dropped by default)."""
        first = 1 if drop_reference else 0
        terms = [Stat.edges(), *(Stat.min_degree(d) for d in degrees)]
        terms += [Stat.nodematch(age, i) for i in range(len(categories[age]))]
        terms.append(Stat.total_nodematch(race))
        terms += [Stat.nodefactor(age, i) for i in range(first, len(categories[age]))]
        terms += [Stat.nodefactor(race, i) for i in range(first, len(categories[race]))]
        return cls(tuple(terms))


@dataclass(frozen=True, eq=False)
class ErgmParams:
    theta: np.ndarray
    cap: float = THETA_CAP

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        if np.any(np.abs(theta) > self.cap + 1e-12):
            raise ValueError(f"|theta| exceeds cap {self.cap}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class McmcConfig:
    """Proposal counts; ``None`` means a multiple of the dyad count
    (burn-in 10x, thinning 1x, chain length 5x)."""

    burn_in: int | None = None
    thinning: int | None = None
    chain_length: int | None = None

    def resolve(self, n: int) -> tuple[int, int, int]:
        dyads = max(n * (n - 1) // 2, 1)
        burn = 10 * dyads if self.burn_in is None else int(self.burn_in)
        thin = dyads if self.thinning is None else int(self.thinning)
        length = 5 * dyads if self.chain_length is None else int(self.chain_length)
        if burn < 0 or thin < 1 or length < 0:
            raise ValueError("invalid MCMC configuration")
        return burn, thin, length


@dataclass(frozen=True)
class FitConfig:
    """Stochastic-approximation settings.

    Intervals are fractions of the dyad count. ``tolerance`` is the largest
    accepted ``|mean - target| / SE`` at a convergence check, with SE from
    batch means over ``check_samples`` states. ``check_burn`` proposals are
    discarded before each check that follows a Newton correction.
    """

    gain: float = 0.1
    gain_decay: float = 0.5
    subphases: int = 4
    subphase_iterations: int = 100
    subphase_growth: float = 1.5
    step_interval: float = 0.05
    variance_samples: int = 50
    check_samples: int = 200
    check_interval: float = 0.25
    check_batches: int = 10
    check_burn: float = 2.0
    damping: float = 0.5
    tolerance: float = 3.0
    max_rounds: int = 4
    theta_cap: float = THETA_CAP
    min_variance: float = 1.0

    def __post_init__(self):
        for name in ("gain", "gain_decay", "step_interval", "check_interval", "tolerance", "theta_cap", "min_variance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.check_burn < 0:
            raise ValueError("check_burn must be >= 0")
        for name in ("subphases", "subphase_iterations", "variance_samples", "check_samples", "check_batches", "max_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class FitResult:
    params: ErgmParams
    converged: bool
    t_ratios: np.ndarray
    simulated_mean: np.ndarray
    standard_errors: np.ndarray
    targets: np.ndarray
    raw_targets: np.ndarray
    clamped: list = field(default_factory=list)
    rounds: int = 0
    iterations: int = 0
    at_cap: list = field(default_factory=list)

    @property
    def theta(self):
        return self.params.theta

    def diagnostics(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "rounds": self.rounds,
            "t_ratios": [float(t) for t in self.t_ratios],
            "simulated_mean": [float(x) for x in self.simulated_mean],
            "standard_errors": [float(x) for x in self.standard_errors],
            "targets": [float(x) for x in self.targets],
            "raw_targets": [float(x) for x in self.raw_targets],
            "clamped": self.clamped,
            "at_cap": self.at_cap,
        }


# --------------------------------------------------------------------------
# compiled kernels
#
# Dyad-independent terms depend on the endpoints' joint attribute labels only,
# so their theta-weighted change is tabulated per label pair (``W``) together
# with the raw change rows (``X``). Degree-threshold terms are evaluated from
# the current degrees.


@njit(cache=True)
def _mh_steps(adj, deg, stats, joint, W, X, dterm, dthr, dtheta, n_steps, state, code, track, crossed):
    n = adj.shape[0]
    p = stats.shape[0]
    q = dterm.shape[0]
    accepted = 0
    for _ in range(n_steps):
        x = next_u64(state)
        u = bounded(x >> np.uint64(32), n)
        v = bounded(x & np.uint64(0xFFFFFFFF), n - 1)
        if v >= u:
            v += 1
        else:
            u, v = v, u
        present = adj[u, v] == 1
        ju = joint[u]
        jv = joint[v]
        s = W[ju, jv]
        # degree of each endpoint with the edge present
        du = deg[u] + (0 if present else 1)
        dv = deg[v] + (0 if present else 1)
        for r in range(q):
            c = (1 if du == dthr[r] else 0) + (1 if dv == dthr[r] else 0)
            crossed[r] = c
            s += dtheta[r] * c
        logr = -s if present else s
        if logr >= 0.0 or next_double(state) < math.exp(logr):
            accepted += 1
            sign = -1.0 if present else 1.0
            if present:
                adj[u, v] = 0
                adj[v, u] = 0
                deg[u] -= 1
                deg[v] -= 1
            else:
                adj[u, v] = 1
                adj[v, u] = 1
                deg[u] += 1
                deg[v] += 1
            for k in range(p):
                stats[k] += sign * X[ju, jv, k]
            for r in range(q):
                stats[dterm[r]] += sign * crossed[r]
            if track:
                bit = u * n - (u * (u + 1)) // 2 + (v - u - 1)
                code[0] ^= np.int64(1) << np.int64(bit)
    return accepted


@njit(cache=True)
def _mh_chain(adj, deg, stats, joint, W, X, dterm, dthr, dtheta, burn, thin, n_samples, state, track,
              out_stats, out_codes):
    code = np.zeros(1, dtype=np.int64)
    crossed = np.zeros(dterm.shape[0])
    if track:
        n = adj.shape[0]
        for u in range(n):
            for v in range(u + 1, n):
                if adj[u, v] == 1:
                    code[0] |= np.int64(1) << np.int64(u * n - (u * (u + 1)) // 2 + (v - u - 1))
    acc = _mh_steps(adj, deg, stats, joint, W, X, dterm, dthr, dtheta, burn, state, code, track, crossed)
    for s in range(n_samples):
        acc += _mh_steps(adj, deg, stats, joint, W, X, dterm, dthr, dtheta, thin, state, code, track, crossed)
        out_stats[s, :] = stats
        if track:
            out_codes[s] = code[0]
    return acc


# --------------------------------------------------------------------------
# chain state


def _pair_change(spec: ErgmSpec, names, lu, lv) -> np.ndarray:
    """Change row of the dyad-independent terms for a dyad with joint labels ``lu``, ``lv``."""
    x = np.zeros(len(spec))
    for k, s in enumerate(spec.terms):
        if s.kind not in DYAD_INDEPENDENT:
            continue
        if s.kind == "edges":
            x[k] = 1.0
            continue
        r = names.index(s.attr)
        a, b = lu[r], lv[r]
        if s.kind == "nodematch":
            x[k] = float(a == s.i and b == s.i)
        elif s.kind == "total_nodematch":
            x[k] = float(a == b)
        elif s.kind == "nodefactor":
            x[k] = float(a == s.i or b == s.i)
        else:
            x[k] = float({a, b} == {s.i, s.j})
    return x


class _Chain:
    """Mutable MH state over a fixed node set; holds the dense adjacency."""

    def __init__(self, spec: ErgmSpec, nodes: AttributedGraph, initial: AttributedGraph | None = None):
        self.spec = spec
        self.nodes = nodes
        n = nodes.node_count
        names = list(nodes.categories)
        for s in spec.terms:
            if s.attr and s.attr not in nodes.categories:
                raise KeyError(f"unknown attribute {s.attr!r} in term {s}")
            if s.attr and max(s.i, s.j) >= len(nodes.categories[s.attr]):
                raise KeyError(f"group index out of range in term {s}")
        lab = np.column_stack([nodes.attributes[a] for a in names]) if names else np.zeros((n, 1), dtype=np.int64)
        keys, joint = np.unique(lab, axis=0, return_inverse=True)
        self.joint = np.ascontiguousarray(joint.reshape(-1), dtype=np.int64)
        J = len(keys)
        self.X = np.zeros((J, J, len(spec)))
        for a in range(J):
            for b in range(J):
                self.X[a, b] = _pair_change(spec, names, keys[a], keys[b])
        deg_terms = [k for k, s in enumerate(spec.terms) if s.kind == "min_degree"]
        self.dterm = np.array(deg_terms, dtype=np.int64)
        self.dthr = np.array([spec.terms[k].d for k in deg_terms], dtype=np.int64)
        self.adj = np.zeros((n, n), dtype=np.uint8)
        start = initial if initial is not None else nodes.with_edges(np.empty((0, 2)))
        if start.edge_count:
            e = start.edges
            self.adj[e[:, 0], e[:, 1]] = 1
            self.adj[e[:, 1], e[:, 0]] = 1
        self.deg = np.asarray(start.degree_array, dtype=np.int64).copy()
        self.stats = statistics(start, spec.terms).astype(float)
        self.proposals = 0
        self.accepted = 0

    def copy(self) -> "_Chain":
        other = object.__new__(_Chain)
        other.__dict__.update(self.__dict__)
        other.adj = self.adj.copy()
        other.deg = self.deg.copy()
        other.stats = self.stats.copy()
        return other

    def run(self, theta, burn, thin, n_samples, rng, track=False):
        if self.nodes.node_count < 2:
            out = np.tile(self.stats, (n_samples, 1))
            return out, np.zeros(n_samples, dtype=np.int64)
        if track and self.nodes.node_count * (self.nodes.node_count - 1) // 2 > 62:
            raise ValueError("graph codes only available for up to 62 dyads")
        out = np.empty((n_samples, len(self.spec)), dtype=float)
        codes = np.zeros(n_samples if track else 0, dtype=np.int64)
        theta = np.asarray(theta, dtype=float)
        W = np.ascontiguousarray(self.X @ theta)
        dtheta = np.ascontiguousarray(theta[self.dterm]) if len(self.dterm) else np.zeros(0)
        self.accepted += _mh_chain(
            self.adj, self.deg, self.stats, self.joint, W, self.X, self.dterm, self.dthr, dtheta,
            int(burn), int(thin), int(n_samples), new_state(rng), track, out, codes,
        )
        self.proposals += burn + thin * n_samples
        return out, codes

    def graph(self) -> AttributedGraph:
        u, v = np.nonzero(np.triu(self.adj, 1))
        return self.nodes.with_edges(np.column_stack([u, v]))


def _n_dyads(n):
    return n * (n - 1) // 2


# --------------------------------------------------------------------------
# public operations


def ergm_statistics(g: AttributedGraph, spec: ErgmSpec) -> np.ndarray:
    return statistics(g, spec.terms).astype(float)


def ergm_change_statistics(g: AttributedGraph, spec: ErgmSpec, u: int, v: int) -> np.ndarray:
    """``f(g + uv) - f(g - uv)`` for every term, from degrees and labels only."""
    if u == v:
        raise ValueError("a dyad needs two distinct nodes")
    present = g.has_edge(u, v)
    deg = g.degree_array
    out = np.empty(len(spec))
    for k, s in enumerate(spec.terms):
        if s.kind == "edges":
            out[k] = 1.0
        elif s.kind == "min_degree":
            on_u = int(deg[u]) + (0 if present else 1)
            on_v = int(deg[v]) + (0 if present else 1)
            out[k] = int(on_u == s.d) + int(on_v == s.d)
        else:
            lab = g.attributes[s.attr]
            lu, lv = lab[u], lab[v]
            if s.kind == "nodematch":
                out[k] = float(lu == s.i and lv == s.i)
            elif s.kind == "total_nodematch":
                out[k] = float(lu == lv)
            elif s.kind == "nodefactor":
                out[k] = float(lu == s.i or lv == s.i)
            else:
                out[k] = float({lu, lv} == {s.i, s.j})
    return out


def sample_ergm(params: ErgmParams, spec: ErgmSpec, nodes: AttributedGraph, mcmc: McmcConfig | None = None,
                rng: np.random.Generator | None = None, initial: AttributedGraph | None = None) -> AttributedGraph:
    """Run the MH chain for burn-in plus chain length and return the final graph.

    ``nodes`` supplies the node set and attributes; its edges are ignored
    unless it is also passed as ``initial``.
    """
    rng = np.random.default_rng() if rng is None else rng
    burn, _, length = (mcmc or McmcConfig()).resolve(nodes.node_count)
    chain = _Chain(spec, nodes, initial)
    chain.run(params.theta, burn + length, 1, 0, rng)
    return chain.graph()


def sample_ergm_networks(params: ErgmParams, spec: ErgmSpec, nodes: AttributedGraph, rngs,
                         mcmc: McmcConfig | None = None, burn_rng: np.random.Generator | None = None,
                         initial: AttributedGraph | None = None) -> list[AttributedGraph]:
    """Several networks that share one burn-in.

    The chain is burned in once on ``burn_rng``; each network then continues
    the burned-in state for ``chain_length`` proposals on its own stream from
    ``rngs``, so networks can be drawn in any order.
    """
    burn_rng = np.random.default_rng() if burn_rng is None else burn_rng
    burn, _, length = (mcmc or McmcConfig()).resolve(nodes.node_count)
    base = _Chain(spec, nodes, initial)
    base.run(params.theta, burn, 1, 0, burn_rng)
    out = []
    for rng in rngs:
        chain = base.copy()
        chain.run(params.theta, length, 1, 0, rng)
        out.append(chain.graph())
    return out


def ergm_chain(params: ErgmParams, spec: ErgmSpec, nodes: AttributedGraph, n_samples: int,
               mcmc: McmcConfig | None = None, rng: np.random.Generator | None = None,
               return_codes: bool = False, initial: AttributedGraph | None = None):
    """Thinned statistic samples from one chain.

    With ``return_codes`` each sample also yields the upper-triangle
    adjacency as a bitmask (only for graphs with at most 62 dyads).
    """
    rng = np.random.default_rng() if rng is None else rng
    burn, thin, _ = (mcmc or McmcConfig()).resolve(nodes.node_count)
    chain = _Chain(spec, nodes, initial)
    stats, codes = chain.run(params.theta, burn, thin, n_samples, rng, track=return_codes)
    return (stats, codes) if return_codes else stats


def feasible_bounds(spec: ErgmSpec, nodes: AttributedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Combinatorial upper bounds for each term (lower bounds are zero)."""
    n = nodes.node_count
    dyads = _n_dyads(n)
    upper = np.empty(len(spec))
    for k, s in enumerate(spec.terms):
        if s.kind == "edges":
            upper[k] = dyads
        elif s.kind == "min_degree":
            upper[k] = n if s.d <= n - 1 else 0
        else:
            sizes = np.array(nodes.schema(s.attr).group_sizes, dtype=float)
            within = sizes * (sizes - 1) / 2
            if s.kind == "nodematch":
                upper[k] = within[s.i]
            elif s.kind == "total_nodematch":
                upper[k] = within.sum()
            elif s.kind == "nodefactor":
                upper[k] = within[s.i] + sizes[s.i] * (n - sizes[s.i])
            else:
                upper[k] = within[s.i] if s.i == s.j else sizes[s.i] * sizes[s.j]
    return np.zeros(len(spec)), upper


def clamp_targets(targets, spec: ErgmSpec, nodes: AttributedGraph):
    """Clamp targets into feasible ranges; returns (clamped, list of changes)."""
    raw = np.asarray(targets, dtype=float)
    if raw.shape != (len(spec),):
        raise ValueError(f"expected {len(spec)} targets, got shape {raw.shape}")
    lo, hi = feasible_bounds(spec, nodes)
    t = np.clip(raw, lo, hi)
    edges = t[spec.terms.index(Stat.edges())]
    for k, s in enumerate(spec.terms):
        if s.kind in DYAD_INDEPENDENT and s.kind != "edges":
            t[k] = min(t[k], edges)
        elif s.kind == "min_degree":
            t[k] = min(t[k], 2.0 * edges / s.d)
    changes = [
        {"term": str(s), "raw": float(r), "clamped": float(c)}
        for s, r, c in zip(spec.terms, raw, t)
        if r != c
    ]
    return t, changes


def _dyad_classes(spec: ErgmSpec, nodes: AttributedGraph):
    """Dyad counts and change-statistic rows for every unordered pair of joint labels."""
    names = list(nodes.categories)
    n = nodes.node_count
    lab = np.column_stack([nodes.attributes[a] for a in names]) if names else np.zeros((n, 1), dtype=np.int64)
    keys, counts = np.unique(lab, axis=0, return_counts=True)
    rows, weights = [], []
    for a in range(len(keys)):
        for b in range(a, len(keys)):
            w = counts[a] * counts[b] if a != b else counts[a] * (counts[a] - 1) // 2
            if w:
                rows.append(_pair_change(spec, names, keys[a], keys[b]))
                weights.append(w)
    return np.array(rows), np.array(weights, dtype=float)


def dyad_independent_fit(targets, spec: ErgmSpec, nodes: AttributedGraph, cap: float = THETA_CAP) -> np.ndarray:
    """Exact moment-matching solution for the dyad-independent terms.

    Degree-threshold terms are held at zero. For an edges-only spec this is
    ``logit(edges / dyads)``.
    """
    idx = [k for k, s in enumerate(spec.terms) if s.kind in DYAD_INDEPENDENT]
    theta = np.zeros(len(spec))
    X, w = _dyad_classes(spec, nodes)
    if not len(w):
        return theta
    X = X[:, idx]
    t = np.asarray(targets, dtype=float)[idx]

    def objective(beta):
        eta = X @ beta
        f = np.sum(w * np.logaddexp(0.0, eta)) - beta @ t
        p = 0.5 * (1.0 + np.tanh(0.5 * eta))
        return f, X.T @ (w * p) - t

    res = minimize(objective, np.zeros(len(idx)), jac=True, method="L-BFGS-B",
                   bounds=[(-cap, cap)] * len(idx), options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-10})
    theta[idx] = res.x
    return theta


def _batch_se(samples: np.ndarray, batches: int) -> np.ndarray:
    k = samples.shape[0] // batches
    if k < 1:
        return samples.std(axis=0, ddof=1) / math.sqrt(max(samples.shape[0], 1))
    means = samples[: k * batches].reshape(batches, k, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / math.sqrt(batches)


def _t_ratios(mean, target, se):
    diff = mean - target
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(np.abs(diff) < 1e-9, 0.0, np.inf * np.sign(diff)))
    return t


def fit_ergm(targets, spec: ErgmSpec, nodes: AttributedGraph, fit: FitConfig | None = None,
             mcmc: McmcConfig | None = None, rng: np.random.Generator | None = None) -> FitResult:
    """Find theta whose simulated mean statistics match ``targets``.

    Steps: clamp targets to feasible ranges; pin terms whose target sits on
    a bound of its range at the matching theta cap (the moment equation has
    no finite solution there); start from the exact dyad-independent
    solution; estimate per-term variances ``D``; run Robbins-Monro updates
    ``theta -= a * (f - target) / D`` along a single chain with
    geometrically decaying gain, averaging theta within each subphase.
    Finally check convergence on a fresh thinned sample; while the check
    fails, apply a Newton correction with the sample covariance and re-check,
    up to ``max_rounds`` checks.
    """
    fit = fit or FitConfig()
    rng = np.random.default_rng() if rng is None else rng
    n = nodes.node_count
    dyads = max(_n_dyads(n), 1)
    raw = np.asarray(targets, dtype=float)
    t, changes = clamp_targets(raw, spec, nodes)
    if changes:
        log.warning("clamped %d infeasible ERGM targets", len(changes))
    cap = fit.theta_cap
    burn, _, _ = (mcmc or McmcConfig()).resolve(n)
    step = max(1, int(round(fit.step_interval * dyads)))
    check = max(1, int(round(fit.check_interval * dyads)))

    lo, hi = feasible_bounds(spec, nodes)
    theta = dyad_independent_fit(t, spec, nodes, cap)
    low_pin = t <= lo
    high_pin = (t >= hi) & ~low_pin
    theta[low_pin] = -cap
    theta[high_pin] = cap
    free = ~(low_pin | high_pin)

    chain = _Chain(spec, nodes)
    sample, _ = chain.run(theta, burn, check, fit.variance_samples, rng)
    scale = np.maximum(sample.var(axis=0, ddof=1), fit.min_variance)

    iterations = 0
    gain = fit.gain
    if free.any():
        for phase in range(fit.subphases):
            n_iter = int(round(fit.subphase_iterations * fit.subphase_growth ** phase))
            acc = np.zeros_like(theta)
            for _ in range(n_iter):
                f, _ = chain.run(theta, 0, step, 1, rng)
                theta[free] = np.clip(theta[free] - gain * (f[0, free] - t[free]) / scale[free], -cap, cap)
                acc += theta
            iterations += n_iter
            theta = acc / n_iter
            gain *= fit.gain_decay

    settle = int(round(fit.check_burn * dyads))
    rounds = 0
    while True:
        sample, _ = chain.run(theta, settle if rounds else 0, check, fit.check_samples, rng)
        rounds += 1
        mean = sample.mean(axis=0)
        se = _batch_se(sample, fit.check_batches)
        tr = _t_ratios(mean, t, se)
        # a term held at the cap and still pushing outward cannot improve
        pinned = ((theta <= -cap + 1e-9) & (mean >= t)) | ((theta >= cap - 1e-9) & (mean <= t))
        ok = (np.abs(tr) <= fit.tolerance) | pinned
        if ok.all() or rounds >= fit.max_rounds:
            break
        move = np.zeros_like(theta)
        idx = np.flatnonzero(free & ~pinned)
        if len(idx):
            cov = np.atleast_2d(np.cov(sample[:, idx], rowvar=False))
            cov += np.diag(fit.damping * np.diag(cov) + 1e-6 * max(np.trace(cov), 1.0))
            move[idx] = np.linalg.lstsq(cov, mean[idx] - t[idx], rcond=1e-10)[0]
        longest = np.abs(move).max()
        if longest > 1.0:
            move /= longest
        theta = np.clip(theta - move, -cap, cap)

    return FitResult(
        params=ErgmParams(theta, cap),
        converged=bool(ok.all()),
        t_ratios=tr,
        simulated_mean=mean,
        standard_errors=se,
        targets=t,
        raw_targets=raw,
        clamped=changes,
        rounds=rounds,
        iterations=iterations,
        at_cap=[str(s) for s, p in zip(spec.terms, pinned) if p],
    )


def save_ergm(path, spec: ErgmSpec, params: ErgmParams, diagnostics: dict | None = None) -> None:
    doc = {"model": "ergm", "terms": spec.descriptors(), "theta": [float(x) for x in params.theta],
           "theta_cap": params.cap, "diagnostics": diagnostics or {}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_ergm(doc: dict) -> tuple[ErgmSpec, ErgmParams]:
    spec = ErgmSpec(tuple(doc["terms"]))
    return spec, ErgmParams(np.array(doc["theta"], dtype=float), doc.get("theta_cap", THETA_CAP))
