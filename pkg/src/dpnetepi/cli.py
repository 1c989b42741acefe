"""Command-line entry point: every pipeline stage as a file-in/file-out command.

Exit status is 0 on success, 2 for usage errors and 1 for domain errors
(invalid inputs, infeasible configurations, unreadable files).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import anova as anova_mod
from . import epidemic
from .experiment import (
    PLOT_KINDS,
    ExperimentPlan,
    ObservedConfig,
    desk_observed,
    export_plot_data,
    export_results,
    generate_observed_network,
    parse_results,
    run_experiment,
)
from .graph import (
    GraphFormatError,
    Stat,
    degree_histogram,
    load_graph,
    mixing_matrix,
    nodefactor,
    nodematch_per_group,
    statistics,
    write_graph,
)
from .models.ergm import ErgmSpec, FitConfig, McmcConfig, fit_ergm, load_ergm, sample_ergm, save_ergm
from .models.sbm import SbmParams, fit_sbm, matrix_from_values, mixing_stats, sample_sbm
from .release import PrivateRelease, ReleaseSpec, format_epsilon, parse_epsilon, release_statistics

RESULTS_DIR_ENV = "DPNETEPI_RESULTS_DIR"


class DomainError(Exception):
    pass


def _out(path: str) -> Path:
    """Resolve an output path; relative paths go under the results directory when set."""
    p = Path(path)
    base = os.environ.get(RESULTS_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _epsilon(text: str) -> float:
    try:
        eps = parse_epsilon(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid epsilon {text!r}; use a positive number or 'inf'") from None
    if math.isnan(eps) or eps <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive or 'inf'")
    return eps


def _load_schema(path):
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return {k: tuple(v) for k, v in json.load(fh).items()}


def _graph(args):
    return load_graph(args.nodes, args.edges, _load_schema(args.schema))


def _nodes_only(args):
    """Node set and attributes only; the model supplies the edges."""
    return load_graph(args.nodes, None, _load_schema(args.schema))


def _preset_stats(name: str, g) -> list[Stat]:
    if name == "ergm":
        return list(ErgmSpec.standard(g.categories).terms)
    if name.startswith("sbm"):
        attr = name.split(":", 1)[1] if ":" in name else "age"
        if attr not in g.categories:
            raise DomainError(f"unknown attribute {attr!r}")
        return mixing_stats(attr, len(g.categories[attr]))
    return [Stat.parse(s.strip()) for s in name.split(";") if s.strip()]


# --------------------------------------------------------------------------
# commands


def cmd_generate(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = ObservedConfig.from_dict(json.load(fh))
    else:
        cfg = desk_observed(args.node_count)
    g = generate_observed_network(cfg, np.random.default_rng(args.seed))
    write_graph(g, _out(args.out_nodes), _out(args.out_edges))
    print(f"generated {g.node_count} nodes, {g.edge_count} edges")


def cmd_stats(args):
    g = _graph(args)
    doc = {"nodes": g.node_count, "edges": g.edge_count,
           "degree_histogram": degree_histogram(g).tolist(),
           "min_degree": {str(d): int((g.degree_array >= d).sum()) for d in (1, 2, 3, 4)}}
    for a in g.categories:
        doc[a] = {
            "categories": list(g.categories[a]),
            "mixing_matrix": mixing_matrix(g, a).tolist(),
            "nodematch": nodematch_per_group(g, a).tolist(),
            "total_nodematch": int(np.trace(mixing_matrix(g, a))),
            "nodefactor": nodefactor(g, a).tolist(),
        }
    print(json.dumps(doc, indent=2))


def cmd_release(args):
    g = _graph(args)
    stats = _preset_stats(args.stats, g)
    spec = ReleaseSpec(tuple(stats), args.epsilon, args.delta_cap)
    rel = release_statistics(g, spec, np.random.default_rng(args.seed), seed=args.seed, timestamp=args.timestamp)
    _out(args.out).write_text(rel.to_json() + "\n", encoding="utf-8")
    print(f"released {len(stats)} statistics at epsilon={format_epsilon(spec.epsilon)}, delta={spec.delta_cap}")


def _targets(args, nodes, stats):
    """Target values aligned with ``stats`` from a release file or the exact graph."""
    if args.release:
        with open(args.release, encoding="utf-8") as fh:
            rel = PrivateRelease.from_json(fh.read())
        missing = [str(s) for s in stats if s not in rel.statistics]
        if missing:
            raise DomainError(f"release lacks statistics {missing}")
        return np.array([rel.value(s) for s in stats])
    if not args.edges:
        raise DomainError("fit needs --release or an --edges file for exact statistics")
    return statistics(_graph(args), stats).astype(float)


def cmd_fit(args):
    nodes = _nodes_only(args)
    if args.model == "sbm":
        if args.attr not in nodes.categories:
            raise DomainError(f"unknown attribute {args.attr!r}")
        k = len(nodes.categories[args.attr])
        stats = mixing_stats(args.attr, k)
        values = _targets(args, nodes, stats)
        params = fit_sbm(matrix_from_values(stats, values, k), nodes.schema(args.attr))
        params.save(_out(args.out), {"targets": values.tolist()})
        print(f"fitted SBM on {args.attr}")
        return
    spec = ErgmSpec(tuple(args.terms.split(";"))) if args.terms else ErgmSpec.standard(nodes.categories)
    targets = _targets(args, nodes, list(spec.terms))
    res = fit_ergm(targets, spec, nodes, FitConfig(), McmcConfig(), np.random.default_rng(args.seed))
    save_ergm(_out(args.out), spec, res.params, res.diagnostics())
    print(f"fitted ERGM ({'converged' if res.converged else 'not converged'})")


def cmd_sample(args):
    nodes = _nodes_only(args)
    with open(args.model, encoding="utf-8") as fh:
        doc = json.load(fh)
    rng = np.random.default_rng(args.seed)
    if doc.get("model") == "sbm":
        g = sample_sbm(SbmParams.from_dict(doc), nodes, rng)
    elif doc.get("model") == "ergm":
        spec, params = load_ergm(doc)
        g = sample_ergm(params, spec, nodes, McmcConfig(), rng)
    else:
        raise DomainError("model file must describe an 'sbm' or 'ergm'")
    write_graph(g, _out(args.out_nodes), _out(args.out_edges))
    print(f"sampled {g.edge_count} edges")


def cmd_simulate(args):
    g = _graph(args)
    base = {"high": epidemic.HIGH, "low": epidemic.LOW}[args.setting]
    overrides = {k: getattr(args, k) for k in ("p_inf", "p_recov", "burn_in", "analytic_window") if getattr(args, k) is not None}
    cfg = replace(base, scenario=args.scenario, **overrides)
    traj = epidemic.run_sis(g, cfg, np.random.default_rng(args.seed))
    if args.trajectory:
        traj.write_csv(_out(args.trajectory))
    s = epidemic.summarize(traj, cfg)
    if args.summary:
        with open(_out(args.summary), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scenario", "metric", "group", "value"])
            labels = ["ALL", *(f"{a}={c}" for a, c in s.groups)]
            for metric, pop, grp in (("prevalence", s.prevalence, s.group_prevalence),
                                     ("incidence", s.incidence, s.group_incidence)):
                for label, v in zip(labels, (pop, *grp)):
                    w.writerow([cfg.scenario, metric, label, repr(float(v))])
    print(f"mean prevalence {s.prevalence:.4f}, mean incidence {s.incidence:.4f}")


def cmd_experiment(args):
    plan = replace(ExperimentPlan.load(args.plan), master_seed=args.seed)
    res = run_experiment(plan, jobs=args.jobs)
    export_results(res.rows, _out(args.out))
    if args.diagnostics:
        doc = {"simulations": res.simulations, "conservation_violations": res.conservation_violations,
               "max_treatment": res.max_treatment, "fits": res.fits}
        _out(args.diagnostics).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(res.rows)} rows")


def _cell_rows(rows, args):
    eps = None if args.epsilon is None else parse_epsilon(args.epsilon)
    out = []
    for r in rows:
        if r.model != args.model or r.condition != args.condition:
            continue
        if eps is not None and (r.epsilon is None or r.epsilon != eps):
            continue
        if args.delta is not None and r.delta != args.delta:
            continue
        if r.scenario != args.scenario or r.metric != args.metric or r.group != args.group:
            continue
        out.append(r)
    return out


def cmd_anova(args):
    rows = _cell_rows(parse_results(args.results), args)
    if not rows:
        raise DomainError("no rows match the cell filter")
    if any(r.sim is None for r in rows):
        raise DomainError("the selected metric is not recorded per simulation")
    R = max(0 if r.release is None else r.release for r in rows) + 1
    N = max(r.network for r in rows) + 1
    M = max(r.sim for r in rows) + 1
    table = anova_mod.variance_decomposition(rows, R, N, M)
    table.write_csv(_out(args.out))
    for row in table.rows:
        print(f"{row.source:32s} df={row.df:<6d} ss={row.ss:.6g} var%={row.var_pct:.2f}")


def cmd_plotdata(args):
    rows = parse_results(args.results)
    kinds = PLOT_KINDS if args.kind == "all" else (args.kind,)
    for kind in kinds:
        path = _out(args.out) / f"{kind}.csv" if args.kind == "all" else _out(args.out)
        if args.kind == "all":
            path.parent.mkdir(parents=True, exist_ok=True)
        export_plot_data(rows, kind, path)
        print(f"wrote {path}")


# --------------------------------------------------------------------------
# parser


def _graph_args(p, edges_required=True):
    p.add_argument("--nodes", required=True, help="node CSV (node_id,<attributes>)")
    p.add_argument("--edges", required=edges_required, help="edge CSV (u,v)")
    p.add_argument("--schema", help="JSON mapping attribute -> ordered category list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpnetepi", description="Private network statistics, network models and SIS epidemics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a ground-truth network")
    p.add_argument("--config", help="generator JSON (node_count, attributes, model); default: desk network")
    p.add_argument("--node-count", type=int, default=1000, help="node count of the default desk network")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-nodes", required=True)
    p.add_argument("--out-edges", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="print exact statistics of a graph as JSON")
    _graph_args(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("release", help="node-DP release of graph statistics")
    _graph_args(p)
    p.add_argument("--epsilon", type=_epsilon, required=True, help="privacy budget, or 'inf' for no noise")
    p.add_argument("--delta-cap", type=int, required=True, help="truncation degree")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stats", default="ergm",
                   help="'ergm' (standard ERGM terms), 'sbm[:attr]' (mixing matrix) or ';'-separated descriptors")
    p.add_argument("--timestamp", action="store_true", help="record the release time")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_release)

    p = sub.add_parser("fit", help="fit an SBM or ERGM to released or exact statistics")
    _graph_args(p, edges_required=False)
    p.add_argument("--model", choices=("sbm", "ergm"), required=True)
    p.add_argument("--release", help="release JSON; without it the exact statistics of --edges are used")
    p.add_argument("--attr", default="age", help="SBM block attribute")
    p.add_argument("--terms", help="';'-separated ERGM terms (default: standard terms)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="sample a synthetic network from a fitted model")
    _graph_args(p, edges_required=False)
    p.add_argument("--model", required=True, help="model JSON written by 'fit'")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-nodes", required=True)
    p.add_argument("--out-edges", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="run one SIS scenario")
    _graph_args(p)
    p.add_argument("--setting", choices=("high", "low"), default="high")
    p.add_argument("--scenario", choices=(epidemic.BASELINE, epidemic.TEST_AND_TREAT), default=epidemic.BASELINE)
    p.add_argument("--p-inf", type=float)
    p.add_argument("--p-recov", type=float)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--analytic-window", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trajectory", help="per-step CSV output")
    p.add_argument("--summary", help="analytic-window means CSV output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a full experiment plan")
    p.add_argument("--plan", required=True, help="plan JSON")
    p.add_argument("--seed", type=int, required=True, help="master seed (overrides the plan's)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--diagnostics", help="optional JSON with fit and simulation diagnostics")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("anova", help="nested variance decomposition of one results cell")
    p.add_argument("--results", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--condition", default="DP")
    p.add_argument("--epsilon")
    p.add_argument("--delta", type=int)
    p.add_argument("--scenario", default="high/baseline")
    p.add_argument("--metric", default="prevalence")
    p.add_argument("--group", default="ALL")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("plotdata", help="figure-ready tidy CSVs")
    p.add_argument("--results", required=True)
    p.add_argument("--kind", choices=(*PLOT_KINDS, "all"), default="all")
    p.add_argument("--out", required=True, help="output CSV, or a directory with --kind all")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        args.func(args)
    except (DomainError, GraphFormatError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"dpnetepi {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
