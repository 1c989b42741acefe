import json
import subprocess
import sys

import pytest

from dpnetepi import ExperimentPlan, SimConfig, load_graph, mixing_matrix
from dpnetepi.cli import main
from dpnetepi.experiment import desk_observed


@pytest.fixture(scope="module")
def network(tmp_path_factory):
    d = tmp_path_factory.mktemp("net")
    assert main(["generate", "--node-count", "120", "--seed", "1", "--out-nodes", str(d / "n.csv"),
                 "--out-edges", str(d / "e.csv")]) == 0
    return d


def graph_args(d):
    return ["--nodes", str(d / "n.csv"), "--edges", str(d / "e.csv")]


def test_usage_errors_exit_2(network, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["release", *graph_args(network), "--epsilon", "1", "--delta-cap", "3", "--out", "x.json"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["release", *graph_args(network), "--epsilon", "-1", "--delta-cap", "3", "--seed", "0", "--out", "x.json"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_domain_errors_exit_1(network, tmp_path, capsys):
    assert main(["stats", "--nodes", str(tmp_path / "missing.csv"), "--edges", str(network / "e.csv")]) == 1
    (tmp_path / "loop.csv").write_text("u,v\n0,0\n")
    assert main(["stats", "--nodes", str(network / "n.csv"), "--edges", str(tmp_path / "loop.csv")]) == 1
    assert "self-loop" in capsys.readouterr().err
    assert main(["release", *graph_args(network), "--epsilon", "1", "--delta-cap", "0", "--seed", "0",
                 "--out", str(tmp_path / "r.json")]) == 1


def test_stats_and_infinite_release(network, tmp_path, capsys):
    assert main(["stats", *graph_args(network)]) == 0
    doc = json.loads(capsys.readouterr().out)
    g = load_graph(network / "n.csv", network / "e.csv")
    assert doc["edges"] == g.edge_count
    assert doc["age"]["mixing_matrix"] == mixing_matrix(g, "age").tolist()
    out = tmp_path / "r.json"
    assert main(["release", *graph_args(network), "--epsilon", "inf", "--delta-cap", "5", "--seed", "3",
                 "--stats", "sbm:age", "--out", str(out)]) == 0
    rel = json.loads(out.read_text())
    assert rel["epsilon"] == "inf" and rel["timestamp"] is None
    m = mixing_matrix(g, "age")
    assert rel["values"] == [float(m[i, j]) for i in range(5) for j in range(i, 5)]


def test_release_fit_sample_simulate(network, tmp_path):
    rel = tmp_path / "r.json"
    assert main(["release", *graph_args(network), "--epsilon", "5", "--delta-cap", "3", "--seed", "3",
                 "--stats", "sbm:age", "--out", str(rel)]) == 0
    model = tmp_path / "sbm.json"
    assert main(["fit", "--nodes", str(network / "n.csv"), "--model", "sbm", "--release", str(rel),
                 "--seed", "1", "--out", str(model)]) == 0
    assert json.loads(model.read_text())["model"] == "sbm"
    assert main(["sample", "--nodes", str(network / "n.csv"), "--model", str(model), "--seed", "2",
                 "--out-nodes", str(tmp_path / "sn.csv"), "--out-edges", str(tmp_path / "se.csv")]) == 0
    assert main(["simulate", "--nodes", str(tmp_path / "sn.csv"), "--edges", str(tmp_path / "se.csv"),
                 "--scenario", "test_and_treat", "--burn-in", "20", "--analytic-window", "5", "--seed", "4",
                 "--trajectory", str(tmp_path / "t.csv"), "--summary", str(tmp_path / "s.csv")]) == 0
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 1 + 25 * 2 * 9
    # a release without the requested statistics is a domain error
    assert main(["fit", "--nodes", str(network / "n.csv"), "--model", "ergm", "--release", str(rel),
                 "--seed", "1", "--out", str(tmp_path / "e.json")]) == 1


def test_ergm_fit_from_exact_statistics(network, tmp_path):
    model = tmp_path / "ergm.json"
    assert main(["fit", *graph_args(network), "--model", "ergm", "--terms", "edges;total_nodematch(race)",
                 "--seed", "1", "--out", str(model)]) == 0
    doc = json.loads(model.read_text())
    assert doc["terms"] == ["edges", "total_nodematch(race)"]
    assert doc["diagnostics"]["converged"]


def test_experiment_anova_plotdata(tmp_path, monkeypatch):
    plan = ExperimentPlan(model_families=("sbm",), epsilons=(2.0,), delta_caps=(3,), releases=2, networks=2,
                          sims=3, settings=(("high", SimConfig(0.75, burn_in=30, analytic_window=10)),),
                          observed=desk_observed(80))
    plan.save(tmp_path / "plan.json")
    monkeypatch.setenv("DPNETEPI_RESULTS_DIR", str(tmp_path / "out"))
    assert main(["experiment", "--plan", str(tmp_path / "plan.json"), "--seed", "5", "--out", "res.csv",
                 "--diagnostics", "diag.json"]) == 0
    results = tmp_path / "out" / "res.csv"
    assert results.exists()
    assert json.loads((tmp_path / "out" / "diag.json").read_text())["conservation_violations"] == 0
    assert main(["anova", "--results", str(results), "--model", "sbm", "--epsilon", "2.0", "--delta", "3",
                 "--out", "anova.csv"]) == 0
    lines = (tmp_path / "out" / "anova.csv").read_text().splitlines()
    assert [line.split(",")[:2] for line in lines[1:]] == [["Release", "1"], ["Network : Release", "2"],
                                                           ["Simulation : Network : Release", "8"]]
    assert main(["anova", "--results", str(results), "--model", "ergm", "--out", "x.csv"]) == 1
    assert main(["plotdata", "--results", str(results), "--out", "plots"]) == 0
    assert sorted(p.name for p in (tmp_path / "out" / "plots").iterdir()) == sorted(
        f"{k}.csv" for k in ("prevalence_ratio", "groups", "quality", "degree", "variance"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dpnetepi", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "experiment" in proc.stdout
