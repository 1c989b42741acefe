import numpy as np
import pytest

from dpnetepi import from_edges
from oracles import FIG3_CATEGORIES, FIG3_EDGES, FIG3_NODES, FIG3_SHAPES


@pytest.fixture
def fig3():
    index = {v: i for i, v in enumerate(FIG3_NODES)}
    shape = [FIG3_CATEGORIES.index(s) for s in FIG3_SHAPES]
    return from_edges(
        len(FIG3_NODES),
        [(index[u], index[v]) for u, v in FIG3_EDGES],
        {"shape": shape},
        {"shape": FIG3_CATEGORIES},
        FIG3_NODES,
    )


def random_graph(rng, n, p, k=(3,), names=("a",)):
    """Erdos-Renyi graph with uniform random categorical attributes."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    attrs = {name: rng.integers(0, kk, n) for name, kk in zip(names, k)}
    cats = {name: tuple(f"{name}{c}" for c in range(kk)) for name, kk in zip(names, k)}
    return from_edges(n, np.column_stack([iu[keep], ju[keep]]), attrs, cats)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Store and print one acceptance line; the test then asserts ``ok``."""
    line = f"criterion {criterion:>3}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
