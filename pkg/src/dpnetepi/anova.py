"""Nested (hierarchical) analysis of variance for the release / network / simulation design.

Values ``y[i, j, k]`` are indexed by release ``i``, network ``j`` within the
release and simulation ``k`` on the network. The total sum of squares splits
exactly into a release term, a network-within-release term and the
simulation residual.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SOURCES = ("Release", "Network : Release", "Simulation : Network : Release")

__all__ = ["SOURCES", "SourceRow", "VarianceDecomposition", "nested_anova", "variance_decomposition"]


@dataclass(frozen=True)
class SourceRow:
    source: str
    df: int
    ss: float
    ms: float
    var_pct: float


@dataclass(frozen=True)
class VarianceDecomposition:
    rows: tuple[SourceRow, ...]
    ss_total: float
    grand_mean: float

    @property
    def ss(self) -> np.ndarray:
        return np.array([r.ss for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source", "df", "ss", "ms", "var_pct"])
            for r in self.rows:
                w.writerow([r.source, r.df, repr(r.ss), repr(r.ms), repr(r.var_pct)])


def nested_anova(y) -> VarianceDecomposition:
    """Decompose a balanced ``R x N x M`` array.

    Degrees of freedom are ``R - 1``, ``R (N - 1)`` and ``R N (M - 1)``; the
    percentage column is each source's share of the total sum of squares.
    A mean square with zero degrees of freedom is ``nan``.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 3 or min(y.shape) < 1:
        raise ValueError("expected a non-empty R x N x M array")
    if not np.all(np.isfinite(y)):
        raise ValueError("values must be finite")
    R, N, M = y.shape
    grand = y.mean()
    rel = y.mean(axis=(1, 2))
    net = y.mean(axis=2)
    ss_total = float(((y - grand) ** 2).sum())
    ss_r = float(N * M * ((rel - grand) ** 2).sum())
    ss_n = float(M * ((net - rel[:, None]) ** 2).sum())
    # the residual is summed directly; it equals ss_total - ss_r - ss_n
    ss_e = float(((y - net[:, :, None]) ** 2).sum())
    dfs = (R - 1, R * (N - 1), R * N * (M - 1))
    rows = []
    for name, df, ss in zip(SOURCES, dfs, (ss_r, ss_n, ss_e)):
        ms = ss / df if df > 0 else float("nan")
        pct = 100.0 * ss / ss_total if ss_total > 0 else 0.0
        rows.append(SourceRow(name, df, ss, ms, pct))
    return VarianceDecomposition(tuple(rows), ss_total, float(grand))


def variance_decomposition(rows, R: int, N: int, M: int) -> VarianceDecomposition:
    """Arrange result rows of one cell/metric/scenario/group and decompose them.

    Rows are placed by their ``release``, ``network`` and ``sim`` indices
    (a missing release index counts as release 0); the design must be
    balanced with exactly one value per index triple.
    """
    rows = list(rows)
    if len(rows) != R * N * M:
        raise ValueError(f"unbalanced input: {len(rows)} values for R={R}, N={N}, M={M}")
    y = np.full((R, N, M), np.nan)
    for r in rows:
        i = 0 if r.release is None else r.release
        j, k = r.network, r.sim
        if j is None or k is None or not (0 <= i < R and 0 <= j < N and 0 <= k < M):
            raise ValueError(f"row index ({r.release}, {r.network}, {r.sim}) outside the design")
        if not np.isnan(y[i, j, k]):
            raise ValueError(f"duplicate value for ({i}, {j}, {k})")
        y[i, j, k] = r.value
    return nested_anova(y)
