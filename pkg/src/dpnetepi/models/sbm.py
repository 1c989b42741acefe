"""Stochastic block models parameterised by a (noisy) mixing matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..graph import AttributedGraph, AttributeSchema, Stat

__all__ = ["SbmParams", "pair_counts", "fit_sbm", "sample_sbm", "mixing_stats", "matrix_from_values"]


@dataclass(frozen=True, eq=False)
class SbmParams:
    attr: str
    edge_prob: np.ndarray

    def __post_init__(self):
        p = np.array(self.edge_prob, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("edge_prob must be square")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if not np.allclose(p, p.T, rtol=0, atol=0):
            raise ValueError("edge_prob must be symmetric")
        p.setflags(write=False)
        object.__setattr__(self, "edge_prob", p)

    def to_dict(self) -> dict:
        return {"model": "sbm", "attr": self.attr, "edge_prob": self.edge_prob.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SbmParams":
        return cls(d["attr"], np.array(d["edge_prob"], dtype=float))

    def save(self, path, diagnostics=None):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({**self.to_dict(), "diagnostics": diagnostics or {}}, fh, indent=2)


def pair_counts(group_sizes) -> np.ndarray:
    """Number of vertex pairs per block: ``n_i * n_j`` off the diagonal, ``C(n_i, 2)`` on it."""
    n = np.asarray(group_sizes, dtype=float)
    out = np.outer(n, n)
    np.fill_diagonal(out, n * (n - 1) / 2)
    return out


def mixing_stats(attr: str, k: int) -> list[Stat]:
    """Upper-triangle mixing-matrix entries, the scalars released for an SBM."""
    return [Stat.mixing(attr, i, j) for i in range(k) for j in range(i, k)]


def matrix_from_values(stats, values, k) -> np.ndarray:
    m = np.zeros((k, k))
    for s, v in zip(stats, values):
        m[s.i, s.j] = m[s.j, s.i] = v
    return m


def fit_sbm(noisy_mixing_matrix, schema: AttributeSchema) -> SbmParams:
    m = np.asarray(noisy_mixing_matrix, dtype=float)
    k = schema.k
    if m.shape != (k, k):
        raise ValueError(f"mixing matrix shape {m.shape} does not match {k} groups of {schema.name!r}")
    if not np.array_equal(m, m.T):
        raise ValueError("mixing matrix must be symmetric")
    if np.any(m < 0):
        raise ValueError("mixing matrix entries must be non-negative")
    pairs = pair_counts(schema.group_sizes)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(pairs > 0, m / np.where(pairs > 0, pairs, 1.0), 0.0)
    return SbmParams(schema.name, np.clip(p, 0.0, 1.0))


def _pairs_from_index(idx, n_a):
    """Map linear indices over the strict upper triangle of an ``n_a x n_a`` block to (row, col)."""
    idx = np.asarray(idx, dtype=np.int64)
    # row r starts at offset r*n_a - r*(r+1)/2
    r = np.floor((2 * n_a - 1 - np.sqrt((2 * n_a - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    start = r * n_a - r * (r + 1) // 2
    # guard against floating-point rounding at row boundaries
    over = idx < start
    r[over] -= 1
    start = r * n_a - r * (r + 1) // 2
    nxt = (r + 1) * n_a - (r + 1) * (r + 2) // 2
    under = idx >= nxt
    r[under] += 1
    start = r * n_a - r * (r + 1) // 2
    c = idx - start + r + 1
    return r, c


def sample_sbm(params: SbmParams, nodes: AttributedGraph, rng: np.random.Generator) -> AttributedGraph:
    """Independent Bernoulli edges with probability ``P[g(u), g(v)]``.

    Per block the edge count is drawn from its binomial law and that many
    distinct pairs are chosen uniformly, which is equivalent to one
    Bernoulli draw per pair.
    """
    lab = nodes.attributes[params.attr]
    k = params.edge_prob.shape[0]
    if k != len(nodes.categories[params.attr]):
        raise ValueError("edge_prob size does not match the attribute's categories")
    members = [np.flatnonzero(lab == i) for i in range(k)]
    chunks = []
    for i in range(k):
        for j in range(i, k):
            p = params.edge_prob[i, j]
            a, b = members[i], members[j]
            total = len(a) * (len(a) - 1) // 2 if i == j else len(a) * len(b)
            if total == 0 or p == 0:
                continue
            count = rng.binomial(total, p)
            if count == 0:
                continue
            idx = np.arange(total) if count == total else rng.choice(total, size=count, replace=False)
            if i == j:
                r, c = _pairs_from_index(idx, len(a))
                chunks.append(np.column_stack([a[r], a[c]]))
            else:
                chunks.append(np.column_stack([a[idx // len(b)], b[idx % len(b)]]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return nodes.with_edges(edges)
