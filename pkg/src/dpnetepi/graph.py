"""Attributed contact graphs and the exact network statistics computed on them.

Graphs are simple and undirected. Every node carries one category index per
declared attribute (e.g. ``age``, ``race``). Statistics are pure functions of
an :class:`AttributedGraph`.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "AttributeSchema",
    "AttributedGraph",
    "GraphFormatError",
    "Stat",
    "from_edges",
    "load_graph",
    "write_graph",
    "count_edges",
    "count_nodes_with_min_degree",
    "degrees",
    "mixing_matrix",
    "nodematch_per_group",
    "total_nodematch",
    "nodefactor",
    "degree_histogram",
    "statistic",
    "statistics",
    "quality_metrics",
]


class GraphFormatError(ValueError):
    """Raised when node or edge records cannot form a valid graph."""


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    categories: tuple[str, ...]
    group_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.categories:
            raise ValueError(f"attribute {self.name!r} has no categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"attribute {self.name!r} has duplicate categories")
        if self.group_sizes and len(self.group_sizes) != len(self.categories):
            raise ValueError(f"attribute {self.name!r}: group_sizes/categories length mismatch")

    @property
    def k(self) -> int:
        return len(self.categories)


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Immutable simple undirected graph with categorical node attributes.

    Parameters
    ----------
    node_count : int
        Nodes are ``0 .. node_count - 1``.
    edges : ndarray of shape (m, 2)
        Canonical edge array: ``u < v`` in every row, rows sorted
        lexicographically, no duplicates. Use :func:`from_edges` to build one
        from arbitrary pairs.
    attributes : mapping of str to ndarray of int
        Per-node category index for every attribute.
    categories : mapping of str to tuple of str
        Declared category labels per attribute (empty groups allowed).
    node_ids : tuple of str, optional
        Original identifiers, retained for output.
    """

    node_count: int
    edges: np.ndarray
    attributes: Mapping[str, np.ndarray]
    categories: Mapping[str, tuple[str, ...]]
    node_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = self.node_count
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] >= e[:, 1]):
                raise ValueError("edges must be canonical (u < v, no self-loops)")
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            keys = e[:, 0] * n + e[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise ValueError("edges must be sorted and unique")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        attrs = {}
        for name, cats in self.categories.items():
            if name not in self.attributes:
                raise ValueError(f"missing values for attribute {name!r}")
            a = np.asarray(self.attributes[name], dtype=np.int64)
            if a.shape != (n,):
                raise ValueError(f"attribute {name!r} must have one value per node")
            if n and (a.min() < 0 or a.max() >= len(cats)):
                raise ValueError(f"attribute {name!r} has category index out of range")
            a.setflags(write=False)
            attrs[name] = a
        extra = set(self.attributes) - set(self.categories)
        if extra:
            raise ValueError(f"attributes without declared categories: {sorted(extra)}")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "categories", {k: tuple(v) for k, v in self.categories.items()})
        if self.node_ids and len(self.node_ids) != n:
            raise ValueError("node_ids length must equal node_count")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def schema(self, attr: str) -> AttributeSchema:
        cats = self._categories_of(attr)
        sizes = np.bincount(self.attributes[attr], minlength=len(cats))
        return AttributeSchema(attr, cats, tuple(int(s) for s in sizes))

    def schemas(self) -> dict[str, AttributeSchema]:
        return {a: self.schema(a) for a in self.categories}

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self._cached("edge_set", lambda: {(int(u), int(v)) for u, v in self.edges}))

    @property
    def degree_array(self) -> np.ndarray:
        def build():
            d = np.bincount(self.edges.ravel(), minlength=self.node_count)
            d.setflags(write=False)
            return d
        return self._cached("degrees", build)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._cached("edge_set", lambda: {(int(a), int(b)) for a, b in self.edges})

    def _cached(self, key, build):
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = build()
        return cache[key]

    def with_edges(self, edges) -> "AttributedGraph":
        """Same nodes and attributes, different edge set."""
        return from_edges(self.node_count, edges, self.attributes, self.categories, self.node_ids)

    def _categories_of(self, attr: str) -> tuple[str, ...]:
        try:
            return self.categories[attr]
        except KeyError:
            raise KeyError(f"unknown attribute {attr!r}") from None

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edges, other.edges)
            and self.categories == other.categories
            and all(np.array_equal(self.attributes[a], other.attributes[a]) for a in self.categories)
        )

    __hash__ = None


def canonical_edges(edges, n: int | None = None) -> np.ndarray:
    """Return sorted unique ``u < v`` rows; rejects self-loops."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if np.any(e[:, 0] == e[:, 1]):
        raise ValueError("self-loops are not allowed")
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


def from_edges(n, edges, attributes=None, categories=None, node_ids=()) -> AttributedGraph:
    """Build a graph from arbitrary (possibly duplicated, reversed) pairs."""
    attributes = dict(attributes or {})
    if categories is None:
        categories = {
            a: tuple(str(c) for c in range(max(int(np.max(v, initial=0)) + 1, 1)))
            for a, v in attributes.items()
        }
    return AttributedGraph(int(n), canonical_edges(edges), attributes, dict(categories), tuple(node_ids))


# --------------------------------------------------------------------------
# CSV input/output


def _read_rows(path, label):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise GraphFormatError(f"{path}: empty {label} file (header required)") from None
        header = [h.strip() for h in header]
        rows = [(reader.line_num, row) for row in reader if row and any(c.strip() for c in row)]
    return header, rows


def load_graph(nodes_source, edges_source=None, categories: Mapping[str, Sequence[str]] | None = None) -> AttributedGraph:
    """Read a graph from a node CSV (``node_id,<attr>...``) and an edge CSV (``u,v``).

    Without ``edges_source`` the graph has no edges.

    Node ids are mapped to dense integers in file order. Attribute categories
    come from ``categories`` when given; otherwise they are the sorted distinct
    values found in the file.
    """
    header, rows = _read_rows(nodes_source, "node")
    if not header or header[0] != "node_id":
        raise GraphFormatError(f"{nodes_source}:1: node header must start with 'node_id'")
    attr_names = header[1:]
    if categories is not None:
        missing = [a for a in categories if a not in attr_names]
        if missing:
            raise GraphFormatError(f"{nodes_source}:1: missing attribute columns {missing}")
        attr_names = [a for a in attr_names if a in categories]
    cols = {a: header.index(a) for a in attr_names}

    index: dict[str, int] = {}
    raw: dict[str, list[str]] = {a: [] for a in attr_names}
    for line, row in rows:
        row = [c.strip() for c in row]
        nid = row[0]
        if nid in index:
            raise GraphFormatError(f"{nodes_source}:{line}: duplicate node id {nid!r}")
        for a, c in cols.items():
            if c >= len(row) or row[c] == "":
                raise GraphFormatError(f"{nodes_source}:{line}: missing value for attribute {a!r}")
            raw[a].append(row[c])
        index[nid] = len(index)

    cats = {}
    attrs = {}
    for a in attr_names:
        declared = tuple(categories[a]) if categories is not None else tuple(sorted(set(raw[a])))
        lookup = {c: i for i, c in enumerate(declared)}
        vals = np.empty(len(raw[a]), dtype=np.int64)
        for pos, v in enumerate(raw[a]):
            if v not in lookup:
                raise GraphFormatError(f"{nodes_source}:{rows[pos][0]}: unknown category {v!r} for {a!r}")
            vals[pos] = lookup[v]
        cats[a] = declared
        attrs[a] = vals

    if edges_source is None:
        return from_edges(len(index), [], attrs, cats, tuple(index))
    eheader, erows = _read_rows(edges_source, "edge")
    if eheader[:2] != ["u", "v"]:
        raise GraphFormatError(f"{edges_source}:1: edge header must be 'u,v'")
    pairs = []
    for line, row in erows:
        if len(row) < 2:
            raise GraphFormatError(f"{edges_source}:{line}: expected two endpoints")
        u, v = row[0].strip(), row[1].strip()
        for x in (u, v):
            if x not in index:
                raise GraphFormatError(f"{edges_source}:{line}: unknown endpoint id {x!r}")
        if u == v:
            raise GraphFormatError(f"{edges_source}:{line}: self-loop on {u!r}")
        pairs.append((index[u], index[v]))
    return from_edges(len(index), pairs, attrs, cats, tuple(index))


def write_graph(g: AttributedGraph, nodes_path, edges_path) -> None:
    ids = g.node_ids or tuple(str(i) for i in range(g.node_count))
    attrs = list(g.categories)
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", *attrs])
        for i in range(g.node_count):
            w.writerow([ids[i], *(g.categories[a][g.attributes[a][i]] for a in attrs)])
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v"])
        for u, v in g.edges:
            w.writerow([ids[u], ids[v]])


# --------------------------------------------------------------------------
# Statistics


def degrees(g: AttributedGraph) -> np.ndarray:
    return g.degree_array


def count_edges(g: AttributedGraph) -> int:
    return g.edge_count


def count_nodes_with_min_degree(g: AttributedGraph, d: int) -> int:
    if d < 1:
        raise ValueError("d must be >= 1")
    return int(np.count_nonzero(degrees(g) >= d))


def mixing_matrix(g: AttributedGraph, attr: str) -> np.ndarray:
    """Symmetric k x k edge counts between groups; within-group edges on the diagonal once."""
    k = len(g._categories_of(attr))
    lab = g.attributes[attr]
    m = np.zeros((k, k), dtype=np.int64)
    if g.edge_count:
        a, b = lab[g.edges[:, 0]], lab[g.edges[:, 1]]
        np.add.at(m, (a, b), 1)
        m = m + m.T - np.diag(np.diag(m))
    return m


def nodematch_per_group(g: AttributedGraph, attr: str) -> np.ndarray:
    return np.diag(mixing_matrix(g, attr)).copy()


def total_nodematch(g: AttributedGraph, attr: str) -> int:
    return int(np.trace(mixing_matrix(g, attr)))


def nodefactor(g: AttributedGraph, attr: str) -> np.ndarray:
    """Edges with at least one endpoint in each group (an edge inside a group counts once)."""
    m = mixing_matrix(g, attr)
    return m.sum(axis=1)


def degree_histogram(g: AttributedGraph) -> np.ndarray:
    return np.bincount(degrees(g), minlength=1)


_STAT_RE = re.compile(r"^(\w+)(?:\((.*)\))?$")


@dataclass(frozen=True, order=True)
class Stat:
    """A scalar network statistic.

    ``kind`` is one of ``edges``, ``min_degree`` (uses ``d``), ``mixing``
    (``attr``, ``i``, ``j``), ``nodematch`` (``attr``, ``i``),
    ``total_nodematch`` (``attr``) and ``nodefactor`` (``attr``, ``i``).
    The string form, e.g. ``nodefactor(race,1)``, round-trips via
    :meth:`parse`.
    """

    kind: str
    attr: str = ""
    i: int = -1
    j: int = -1
    d: int = 0

    KINDS = ("edges", "min_degree", "mixing", "nodematch", "total_nodematch", "nodefactor")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        needs_attr = self.kind in ("mixing", "nodematch", "total_nodematch", "nodefactor")
        if needs_attr and not self.attr:
            raise ValueError(f"{self.kind} needs an attribute")
        if self.kind == "min_degree" and self.d < 1:
            raise ValueError("min_degree needs d >= 1")
        if self.kind in ("nodematch", "nodefactor", "mixing") and self.i < 0:
            raise ValueError(f"{self.kind} needs a group index")
        if self.kind == "mixing":
            if self.j < 0:
                raise ValueError("mixing needs two group indices")
            if self.j < self.i:
                i, j = self.j, self.i
                object.__setattr__(self, "i", i)
                object.__setattr__(self, "j", j)

    @classmethod
    def edges(cls):
        return cls("edges")

    @classmethod
    def min_degree(cls, d):
        return cls("min_degree", d=int(d))

    @classmethod
    def mixing(cls, attr, i, j):
        return cls("mixing", attr, min(i, j), max(i, j))

    @classmethod
    def nodematch(cls, attr, i):
        return cls("nodematch", attr, int(i))

    @classmethod
    def total_nodematch(cls, attr):
        return cls("total_nodematch", attr)

    @classmethod
    def nodefactor(cls, attr, i):
        return cls("nodefactor", attr, int(i))

    def __str__(self):
        if self.kind == "edges":
            return "edges"
        if self.kind == "min_degree":
            return f"min_degree({self.d})"
        if self.kind == "total_nodematch":
            return f"total_nodematch({self.attr})"
        if self.kind == "mixing":
            return f"mixing({self.attr},{self.i},{self.j})"
        return f"{self.kind}({self.attr},{self.i})"

    @classmethod
    def parse(cls, text: str) -> "Stat":
        m = _STAT_RE.match(text.strip())
        if not m:
            raise ValueError(f"cannot parse statistic {text!r}")
        kind, args = m.group(1), m.group(2)
        parts = [p.strip() for p in args.split(",")] if args else []
        try:
            if kind == "edges" and not parts:
                return cls.edges()
            if kind == "min_degree" and len(parts) == 1:
                return cls.min_degree(int(parts[0]))
            if kind == "total_nodematch" and len(parts) == 1:
                return cls.total_nodematch(parts[0])
            if kind in ("nodematch", "nodefactor") and len(parts) == 2:
                return cls(kind, parts[0], int(parts[1]))
            if kind == "mixing" and len(parts) == 3:
                return cls.mixing(parts[0], int(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ValueError(f"cannot parse statistic {text!r}: {exc}") from None
        raise ValueError(f"cannot parse statistic {text!r}")


def statistic(g: AttributedGraph, stat: Stat) -> int:
    return int(statistics(g, [stat])[0])


def statistics(g: AttributedGraph, stats: Iterable[Stat]) -> np.ndarray:
    """Exact integer values of ``stats`` on ``g``, sharing intermediate tallies."""
    stats = list(stats)
    out = np.empty(len(stats), dtype=np.int64)
    cache: dict = {}

    def mm(attr):
        if attr not in cache:
            cache[attr] = mixing_matrix(g, attr)
        return cache[attr]

    deg = None
    for pos, s in enumerate(stats):
        if s.kind == "edges":
            out[pos] = g.edge_count
        elif s.kind == "min_degree":
            if deg is None:
                deg = degrees(g)
            out[pos] = np.count_nonzero(deg >= s.d)
        else:
            m = mm(s.attr)
            if max(s.i, s.j) >= m.shape[0]:
                raise KeyError(f"group index out of range in {s}")
            if s.kind == "mixing":
                out[pos] = m[s.i, s.j]
            elif s.kind == "nodematch":
                out[pos] = m[s.i, s.i]
            elif s.kind == "total_nodematch":
                out[pos] = np.trace(m)
            else:
                out[pos] = m[s.i].sum()
    return out


def quality_metrics(synthetic: AttributedGraph, observed: AttributedGraph, attrs: Sequence[str]) -> dict[str, float]:
    """Percent difference of synthetic from observed for edges, concurrency and homophily.

    Keys are ``edges``, ``concurrent`` (nodes with degree >= 2) and
    ``nodematch_<attr>``. A metric whose observed value is zero is ``nan``.
    """
    if synthetic.node_count != observed.node_count:
        raise ValueError("graphs must have the same node count")
    for a in attrs:
        if synthetic.categories.get(a) != observed.categories.get(a):
            raise ValueError(f"schema mismatch for attribute {a!r}")
    stats = [Stat.edges(), Stat.min_degree(2), *(Stat.total_nodematch(a) for a in attrs)]
    names = ["edges", "concurrent", *(f"nodematch_{a}" for a in attrs)]
    s = statistics(synthetic, stats).astype(float)
    o = statistics(observed, stats).astype(float)
    out = {}
    for name, sv, ov in zip(names, s, o):
        out[name] = 100.0 * (sv - ov) / ov if ov != 0 else float("nan")
    return out
