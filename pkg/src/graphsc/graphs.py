"""Finite weighted graphs with killing term and vertex measure.

A graph here is a triple (b, c, m) over a finite vertex set: symmetric
nonnegative edge weights ``b``, a per-vertex killing weight ``c >= 0``
(absorption inside the graph, an edge "to infinity"), and a positive vertex
measure ``m``.  Vertices are arbitrary hashable ids; families of infinite
graphs reuse these ids across nested finite sections.

This module owns validation, connectivity, outer boundaries and the Dirichlet
restriction to a subset (cut edges folded into the killing term).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

import math

from .errors import InputError

Vertex = Hashable


def tag_sort_key(tag):
    """Stable ordering over mixed-type vertex ids (ints, strings, tuples)."""
    if isinstance(tag, tuple):
        return (2, tuple(tag_sort_key(t) for t in tag))
    if isinstance(tag, bool):
        return (1, str(tag))
    if isinstance(tag, (int, float)):
        return (0, tag)
    return (1, str(tag))


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    message: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, where: tuple, message: str) -> None:
        self.violations.append(Violation(kind, where, message))

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"kind": v.kind, "where": [repr(w) for w in v.where], "message": v.message}
                for v in self.violations
            ],
        }


class GraphSpec:
    """Immutable finite weighted graph (vertices, b, c, m).

    ``b`` is stored as a mapping of ordered pairs so that invalid (asymmetric)
    data can be represented and diagnosed; use :func:`graph_spec` to build a
    symmetrized spec from an undirected edge list.  ``c`` defaults to 0 and
    ``m`` to 1 on unspecified vertices.
    """

    __slots__ = ("vertices", "b", "c", "m", "_index", "_adj", "_row_sums", "_report")

    def __init__(
        self,
        vertices: Iterable[Vertex],
        b: Mapping[Tuple[Vertex, Vertex], float],
        c: Mapping[Vertex, float] | None = None,
        m: Mapping[Vertex, float] | None = None,
    ):
        vs = tuple(vertices)
        if len(set(vs)) != len(vs):
            raise InputError("duplicate vertex ids")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "b", {k: float(v) for k, v in dict(b).items()})
        cc = {x: 0.0 for x in vs}
        if c:
            for x, v in c.items():
                cc[x] = float(v)
        mm = {x: 1.0 for x in vs}
        if m:
            for x, v in m.items():
                mm[x] = float(v)
        object.__setattr__(self, "c", cc)
        object.__setattr__(self, "m", mm)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(vs)})
        object.__setattr__(self, "_adj", None)
        object.__setattr__(self, "_row_sums", None)
        object.__setattr__(self, "_report", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("GraphSpec is immutable")

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, x: Vertex) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise InputError(f"unknown vertex {x!r}") from None

    def __contains__(self, x: Vertex) -> bool:
        return x in self._index

    # -- validation ------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check the graph axioms; never raises, reports every violation."""
        if self._report is not None:
            return self._report
        rep = ValidationReport()
        known = self._index
        seen_pairs = set()
        for (x, y), w in self.b.items():
            if x not in known or y not in known:
                rep.add("unknown-vertex", (x, y), f"edge ({x!r},{y!r}) has endpoint outside vertex set")
                continue
            if not math.isfinite(w):
                rep.add("nonfinite", (x, y), f"edge weight b({x!r},{y!r}) is not finite")
                continue
            if x == y:
                if w != 0.0:
                    rep.add("diagonal", (x,), f"b({x!r},{x!r}) = {w} must be 0")
                continue
            if w < 0.0:
                rep.add("negative-weight", (x, y), f"b({x!r},{y!r}) = {w} < 0")
            key = (x, y) if tag_sort_key(x) <= tag_sort_key(y) else (y, x)
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            w_rev = self.b.get((y, x))
            if w_rev is None:
                if w != 0.0:
                    rep.add("asymmetry", (x, y), f"(b1) asymmetry at ({x!r},{y!r}): reverse entry missing")
            elif w_rev != w:
                rep.add("asymmetry", (x, y), f"(b1) asymmetry at ({x!r},{y!r}): {w} != {w_rev}")
        for x in self.vertices:
            cv = self.c[x]
            if not math.isfinite(cv):
                rep.add("nonfinite", (x,), f"killing c({x!r}) is not finite")
            elif cv < 0.0:
                rep.add("negative-killing", (x,), f"killing c({x!r}) = {cv} < 0")
            mv = self.m[x]
            if not math.isfinite(mv):
                rep.add("nonfinite", (x,), f"measure m({x!r}) is not finite")
            elif mv <= 0.0:
                rep.add("measure-not-positive", (x,), f"measure not of full support at {x!r}: m = {mv}")
        object.__setattr__(self, "_report", rep)
        return rep

    def require_valid(self) -> "GraphSpec":
        rep = self.validate()
        if not rep.ok:
            first = rep.violations[0]
            raise InputError(f"invalid graph spec ({len(rep.violations)} violations; first: {first.message})")
        return self

    # -- derived structure -------------------------------------------------

    def _build_adj(self):
        adj: Dict[Vertex, list] = {x: [] for x in self.vertices}
        seen = set()
        for (x, y), w in self.b.items():
            if x == y or w == 0.0 or x not in self._index or y not in self._index:
                continue
            key = (x, y) if tag_sort_key(x) <= tag_sort_key(y) else (y, x)
            if key in seen:
                continue
            seen.add(key)
            adj[x].append((y, w))
            adj[y].append((x, w))
        frozen = {x: tuple(sorted(ns, key=lambda p: tag_sort_key(p[0]))) for x, ns in adj.items()}
        object.__setattr__(self, "_adj", frozen)
        object.__setattr__(self, "_row_sums", {x: math.fsum(w for _, w in frozen[x]) for x in self.vertices})

    def neighbors(self, x: Vertex) -> Tuple[Tuple[Vertex, float], ...]:
        if self._adj is None:
            self._build_adj()
        try:
            return self._adj[x]
        except KeyError:
            raise InputError(f"unknown vertex {x!r}") from None

    def row_sum(self, x: Vertex) -> float:
        """Cached total edge weight at ``x`` (finite by construction)."""
        if self._row_sums is None:
            self._build_adj()
        return self._row_sums[x]

    def weighted_degree(self, x: Vertex) -> float:
        """(sum_y b(x,y) + c(x)) / m(x): the holding rate of the process."""
        return (self.row_sum(x) + self.c[x]) / self.m[x]

    def sup_weighted_degree(self) -> float:
        return max(self.weighted_degree(x) for x in self.vertices) if self.vertices else 0.0


def graph_spec(
    vertices: Iterable[Vertex],
    edges: Mapping[Tuple[Vertex, Vertex], float] | Iterable[Tuple[Vertex, Vertex, float]],
    c: Mapping[Vertex, float] | None = None,
    m: Mapping[Vertex, float] | None = None,
) -> GraphSpec:
    """Build a GraphSpec from an undirected edge list, storing both orientations."""
    b: Dict[Tuple[Vertex, Vertex], float] = {}
    items = edges.items() if isinstance(edges, Mapping) else ((x, y, w) for x, y, w in edges)
    if isinstance(edges, Mapping):
        items = ((x, y, w) for (x, y), w in edges.items())
    for x, y, w in items:
        b[(x, y)] = float(w)
        b[(y, x)] = float(w)
    return GraphSpec(vertices, b, c=c, m=m)


def connected_components(spec: GraphSpec) -> List[List[Vertex]]:
    """Partition vertices into components of the relation b(x,y) > 0."""
    spec.require_valid()
    seen = set()
    comps: List[List[Vertex]] = []
    for start in spec.vertices:
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y, _ in spec.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def outer_boundary(spec: GraphSpec, W: Iterable[Vertex]) -> List[Vertex]:
    """Vertices outside W with at least one neighbor in W."""
    Wset = set(W)
    for x in Wset:
        if x not in spec:
            raise InputError(f"W contains unknown vertex {x!r}")
    out = []
    for x in spec.vertices:
        if x in Wset:
            continue
        if any(y in Wset for y, _ in spec.neighbors(x)):
            out.append(x)
    return out


@dataclass(frozen=True)
class SubgraphData:
    """Dirichlet restriction to W: cut edges folded into the killing term."""

    spec: GraphSpec
    deficiency: Dict[Vertex, float]
    W: Tuple[Vertex, ...]


def dirichlet_subgraph(spec: GraphSpec, W: Iterable[Vertex]) -> SubgraphData:
    """Restrict to W with Dirichlet boundary: c' = c + d_W, d_W(x) = sum of cut edges at x.

    For W equal to the whole vertex set the result coincides with the input
    (d_W is identically zero).
    """
    spec.require_valid()
    Wset = set(W)
    if not Wset:
        raise InputError("W must be nonempty")
    order = [x for x in spec.vertices if x in Wset]
    if len(order) != len(Wset):
        raise InputError("W is not a subset of the vertex set")
    d: Dict[Vertex, float] = {}
    b: Dict[Tuple[Vertex, Vertex], float] = {}
    for x in order:
        cut = 0.0
        for y, w in spec.neighbors(x):
            if y in Wset:
                b[(x, y)] = w
            else:
                cut += w
        d[x] = cut
    sub = GraphSpec(
        order,
        b,
        c={x: spec.c[x] + d[x] for x in order},
        m={x: spec.m[x] for x in order},
    )
    return SubgraphData(spec=sub, deficiency=d, W=tuple(order))
