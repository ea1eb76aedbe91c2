"""Countable weighted-graph families given by closed-form rules.

A family produces nested finite sections K_1 <= K_2 <= ... whose union
exhausts the (possibly infinite) vertex set.  Weights are rules over
structured vertex tags, so sections of any size can be generated and the
edge deficiency d(x) = sum of weights leaving the section is computed
exactly, never estimated.

Tags: line templates use plain integers; attached half-lines ("rays") use
``("ray", anchor, copy, depth)``; pendant decorations use
``("dec", anchor, slot, depth)``; lumped ray representatives (solver-side
only) use ``("rays", anchor, depth)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import InputError
from .graphs import GraphSpec, Vertex, graph_spec, tag_sort_key

# ---------------------------------------------------------------------------
# declared tail metadata and structural hints


@dataclass(frozen=True)
class Ray:
    """A declared infinite simple path, used by diagnostics.

    ``tag_of(k)`` is the k-th vertex (k = 0 is the anchor).  The summability
    flag is *declared* template knowledge about sum_k m(tag_of(k)); the
    diagnostics report it together with computed partial sums but never
    pretend to prove it.
    """

    label: str
    tag_of: Callable[[int], Vertex]
    measure_summable: Optional[bool] = None


@dataclass(frozen=True)
class TailInfo:
    inf_measure_positive: Optional[bool] = None
    sup_weighted_degree: Optional[float] = None
    rays: Tuple[Ray, ...] = ()


@dataclass(frozen=True)
class PendantChain:
    """Finite path decoration hanging off a backbone vertex.

    ``edges[0]`` joins the backbone vertex to the first chain vertex;
    ``killing``/``measure`` describe the chain vertices themselves.
    ``count`` identical copies are attached.
    """

    edges: Tuple[float, ...]
    killing: Tuple[float, ...]
    measure: Tuple[float, ...]
    count: int = 1

    def __post_init__(self):
        L = len(self.edges)
        if L == 0 or len(self.killing) != L or len(self.measure) != L:
            raise InputError("pendant chain arrays must have equal positive length")

    @property
    def root_edge(self) -> float:
        return self.edges[0]


@dataclass(frozen=True)
class StandardRays:
    """``count`` copies of the unit half-line (b=1, c=0, m=1)."""

    count: int


@dataclass(frozen=True)
class GeneralRay:
    """An infinite simple path with arbitrary closed-form coefficients.

    ``edge(j)`` is the weight between the j-th and (j+1)-th ray vertex, where
    the 0-th vertex is the backbone vertex it hangs from; ``killing(j)`` and
    ``measure(j)`` are defined for j >= 1.
    """

    edge: Callable[[int], float]
    killing: Callable[[int], float]
    measure: Callable[[int], float]


Decoration = object  # PendantChain | StandardRays | GeneralRay


@dataclass(frozen=True)
class Spine:
    """One-ended backbone with per-vertex decorations; drives recursion-based
    searches for bounded solutions of (L + a)u = 0."""

    tag_of: Callable[[int], Vertex]
    edge: Callable[[int], float]
    killing: Callable[[int], float]
    measure: Callable[[int], float]
    decorations: Callable[[int], Tuple[Decoration, ...]]


@dataclass(frozen=True)
class LineInfo:
    """Marks a family as a plain (half or full) line; enables the
    two-parameter recursion machinery."""

    kind: str  # "half" | "integer"
    edge: Callable[[int], float]  # b(tag k, tag k+1)


# ---------------------------------------------------------------------------
# sections


@dataclass(frozen=True)
class Section:
    """Finite truncation K_n of a family: a valid GraphSpec (carrying only the
    family's own killing term) plus the exact edge-deficiency map."""

    family: "GraphFamily"
    level: int
    spec: GraphSpec
    deficiency: Dict[Vertex, float]

    def dirichlet_spec(self) -> GraphSpec:
        """The section as a standalone weighted graph: deficiency folded into c."""
        s = self.spec
        return GraphSpec(
            s.vertices,
            s.b,
            c={x: s.c[x] + self.deficiency[x] for x in s.vertices},
            m=s.m,
        )

    def __len__(self) -> int:
        return len(self.spec)


class GraphFamily:
    """A countable weighted graph defined by rules over vertex tags."""

    def __init__(
        self,
        name: str,
        template: str,
        params: dict,
        *,
        level_vertices: Callable[[int], List[Vertex]],
        neighbors: Callable[[Vertex], Sequence[Tuple[Vertex, float]]],
        killing: Callable[[Vertex], float],
        measure: Callable[[Vertex], float],
        tail: TailInfo = TailInfo(),
        spine: Optional[Spine] = None,
        line: Optional[LineInfo] = None,
        cover_level: Optional[int] = None,
        lumped_builder: Optional[Callable[[int], Section]] = None,
    ):
        self.name = name
        self.template = template
        self.params = dict(params)
        self.level_vertices = level_vertices
        self.neighbors = neighbors
        self.killing = killing
        self.measure = measure
        self.tail = tail
        self.spine = spine
        self.line = line
        self.cover_level = cover_level
        self._lumped_builder = lumped_builder
        self._sections: Dict[tuple, Section] = {}

    def __repr__(self):
        return f"GraphFamily({self.name!r})"

    def rate_rhs(self, alpha: float) -> Callable[[Vertex], float]:
        """The rule x -> alpha + c(x)/m(x); the right-hand side whose resolvent
        yields the completeness function w = 1 - u."""
        return lambda x: alpha + self.killing(x) / self.measure(x)

    def section(self, n: int) -> Section:
        """Literal truncation at level n (nested in n)."""
        if n < 1:
            raise InputError("section level must be >= 1")
        if self.cover_level is not None:
            n = min(n, self.cover_level)
        key = ("lit", n)
        sec = self._sections.get(key)
        if sec is None:
            sec = self._build(n)
            self._sections[key] = sec
        return sec

    def solver_section(self, n: int) -> Section:
        """Equivalent section preferred by solvers (lumped when available)."""
        if self._lumped_builder is None:
            return self.section(n)
        if n < 1:
            raise InputError("section level must be >= 1")
        key = ("lump", n)
        sec = self._sections.get(key)
        if sec is None:
            sec = self._lumped_builder(n)
            self._sections[key] = sec
        return sec

    def _build(self, n: int) -> Section:
        tags = list(self.level_vertices(n))
        tagset = set(tags)
        b: Dict[tuple, float] = {}
        d: Dict[Vertex, float] = {}
        for x in tags:
            cut = 0.0
            for y, w in self.neighbors(x):
                if w == 0.0:
                    continue
                if y in tagset:
                    b[(x, y)] = w
                else:
                    cut += w
            d[x] = cut
        spec = GraphSpec(
            tags,
            b,
            c={x: self.killing(x) for x in tags},
            m={x: self.measure(x) for x in tags},
        )
        rep = spec.validate()
        if not rep.ok:
            raise InputError(
                f"family {self.name!r} produced an invalid section at level {n}: "
                + rep.violations[0].message
            )
        return Section(self, n, spec, d)


def truncate(family: GraphFamily, n: int) -> Section:
    """Level-n section of a family (spec plus exact deficiency map)."""
    return family.section(n)


# ---------------------------------------------------------------------------
# line templates


def half_line(
    edge: Callable[[int], float],
    measure: Callable[[int], float] | None = None,
    killing: Callable[[int], float] | None = None,
    *,
    name: str = "half-line",
    template: str = "half_line",
    params: dict | None = None,
    tail: TailInfo | None = None,
    decorations: Callable[[int], Tuple[Decoration, ...]] | None = None,
) -> GraphFamily:
    """Vertices 0,1,2,... with b(k, k+1) = edge(k); K_n = {0..n}."""
    mrule = measure or (lambda k: 1.0)
    crule = killing or (lambda k: 0.0)
    decs = decorations or (lambda k: ())

    def nbrs(x):
        if x == 0:
            return ((1, edge(0)),)
        return ((x - 1, edge(x - 1)), (x + 1, edge(x)))

    if tail is None:
        tail = TailInfo(
            inf_measure_positive=None,
            sup_weighted_degree=None,
            rays=(Ray("half-line", lambda k: k),),
        )
    spine = Spine(tag_of=lambda i: i, edge=edge, killing=crule, measure=mrule, decorations=decs)
    return GraphFamily(
        name,
        template,
        params or {},
        level_vertices=lambda n: list(range(n + 1)),
        neighbors=nbrs,
        killing=crule,
        measure=mrule,
        tail=tail,
        spine=spine,
        line=LineInfo("half", edge),
    )


def integer_line(
    edge: Callable[[int], float],
    measure: Callable[[int], float] | None = None,
    killing: Callable[[int], float] | None = None,
    *,
    name: str = "integer-line",
    template: str = "integer_line",
    params: dict | None = None,
    tail: TailInfo | None = None,
) -> GraphFamily:
    """Vertices Z with b(k, k+1) = edge(k) for all k; K_n = {-n..n}."""
    mrule = measure or (lambda k: 1.0)
    crule = killing or (lambda k: 0.0)

    def nbrs(x):
        return ((x - 1, edge(x - 1)), (x + 1, edge(x)))

    if tail is None:
        tail = TailInfo(
            rays=(
                Ray("positive", lambda k: k),
                Ray("negative", lambda k: -k),
            )
        )
    negative = GeneralRay(
        edge=lambda j: edge(-j - 1),
        killing=lambda j: crule(-j),
        measure=lambda j: mrule(-j),
    )
    spine = Spine(
        tag_of=lambda i: i,
        edge=edge,
        killing=crule,
        measure=mrule,
        decorations=lambda i: ((negative,) if i == 0 else ()),
    )
    return GraphFamily(
        name,
        template,
        params or {},
        level_vertices=lambda n: list(range(-n, n + 1)),
        neighbors=nbrs,
        killing=crule,
        measure=mrule,
        tail=tail,
        spine=spine,
        line=LineInfo("integer", edge),
    )


def power_half_line(p: float = 3.0) -> GraphFamily:
    """Half-line with polynomially growing rates b(k, k+1) = (k+1)**p."""
    tail = TailInfo(
        inf_measure_positive=True,
        sup_weighted_degree=None,
        rays=(Ray("half-line", lambda k: k, measure_summable=False),),
    )
    return half_line(
        lambda k: float(k + 1) ** p,
        name=f"halfline(p={p:g})",
        template="half_line",
        params={"p": p},
        tail=tail,
    )


def unit_integer_line() -> GraphFamily:
    """The integer line with unit weights; its formal operator is bounded."""
    tail = TailInfo(
        inf_measure_positive=True,
        sup_weighted_degree=2.0,
        rays=(
            Ray("positive", lambda k: k, measure_summable=False),
            Ray("negative", lambda k: -k, measure_summable=False),
        ),
    )
    return integer_line(lambda k: 1.0, name="zline", template="integer_line", params={"b": 1.0}, tail=tail)


def tree_family(branching: int = 3) -> GraphFamily:
    """Rooted tree with constant branching number, unit weights and measure."""
    if branching < 1:
        raise InputError("branching must be >= 1")

    def level_vertices(n):
        if branching ** n > 400_000:
            raise InputError(f"tree section at level {n} would exceed the size cap")
        out = [()]
        frontier = [()]
        for _ in range(n):
            nxt = []
            for v in frontier:
                for i in range(branching):
                    child = v + (i,)
                    out.append(child)
                    nxt.append(child)
            frontier = nxt
        return out

    def nbrs(x):
        ns = [(x + (i,), 1.0) for i in range(branching)]
        if x:
            ns.insert(0, (x[:-1], 1.0))
        return tuple(ns)

    tail = TailInfo(
        inf_measure_positive=True,
        sup_weighted_degree=float(branching + 1),
        rays=(Ray("leftmost-branch", lambda k: (0,) * k, measure_summable=False),),
    )
    return GraphFamily(
        f"tree(branching={branching})",
        "tree",
        {"branching": branching},
        level_vertices=level_vertices,
        neighbors=nbrs,
        killing=lambda x: 0.0,
        measure=lambda x: 1.0,
        tail=tail,
    )


def explicit_family(spec: GraphSpec, *, name: str = "finite") -> GraphFamily:
    """A finite graph as a (trivially exhausted) family; K_n grows in BFS order."""
    spec.require_valid()
    order: List[Vertex] = []
    seen = set()
    for start in spec.vertices:
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        while queue:
            x = queue.popleft()
            order.append(x)
            for y, _ in spec.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    N = len(order)
    tail = TailInfo(
        inf_measure_positive=True,
        sup_weighted_degree=spec.sup_weighted_degree(),
    )
    seen_pairs = set()
    edge_list = []
    for x in spec.vertices:
        for y, w in spec.neighbors(x):
            key = (x, y) if str(x) <= str(y) else (y, x)
            if key not in seen_pairs:
                seen_pairs.add(key)
                edge_list.append([x, y, w])
    graph_payload = {
        "vertices": list(spec.vertices),
        "edges": edge_list,
        "killing": {str(x): spec.c[x] for x in spec.vertices if spec.c[x] != 0.0},
        "measure": {str(x): spec.m[x] for x in spec.vertices if spec.m[x] != 1.0},
    }
    return GraphFamily(
        name,
        "explicit",
        {"graph": graph_payload},
        level_vertices=lambda n: order[: min(N, n)],
        neighbors=spec.neighbors,
        killing=lambda x: spec.c[x],
        measure=lambda x: spec.m[x],
        tail=tail,
        cover_level=N,
    )


# ---------------------------------------------------------------------------
# pendant decorations


def decorate_with_chains(
    base: GraphFamily,
    chains_at: Callable[[Vertex], Tuple[PendantChain, ...]],
    *,
    name: str | None = None,
) -> GraphFamily:
    """Attach finite pendant chains to base vertices.

    Chain vertices are tagged ``("dec", anchor, slot, depth)`` where ``slot``
    enumerates (chain index, copy index) pairs flattened in order.  A section
    contains the full chains of every anchor it contains.
    """

    def slots(anchor):
        out = []
        s = 0
        for ch in chains_at(anchor):
            for _ in range(ch.count):
                out.append((s, ch))
                s += 1
        return out

    def level_vertices(n):
        tags = list(base.level_vertices(n))
        out = list(tags)
        for x in tags:
            for s, ch in slots(x):
                for depth in range(1, len(ch.edges) + 1):
                    out.append(("dec", x, s, depth))
        return out

    def nbrs(tag):
        if isinstance(tag, tuple) and len(tag) == 4 and tag[0] == "dec":
            _, anchor, s, depth = tag
            ch = dict(slots(anchor)).get(s)
            if ch is None:
                raise InputError(f"unknown decoration tag {tag!r}")
            ns = []
            prev = anchor if depth == 1 else ("dec", anchor, s, depth - 1)
            ns.append((prev, ch.edges[depth - 1]))
            if depth < len(ch.edges):
                ns.append((("dec", anchor, s, depth + 1), ch.edges[depth]))
            return tuple(ns)
        ns = list(base.neighbors(tag))
        for s, ch in slots(tag):
            ns.append((("dec", tag, s, 1), ch.edges[0]))
        return tuple(ns)

    def killing(tag):
        if isinstance(tag, tuple) and len(tag) == 4 and tag[0] == "dec":
            _, anchor, s, depth = tag
            ch = dict(slots(anchor))[s]
            return ch.killing[depth - 1]
        return base.killing(tag)

    def measure(tag):
        if isinstance(tag, tuple) and len(tag) == 4 and tag[0] == "dec":
            _, anchor, s, depth = tag
            ch = dict(slots(anchor))[s]
            return ch.measure[depth - 1]
        return base.measure(tag)

    spine = None
    if base.spine is not None:
        bsp = base.spine

        def decorations(i):
            return tuple(bsp.decorations(i)) + tuple(chains_at(bsp.tag_of(i)))

        spine = replace(bsp, decorations=decorations)

    tail = TailInfo(
        inf_measure_positive=base.tail.inf_measure_positive,
        sup_weighted_degree=None,
        rays=base.tail.rays,
    )
    return GraphFamily(
        name or f"{base.name}+chains",
        "decorated",
        {"base": base.params, "base_template": base.template},
        level_vertices=level_vertices,
        neighbors=nbrs,
        killing=killing,
        measure=measure,
        tail=tail,
        spine=spine,
        cover_level=base.cover_level,
    )


def pendant_decorated_power_line(p: float = 3.0, every: int = 2, chain_length: int = 2) -> GraphFamily:
    """Fast half-line with a unit pendant chain at every ``every``-th vertex.

    The scenario graph for the incompleteness-criterion demonstration: the
    backbone is the fast half-line, the removed set is the pendant forest.
    """
    chain = PendantChain(
        edges=(1.0,) * chain_length,
        killing=(0.0,) * chain_length,
        measure=(1.0,) * chain_length,
    )
    base = power_half_line(p)
    fam = decorate_with_chains(
        base,
        lambda x: (chain,) if (isinstance(x, int) and x % every == 0) else (),
        name=f"halfline(p={p:g})+pendants",
    )
    fam.template = "pendant_line"
    fam.params = {"p": p, "every": every, "chain_length": chain_length}
    return fam


# ---------------------------------------------------------------------------
# Dirichlet sub-family


def dirichlet_subfamily(
    family: GraphFamily,
    member: Callable[[Vertex], bool],
    *,
    name: str | None = None,
    spine: Optional[Spine] = None,
    rays: Tuple[Ray, ...] = (),
) -> GraphFamily:
    """Restriction of a family to {x : member(x)} with cut edges folded into c.

    The weighted degree (row sum + killing)/m of every kept vertex is
    unchanged, so a declared bounded-operator certificate survives.
    """

    def level_vertices(n):
        return [x for x in family.level_vertices(n) if member(x)]

    def nbrs(x):
        return tuple((y, w) for y, w in family.neighbors(x) if member(y))

    def killing(x):
        cut = sum(w for y, w in family.neighbors(x) if not member(y))
        return family.killing(x) + cut

    tail = TailInfo(
        inf_measure_positive=family.tail.inf_measure_positive,
        sup_weighted_degree=family.tail.sup_weighted_degree,
        rays=rays,
    )
    return GraphFamily(
        name or f"{family.name}|W",
        "dirichlet_subfamily",
        {"base": family.params, "base_template": family.template},
        level_vertices=level_vertices,
        neighbors=nbrs,
        killing=killing,
        measure=family.measure,
        tail=tail,
        spine=spine,
        cover_level=family.cover_level,
    )


# ---------------------------------------------------------------------------
# complete supergraph constructions


def ray_multiplicity(rowsum_b: float) -> int:
    """Number of attached copies: floor(weighted row sum) + 1 (always >= 1)."""
    if rowsum_b < 0:
        raise InputError("row sum must be nonnegative")
    return int(math.floor(rowsum_b)) + 1


def _as_family(base) -> GraphFamily:
    if isinstance(base, GraphFamily):
        return base
    if isinstance(base, GraphSpec):
        return explicit_family(base, name="base")
    raise InputError("supergraph base must be a GraphSpec or GraphFamily")


def build_supergraph(
    base,
    ray_depth_rule: Callable[[int], int] | None = None,
    *,
    lump: bool = True,
) -> GraphFamily:
    """Attach floor(row sum)+1 unit half-lines to every base vertex.

    The original weights are untouched; every attached edge has weight one,
    attached vertices have c = 0 and m = 1 (so a killing-free base stays
    killing-free).  In the level-n section the base is truncated at its own
    level n and every ray at depth ``ray_depth_rule(n)`` (default n).

    With ``lump=True`` an equivalent solver-side section is also generated in
    which the identical rays at an anchor are represented once with
    multiplicity-scaled weight and measure; values at base vertices and along
    any single ray coincide with the literal section by symmetry.
    """
    fam = _as_family(base)
    depth_of = ray_depth_rule or (lambda n: n)

    kcache: Dict[Vertex, int] = {}

    def k_of(x) -> int:
        k = kcache.get(x)
        if k is None:
            k = ray_multiplicity(math.fsum(w for _, w in fam.neighbors(x)))
            kcache[x] = k
        return k

    def is_ray(tag):
        return isinstance(tag, tuple) and len(tag) == 4 and tag[0] == "ray"

    def level_vertices(n):
        base_tags = list(fam.level_vertices(n))
        out = list(base_tags)
        r = depth_of(n)
        for x in base_tags:
            kx = k_of(x)
            for j in range(kx):
                for dd in range(1, r + 1):
                    out.append(("ray", x, j, dd))
        return out

    def nbrs(tag):
        if is_ray(tag):
            _, anchor, j, dd = tag
            prev = anchor if dd == 1 else ("ray", anchor, j, dd - 1)
            return ((prev, 1.0), (("ray", anchor, j, dd + 1), 1.0))
        ns = list(fam.neighbors(tag))
        for j in range(k_of(tag)):
            ns.append((("ray", tag, j, 1), 1.0))
        return tuple(ns)

    def killing(tag):
        return 0.0 if is_ray(tag) else fam.killing(tag)

    def measure(tag):
        return 1.0 if is_ray(tag) else fam.measure(tag)

    anchor0 = fam.level_vertices(1)[0]
    tail = TailInfo(
        inf_measure_positive=fam.tail.inf_measure_positive,
        sup_weighted_degree=None,
        rays=tuple(fam.tail.rays)
        + (Ray("attached", lambda k: anchor0 if k == 0 else ("ray", anchor0, 0, k), measure_summable=False),),
    )

    spine = None
    if fam.spine is not None:
        bsp = fam.spine

        def decorations(i):
            return tuple(bsp.decorations(i)) + (StandardRays(k_of(bsp.tag_of(i))),)

        spine = replace(bsp, decorations=decorations)

    def lumped_builder(n: int) -> Section:
        base_sec = fam.section(n)
        r = depth_of(n if fam.cover_level is None else min(n, fam.cover_level))
        tags = list(base_sec.spec.vertices)
        b: Dict[tuple, float] = dict(base_sec.spec.b)
        c = {x: base_sec.spec.c[x] for x in tags}
        m = {x: base_sec.spec.m[x] for x in tags}
        d = dict(base_sec.deficiency)
        verts = list(tags)
        for x in tags:
            kx = float(k_of(x))
            prev = x
            for dd in range(1, r + 1):
                t = ("rays", x, dd)
                verts.append(t)
                b[(prev, t)] = kx
                b[(t, prev)] = kx
                c[t] = 0.0
                m[t] = kx
                d[t] = 0.0
                prev = t
            d[prev] = d.get(prev, 0.0) + kx  # cut toward depth r+1
        spec = GraphSpec(verts, b, c=c, m=m)
        spec.require_valid()
        return Section(sg, n, spec, d)

    sg = GraphFamily(
        f"supergraph({fam.name})",
        "supergraph",
        {"base": fam.params, "base_template": fam.template, "single_vertex": False},
        level_vertices=level_vertices,
        neighbors=nbrs,
        killing=killing,
        measure=measure,
        tail=tail,
        spine=spine,
        line=None,
        cover_level=None,
        lumped_builder=lumped_builder if lump else None,
    )
    return sg


def build_supergraph_single_vertex(base) -> GraphFamily:
    """Variant attaching a single pendant vertex per multiplicity unit."""
    fam = _as_family(base)

    def chains(x):
        k = ray_multiplicity(math.fsum(w for _, w in fam.neighbors(x)))
        return (PendantChain(edges=(1.0,), killing=(0.0,), measure=(1.0,), count=k),)

    out = decorate_with_chains(fam, chains, name=f"supergraph1({fam.name})")
    out.template = "supergraph"
    out.params = {"base": fam.params, "base_template": fam.template, "single_vertex": True}
    return out


# ---------------------------------------------------------------------------
# the eigenfunction counterexample on Z


def jacobi_counterexample(lam: float, weight: Callable[[int], float] | None = None) -> GraphFamily:
    """Integer line with unit edges and a tailored (m, c) so that u(x) = e^{lam x}
    solves (L + a)u = 0 for a = e^{-lam} + e^{lam} - 2.

    ``weight`` must be a summable positive sequence (default 2^{-|x|}); then
    m(x) = min(1, weight(x)/u(x)^2) and c(x) = max(0, u(x)^2/weight(x) - 1) * a * m(x),
    so m*u^2 <= weight pointwise and u lies in l2(Z, m).
    """
    if not (lam > 0.0):
        raise InputError("lambda must be positive")
    w = weight or (lambda x: 2.0 ** (-abs(x)))
    alpha = math.exp(-lam) + math.exp(lam) - 2.0

    def u2(x: int) -> float:
        return math.exp(2.0 * lam * x)

    def measure(x: int) -> float:
        return min(1.0, w(x) / u2(x))

    def killing(x: int) -> float:
        return max(0.0, u2(x) / w(x) - 1.0) * alpha * measure(x)

    tail = TailInfo(
        inf_measure_positive=False,
        sup_weighted_degree=None,
        rays=(
            Ray("positive", lambda k: k, measure_summable=True),
            Ray("negative", lambda k: -k, measure_summable=False),
        ),
    )
    fam = integer_line(
        lambda k: 1.0,
        measure=measure,
        killing=killing,
        name=f"jacobi(lambda={lam:g})",
        template="jacobi",
        params={"lambda": lam, "alpha": alpha},
        tail=tail,
    )
    return fam


# ---------------------------------------------------------------------------
# built-in registry


def family_from_name(text: str) -> GraphFamily:
    """Resolve built-in family names like ``fastline``, ``halfline:p=2``,
    ``jacobi:lambda=1``, ``zline``, ``tree:branching=3``, ``fastline_pendants``."""
    head, _, rest = text.partition(":")
    kv: Dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            if "=" in part:
                k, v = part.split("=", 1)
                kv[k.strip()] = v.strip()
            else:
                kv[""] = part.strip()
    head = head.strip().lower()
    if head == "zline":
        return unit_integer_line()
    if head == "fastline":
        return power_half_line(3.0)
    if head == "halfline":
        p = float(kv.get("p", kv.get("", 3.0)))
        return power_half_line(p)
    if head == "jacobi":
        lam = float(kv.get("lambda", kv.get("lam", kv.get("", 1.0))))
        return jacobi_counterexample(lam)
    if head == "tree":
        branching = int(kv.get("branching", kv.get("", 3)))
        return tree_family(branching)
    if head == "fastline_pendants":
        p = float(kv.get("p", 3.0))
        every = int(kv.get("every", 2))
        length = int(kv.get("chain_length", 2))
        return pendant_decorated_power_line(p, every, length)
    if head in ("supergraph", "super"):
        base = family_from_name(kv.get("base", kv.get("", "fastline")))
        return build_supergraph(base)
    raise InputError(f"unknown built-in family {text!r}")


BUILTIN_FAMILIES = ("zline", "halfline:p=<real>", "fastline", "jacobi:lambda=<real>", "tree:branching=<int>", "fastline_pendants", "supergraph:base=<name>")
