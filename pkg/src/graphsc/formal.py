"""Pointwise application of the formal operator and analytic diagnostics.

The formal operator acts on a function u by

    (1/m(x)) * [ sum_y b(x,y) (u(x) - u(y)) + c(x) u(x) ],

wherever the sum converges (automatic on finite neighbor lists).  Functions
on a section are extended by zero outside it unless an explicit extension is
supplied; that matches the Dirichlet-restriction semantics used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .families import GraphFamily, LineInfo, Section
from .graphs import GraphSpec, Vertex, connected_components, tag_sort_key


def as_rule(u) -> Callable[[Vertex], float]:
    """Accept a mapping or a callable as a vertex function."""
    if callable(u):
        return u
    data = dict(u)

    def rule(x):
        try:
            return data[x]
        except KeyError:
            raise InputError(f"function has no value at vertex {x!r}") from None

    return rule


def _view(graph):
    """Uniform access to (neighbors, c, m, default evaluation set, member set)."""
    if isinstance(graph, Section):
        fam = graph.family
        members = set(graph.spec.vertices)
        return fam.neighbors, fam.killing, fam.measure, graph.spec.vertices, members
    if isinstance(graph, GraphSpec):
        graph.require_valid()
        return (
            graph.neighbors,
            lambda x: graph.c[x],
            lambda x: graph.m[x],
            graph.vertices,
            None,
        )
    if isinstance(graph, GraphFamily):
        return graph.neighbors, graph.killing, graph.measure, None, None
    raise InputError(f"unsupported graph object {type(graph).__name__}")


def apply_formal(
    graph,
    u,
    at: Iterable[Vertex] | None = None,
    outside: Callable[[Vertex], float] | None = None,
) -> Dict[Vertex, float]:
    """Evaluate the formal operator of ``graph`` applied to ``u`` at ``at``.

    ``graph`` may be a GraphSpec, a family, or a Section; for a Section the
    neighbors are those of the underlying family and values outside the
    section default to zero (pass ``outside`` to override).
    """
    nbrs, cf, mf, default_at, members = _view(graph)
    if at is None:
        if default_at is None:
            raise InputError("evaluation set is required for an infinite family")
        at = default_at
    urule = as_rule(u)
    out_rule = outside or (lambda x: 0.0)

    def val(y):
        if members is not None and y not in members:
            return out_rule(y)
        return urule(y)

    result: Dict[Vertex, float] = {}
    for x in at:
        ux = val(x)
        acc = [w * (ux - val(y)) for y, w in nbrs(x)]
        acc.append(cf(x) * ux)
        result[x] = math.fsum(acc) / mf(x)
    return result


@dataclass
class ResidualReport:
    per_vertex: Dict[Vertex, float]
    max_abs: float
    max_rel: float
    argmax: Optional[Vertex]

    def as_dict(self):
        return {
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "argmax": repr(self.argmax),
        }


def residual(
    graph,
    u,
    alpha: float,
    f=None,
    at: Iterable[Vertex] | None = None,
    outside: Callable[[Vertex], float] | None = None,
) -> ResidualReport:
    """Per-vertex residual of (L + alpha) u - f with max norms.

    ``max_rel`` scales each residual by max(1, |u(x)|, |f(x)|); for
    eigenfunction-type identities with exponentially large values that is the
    meaningful metric in floating point.  Argmax ties break toward the
    smallest vertex tag.
    """
    urule = as_rule(u)
    frule = as_rule(f) if f is not None else (lambda x: 0.0)
    at_list = list(at) if at is not None else None
    lu = apply_formal(graph, urule, at=at_list, outside=outside)
    per: Dict[Vertex, float] = {}
    max_abs = 0.0
    max_rel = 0.0
    argmax = None
    for x in sorted(lu, key=tag_sort_key):
        ux = urule(x)
        fx = frule(x)
        r = lu[x] + alpha * ux - fx
        per[x] = r
        ar = abs(r)
        rel = ar / max(1.0, abs(ux), abs(fx))
        if ar > max_abs:
            max_abs = ar
            argmax = x
        max_rel = max(max_rel, rel)
    return ResidualReport(per, max_abs, max_rel, argmax)


# ---------------------------------------------------------------------------
# minimum principle


@dataclass
class MinPrincipleResult:
    status: str  # "pass" | "fail" | "hypotheses-not-met"
    witness: Optional[Vertex] = None
    detail: str = ""
    zero_components: int = 0
    positive_components: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def check_min_principle(
    spec: GraphSpec,
    u,
    alpha: float,
    U: Iterable[Vertex],
    tol: float = 1e-12,
) -> MinPrincipleResult:
    """Verify the minimum principle on a finite graph.

    Hypotheses: (L + alpha) u >= 0 on U and u >= 0 off U.  Conclusion
    checked: u >= 0 everywhere, and on each connected component of U either
    u vanishes identically or is strictly positive.
    """
    spec.require_valid()
    if alpha <= 0:
        raise InputError("alpha must be positive")
    urule = as_rule(u)
    Uset = set(U)
    for x in Uset:
        if x not in spec:
            raise InputError(f"U contains unknown vertex {x!r}")
    lu = apply_formal(spec, urule, at=Uset)
    for x in sorted(Uset, key=tag_sort_key):
        if lu[x] + alpha * urule(x) < -tol:
            return MinPrincipleResult(
                "hypotheses-not-met", x, f"(L+alpha)u({x!r}) = {lu[x] + alpha * urule(x):.3e} < 0"
            )
    for x in spec.vertices:
        if x not in Uset and urule(x) < -tol:
            return MinPrincipleResult("hypotheses-not-met", x, f"u({x!r}) < 0 outside U")
    for x in spec.vertices:
        if urule(x) < -tol:
            return MinPrincipleResult("fail", x, f"u({x!r}) = {urule(x):.3e} < 0")
    # component dichotomy inside U (components of the subgraph induced on U)
    if Uset:
        sub_edges = {
            (x, y): w
            for (x, y), w in spec.b.items()
            if x in Uset and y in Uset
        }
        induced = GraphSpec([x for x in spec.vertices if x in Uset], sub_edges)
        zero = positive = 0
        for comp in connected_components(induced):
            vals = [urule(x) for x in comp]
            if all(abs(v) <= tol for v in vals):
                zero += 1
            elif all(v > tol for v in vals):
                positive += 1
            else:
                worst = min(comp, key=lambda x: urule(x))
                return MinPrincipleResult(
                    "fail", worst, "component neither identically zero nor strictly positive",
                    zero, positive,
                )
        return MinPrincipleResult("pass", None, "", zero, positive)
    return MinPrincipleResult("pass")


# ---------------------------------------------------------------------------
# the infinite-path measure condition


@dataclass
class ConditionAReport:
    verdict: str  # "yes" | "no" | "unknown"
    reason: str
    certificate: dict = field(default_factory=dict)


def _ray_measure_partial_sums(family: GraphFamily, ray, depths=(8, 32, 128, 512, 1024)) -> List[float]:
    sums = []
    total = 0.0
    prev = 0
    for K in depths:
        total += math.fsum(family.measure(ray.tag_of(k)) for k in range(prev + 1, K + 1))
        sums.append(total)
        prev = K
    return sums


def check_condition_A(family: GraphFamily) -> ConditionAReport:
    """Three-valued diagnostic of the infinite-path measure condition.

    Decided from declared tail metadata only (a finite computation cannot
    prove a statement about all infinite paths): positive infimum of the
    measure or all declared rays divergent gives "yes"; a declared ray with
    summable measure gives "no" with its partial sums as certificate;
    anything else is honestly "unknown".
    """
    tail = family.tail
    for ray in tail.rays:
        if ray.measure_summable is True:
            sums = _ray_measure_partial_sums(family, ray)
            return ConditionAReport(
                "no",
                f"declared ray {ray.label!r} has summable measure",
                {"ray": ray.label, "partial_sums": sums},
            )
    if tail.inf_measure_positive is True:
        return ConditionAReport("yes", "measure has positive infimum", {})
    if tail.rays and all(r.measure_summable is False for r in tail.rays):
        cert = {r.label: _ray_measure_partial_sums(family, r, depths=(8, 64, 512)) for r in tail.rays}
        return ConditionAReport("yes", "every declared ray has divergent measure", cert)
    return ConditionAReport("unknown", "tail metadata insufficient", {})


# ---------------------------------------------------------------------------
# uniqueness of l^p solutions, numerically


@dataclass
class LpUniquenessReport:
    supported: bool
    found: bool
    alpha: float
    p: float
    window: int
    solution: Optional[Dict[Vertex, float]] = None
    partial_sums: Optional[List[float]] = None
    condition_a: str = "unknown"
    consistent: bool = True
    detail: str = ""


def _line_coeff(family: GraphFamily, x: int, alpha: float) -> float:
    return family.killing(x) + alpha * family.measure(x)


def _line_forward(family: GraphFamily, alpha: float, u0: float, u1: float, x0: int, x1: int, upto: int):
    """Solve the three-term recursion forward given values at x0 = x1 - 1, x1."""
    edge = family.line.edge
    vals = {x0: u0, x1: u1}
    for x in range(x1, upto):
        bl = edge(x - 1)
        br = edge(x)
        nxt = ((bl + br + _line_coeff(family, x, alpha)) * vals[x] - bl * vals[x - 1]) / br
        vals[x + 1] = nxt
    return vals


def _line_backward(family: GraphFamily, alpha: float, uX1: float, uX: float, X: int, downto: int):
    edge = family.line.edge
    vals = {X + 1: uX1, X: uX}
    for x in range(X, downto, -1):
        bl = edge(x - 1)
        br = edge(x)
        prev = ((bl + br + _line_coeff(family, x, alpha)) * vals[x] - br * vals[x + 1]) / bl
        vals[x - 1] = prev
        # renormalize to dodge overflow; only the direction matters
        mx = max(abs(vals[x - 1]), abs(vals[x]), abs(vals[x + 1]))
        if mx > 1e250:
            for k in list(vals):
                vals[k] /= mx
    return vals


def _bounded_partial_sums(family: GraphFamily, values: Dict[int, float], p: float, windows: Sequence[int], two_sided: bool):
    sums = []
    for wdw in windows:
        rng = range(-wdw, wdw + 1) if two_sided else range(0, wdw + 1)
        sums.append(math.fsum(family.measure(x) * abs(values[x]) ** p for x in rng))
    last, prev = sums[-1], sums[-2]
    bounded = last <= prev * (1.0 + 1e-6) + 1e-300
    return bounded, sums


def check_lp_uniqueness_numeric(
    family: GraphFamily, alpha: float, p: float = 2.0, window: int = 128
) -> LpUniquenessReport:
    """Search the solution space of (L + alpha) u = 0 along a line family for a
    nontrivial member with bounded l^p(m) partial sums.

    On a half-line the space satisfying the root equation is one-dimensional
    (forward shooting); on the integer line candidates are the minimal
    solutions at either end, obtained by backward recursion.  Boundedness of
    partial sums is judged by the doubling-window plateau rule.  If the
    infinite-path measure condition is declared to hold, finding a solution
    is flagged as an inconsistency.
    """
    if alpha <= 0 or p < 1:
        raise InputError("need alpha > 0 and p >= 1")
    if family.line is None:
        return LpUniquenessReport(False, False, alpha, p, window, detail="not a line family")
    cond = check_condition_A(family).verdict
    windows = [max(4, window // 8), max(8, window // 4), max(16, window // 2), window]
    candidates: List[Dict[int, float]] = []
    if family.line.kind == "half":
        b0 = family.line.edge(0)
        u1 = (b0 + _line_coeff(family, 0, alpha)) / b0  # root equation with u(0) = 1
        candidates.append(_line_forward(family, alpha, 1.0, u1, 0, 1, window + 1))
        two_sided = False
    else:
        X = 2 * window
        down = _line_backward(family, alpha, 0.0, 1.0, X, -window - 1)
        up_mirror = {x: v for x, v in _line_backward_neg(family, alpha, X, window)}
        candidates.append({x: down[x] for x in range(-window - 1, window + 2) if x in down})
        candidates.append(up_mirror)
        two_sided = True
    found = False
    best = None
    best_sums = None
    for vals in candidates:
        rng = range(-window, window + 1) if two_sided else range(0, window + 1)
        if any(x not in vals for x in rng):
            continue
        mx = max(abs(vals[x]) for x in rng)
        if mx == 0.0 or not math.isfinite(mx):
            continue
        normalized = {x: vals[x] / mx for x in vals}
        bounded, sums = _bounded_partial_sums(family, normalized, p, windows, two_sided)
        if bounded:
            found = True
            best = {x: normalized[x] for x in rng}
            best_sums = sums
            break
        if best is None:
            best_sums = sums
    consistent = not (cond == "yes" and found)
    return LpUniquenessReport(
        True, found, alpha, p, window,
        solution=best, partial_sums=best_sums,
        condition_a=cond, consistent=consistent,
        detail="" if consistent else "bounded solution found although uniqueness was expected",
    )


def _line_backward_neg(family: GraphFamily, alpha: float, X: int, window: int):
    """Minimal direction at the negative end, returned on [-window-1, window+1]."""
    edge = family.line.edge
    vals = {-(X + 1): 0.0, -X: 1.0}
    for x in range(-X, window + 1):
        bl = edge(x - 1)
        br = edge(x)
        vals[x + 1] = ((bl + br + _line_coeff(family, x, alpha)) * vals[x] - bl * vals[x - 1]) / br
        mx = max(abs(vals[x + 1]), abs(vals[x]))
        if mx > 1e250:
            for k in list(vals):
                vals[k] /= mx
    return [(x, v) for x, v in vals.items() if -window - 1 <= x <= window + 1]


# ---------------------------------------------------------------------------
# summability criterion for the l^2 pairing


@dataclass
class SummabilityReport:
    finite: Optional[bool]
    value: Optional[float]
    partial_sums: Optional[List[float]] = None


def check_summability_criterion(graph, x: Vertex, tail_terms: Callable[[int], float] | None = None) -> SummabilityReport:
    """Decide whether y -> b(x,y)/m(y) is square-summable against m.

    Evaluates sum_y b(x,y)^2 / m(y).  On finite neighbor lists this is an
    exact finite sum (always finite).  For a declared infinite tail pass
    ``tail_terms(k)`` giving the k-th extra term b(x, y_k)^2 / m(y_k); the
    verdict then comes from doubling-window partial sums and may be None
    (undecided) if they neither plateau nor clearly grow.
    """
    nbrs, _cf, mf, _at, _members = _view(graph)
    base = math.fsum(w * w / mf(y) for y, w in nbrs(x))
    if tail_terms is None:
        return SummabilityReport(True, base)
    sums = []
    total = base
    prev_k = 0
    for K in (16, 64, 256, 1024, 4096):
        total += math.fsum(tail_terms(k) for k in range(prev_k + 1, K + 1))
        sums.append(total)
        prev_k = K
    if sums[-1] <= sums[-2] * (1 + 1e-10) + 1e-300:
        return SummabilityReport(True, sums[-1], sums)
    if sums[-1] >= sums[-2] * (1 + 1e-3):
        return SummabilityReport(False, None, sums)
    return SummabilityReport(None, None, sums)


# ---------------------------------------------------------------------------
# quadratic form energy


@dataclass
class EnergyValue:
    dirichlet: float
    killing: float

    @property
    def total(self) -> float:
        return self.dirichlet + self.killing


def energy(spec: GraphSpec, u) -> EnergyValue:
    """Form energy (1/2) sum b (u(x)-u(y))^2 + sum c u^2 on a finite graph."""
    spec.require_valid()
    urule = as_rule(u)
    dir_terms = []
    for x in spec.vertices:
        ux = urule(x)
        for y, w in spec.neighbors(x):
            dir_terms.append(w * (ux - urule(y)) ** 2)
    kill = math.fsum(spec.c[x] * urule(x) ** 2 for x in spec.vertices)
    return EnergyValue(0.5 * math.fsum(dir_terms), kill)


def greens_identity_gap(spec: GraphSpec, u, v) -> float:
    """|sum (Lu) v m  -  [ (1/2) sum b du dv + sum c u v ]| on a finite graph."""
    urule, vrule = as_rule(u), as_rule(v)
    lu = apply_formal(spec, urule)
    lhs = math.fsum(lu[x] * vrule(x) * spec.m[x] for x in spec.vertices)
    cross = []
    for x in spec.vertices:
        ux, vx = urule(x), vrule(x)
        for y, w in spec.neighbors(x):
            cross.append(w * (ux - urule(y)) * (vx - vrule(y)))
    rhs = 0.5 * math.fsum(cross) + math.fsum(spec.c[x] * urule(x) * vrule(x) for x in spec.vertices)
    return abs(lhs - rhs)


def quadratic_form_check(section: Section, u, tol: float = 1e-10) -> float:
    """Gap between the matrix quadratic form of a section operator and the
    double-sum energy of the section's weighted graph (killing + deficiency)."""
    from .sections import assemble

    op = assemble(section)
    vec = np.array([as_rule(u)(x) for x in section.spec.vertices])
    lhs = float(vec @ (op.m * (op.matrix() @ vec)))
    rhs = energy(section.dirichlet_spec(), u).total
    gap = abs(lhs - rhs)
    if not math.isfinite(gap):
        raise InputError("non-finite energy")
    return gap
