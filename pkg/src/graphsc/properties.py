"""Randomized invariant suites over random finite graphs and sections.

Each suite draws independent instances from a seeded generator and checks one
structural property of the operators (monotonicity, positivity, contraction,
markovianity, ...).  The suites double as the release gate: the command-line
``selfcheck`` runs them all and any failure is a bug, never tolerated noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from .completeness import _solve_groundstate
from .formal import energy, greens_identity_gap
from .graphs import GraphSpec, connected_components, dirichlet_subgraph, graph_spec
from .sections import assemble, heat_residual


@dataclass
class PropertyResult:
    name: str
    instances: int
    failures: int
    max_err: float
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.failures == 0


def random_graph(rng: np.random.Generator, max_n: int = 24, connected: bool = False,
                 with_killing: bool = True) -> GraphSpec:
    """Random valid weighted graph: a random tree plus extra edges, uniform
    weights, optional sparse killing, measure bounded away from zero."""
    n = int(rng.integers(2, max_n + 1))
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(0.1, 3.0))
    extra = int(rng.integers(0, max(1, n)))
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges[(min(u, v), max(u, v))] = float(rng.uniform(0.1, 3.0))
    if not connected and n > 3 and rng.random() < 0.3:
        # split off the last vertex to exercise multi-component paths
        edges = {(u, v): w for (u, v), w in edges.items() if v != n - 1}
    c = {}
    if with_killing and rng.random() < 0.6:
        for v in range(n):
            if rng.random() < 0.4:
                c[v] = float(rng.uniform(0.0, 2.0))
    m = {v: float(rng.uniform(0.2, 3.0)) for v in range(n)}
    return graph_spec(range(n), [(u, v, w) for (u, v), w in edges.items()], c=c, m=m)


def _run(name: str, rng: np.random.Generator, instances: int,
         one: Callable[[np.random.Generator], float], tol: float) -> PropertyResult:
    failures = 0
    worst = 0.0
    note = ""
    for k in range(instances):
        err = one(rng)
        worst = max(worst, err)
        if err > tol:
            failures += 1
            if not note:
                note = f"first failure at instance {k}: err={err:.3e}"
    return PropertyResult(name, instances, failures, worst, note)


# ---------------------------------------------------------------------------
# individual suites (each returns the instance error; <= tol passes)


def suite_domain_monotonicity(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng)
        n = len(spec)
        order = list(rng.permutation(n))
        k1 = int(rng.integers(1, n))
        k2 = int(rng.integers(k1, n + 1))
        K1 = [spec.vertices[i] for i in order[:k1]]
        K2 = [spec.vertices[i] for i in order[:k2]]
        alpha = float(rng.uniform(0.2, 3.0))
        f = {x: (float(rng.uniform(0.0, 2.0)) if x in set(K1) else 0.0) for x in spec.vertices}
        sub1 = dirichlet_subgraph(spec, K1)
        sub2 = dirichlet_subgraph(spec, K2)
        u1 = assemble(sub1.spec).solve_resolvent(alpha, lambda x: f[x]).solution
        u2 = assemble(sub2.spec).solve_resolvent(alpha, lambda x: f[x]).solution
        m2 = {x: u2[i] for i, x in enumerate(sub2.spec.vertices)}
        return max(u1[i] - m2[x] for i, x in enumerate(sub1.spec.vertices))

    return _run("domain-monotonicity", rng, instances, one, 1e-10)


def suite_positivity(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng, connected=True)
        comps = connected_components(spec)
        comp = max(comps, key=len)
        if len(comp) < 2:
            return 0.0
        spec = dirichlet_subgraph(spec, comp).spec  # connected piece
        alpha = float(rng.uniform(0.2, 3.0))
        f = np.zeros(len(spec))
        f[rng.integers(0, len(spec))] = float(rng.uniform(0.5, 2.0))
        u = assemble(spec).solve_resolvent(alpha, f).solution
        # preserving: u >= 0; improving: strictly positive on the component
        neg = max(0.0, -float(np.min(u)))
        strict = 0.0 if float(np.min(u)) > 0.0 else 1.0
        return max(neg, strict)

    return _run("positivity-preserving-improving", rng, instances, one, 1e-12)


def suite_markov_bound(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng)
        sub = dirichlet_subgraph(spec, list(spec.vertices)[: max(1, len(spec) - 2)])
        alpha = float(rng.uniform(0.2, 3.0))
        f = rng.uniform(0.0, 1.0, size=len(sub.spec))
        u = assemble(sub.spec).solve_resolvent(alpha, f).solution
        au = alpha * u
        return max(0.0, float(np.max(au)) - 1.0, -float(np.min(au)))

    return _run("markov-bound", rng, instances, one, 1e-12)


def suite_resolvent_identity(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng)
        op = assemble(spec)
        alpha = float(rng.uniform(0.2, 2.0))
        beta = float(rng.uniform(2.0, 5.0))
        v = rng.standard_normal(len(spec))
        ra = op.solve_resolvent(alpha, v).solution
        rb = op.solve_resolvent(beta, v).solution
        rab = op.solve_resolvent(alpha, op.solve_resolvent(beta, v).solution).solution
        lhs = ra - rb
        rhs = (beta - alpha) * rab
        return float(np.max(np.abs(lhs - rhs)))

    return _run("resolvent-identity", rng, instances, one, 1e-9)


def suite_semigroup_property(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng, max_n=16)
        op = assemble(spec)
        s = float(rng.uniform(0.05, 1.0))
        t = float(rng.uniform(0.05, 1.0))
        v = rng.standard_normal(len(spec))
        a = op.semigroup_apply(s + t, v)
        b = op.semigroup_apply(s, op.semigroup_apply(t, v))
        return float(np.max(np.abs(a - b)))

    return _run("semigroup-property", rng, instances, one, 1e-8)


def suite_greens_identity(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng)
        u = {x: float(rng.uniform(-1.0, 1.0)) for x in spec.vertices}
        v = {x: float(rng.uniform(-1.0, 1.0)) for x in spec.vertices}
        return greens_identity_gap(spec, u, v)

    return _run("greens-identity", rng, instances, one, 1e-10)


def suite_normal_contraction(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng)
        u = {x: float(rng.uniform(-2.0, 2.0)) for x in spec.vertices}
        e0 = energy(spec, u).total
        worst = 0.0
        for contraction in (lambda s: min(1.0, max(0.0, s)), abs):
            cu = {x: contraction(u[x]) for x in spec.vertices}
            worst = max(worst, energy(spec, cu).total - e0)
        return worst

    return _run("normal-contraction", rng, instances, one, 1e-12)


def _random_section_with_rate(rng):
    """Random graph restricted to a proper subset; returns (operator, c/m rate)."""
    spec = random_graph(rng)
    n = len(spec)
    keep = list(spec.vertices)[: max(1, n - int(rng.integers(1, max(2, n))))]
    sub = dirichlet_subgraph(spec, keep)
    op = assemble(sub.spec)
    rate = np.array([spec.c[x] / spec.m[x] for x in sub.spec.vertices])
    return op, rate


def suite_heat_loss_monotone(rng, instances=200) -> PropertyResult:
    def one(rng):
        op, rate = _random_section_with_rate(rng)
        ts = np.linspace(0.0, 2.0, 9)
        M = op.semigroup_curve(ts, np.ones(op.n)) + op.semigroup_integral_curve(ts, rate)
        worst = max(
            float(np.max(M)) - 1.0,
            -float(np.min(M)),
            float(np.max(np.diff(M, axis=0))),
        )
        return max(0.0, worst)

    return _run("heat-loss-monotone", rng, instances, one, 1e-9)


def suite_killed_mass_identity(rng, instances=200) -> PropertyResult:
    def one(rng):
        op, rate = _random_section_with_rate(rng)
        S = _solve_groundstate(op, rate)
        t = float(rng.uniform(0.1, 2.0))
        direct = op.semigroup_apply(t, np.ones(op.n)) + op.semigroup_integral_curve([t], rate)[0]
        via_s = S + op.semigroup_apply(t, 1.0 - S)
        return float(np.max(np.abs(direct - via_s)))

    return _run("killed-mass-identity", rng, instances, one, 1e-8)


def suite_heat_residual_order(rng, instances=200) -> PropertyResult:
    def one(rng):
        spec = random_graph(rng, max_n=12)
        op = assemble(spec)
        v = rng.uniform(0.0, 1.0, size=op.n)
        errs = []
        for pts in (17, 33):
            ts = np.linspace(0.1, 1.1, pts)
            curve = op.semigroup_curve(ts, v)
            errs.append(heat_residual(op.matrix(), ts, curve).max_abs)
        coarse, fine = errs
        if coarse < 1e-11:
            return 0.0  # below roundoff; nothing to resolve
        ratio = coarse / max(fine, 1e-300)
        return 0.0 if ratio >= 3.0 else (3.0 - ratio)

    return _run("heat-residual-order", rng, instances, one, 1e-12)


ALL_SUITES: Dict[str, Callable] = {
    "domain-monotonicity": suite_domain_monotonicity,
    "positivity-preserving-improving": suite_positivity,
    "markov-bound": suite_markov_bound,
    "resolvent-identity": suite_resolvent_identity,
    "semigroup-property": suite_semigroup_property,
    "greens-identity": suite_greens_identity,
    "normal-contraction": suite_normal_contraction,
    "heat-loss-monotone": suite_heat_loss_monotone,
    "killed-mass-identity": suite_killed_mass_identity,
    "heat-residual-order": suite_heat_residual_order,
}


def run_all(seed: int = 0, instances: int = 200) -> List[PropertyResult]:
    results = []
    for i, (name, suite) in enumerate(ALL_SUITES.items()):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        results.append(suite(rng, instances))
    return results
