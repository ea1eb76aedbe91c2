"""Batch front door.

Exit codes: 0 success, 1 domain failure (validation violations, failed
checks, solver breakdown), 2 unreadable or malformed inputs, 3 internal
consistency failure (a bug: monotonicity or equivalence-table violations).

Every command writes a RunManifest into the output directory and stamps its
hash into every output file; replaying a manifest byte-reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, InternalConsistencyError, SolverError
from .exhaustion import Schedule, write_trace_csv
from .families import build_supergraph, build_supergraph_single_vertex, explicit_family
from .formal import check_condition_A, residual
from .graphs import dirichlet_subgraph
from . import completeness as comp
from . import io as gio
from . import mc as gmc
from . import properties as props

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _parse_levels(text: str):
    if ":" in text:
        a, b = text.split(":", 1)
        return Schedule.doubling(int(a), int(b)).levels
    return tuple(int(v) for v in text.split(","))


def _parse_alphas(text: str):
    return tuple(float(v) for v in text.split(","))


def _parse_probes(text: str):
    return tuple(int(v) for v in text.split(","))


def _parse_tgrid(text: str) -> np.ndarray:
    a, b, n = text.split(":")
    return np.linspace(float(a), float(b), int(n))


def _outdir(ns) -> Path:
    import os

    out = Path(ns.out or os.environ.get("GRAPHSC_OUT", "graphsc_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _schedule(ns, family):
    from .exhaustion import default_schedule

    kw = {}
    if getattr(ns, "tol", None) is not None:
        kw["tol"] = ns.tol
    if getattr(ns, "levels", None):
        return Schedule(_parse_levels(ns.levels), **kw)
    return default_schedule(family, **kw)


def _start_manifest(ns, command: str, outdir: Path) -> str:
    params = {k: v for k, v in vars(ns).items() if k not in ("func", "out") and v is not None}
    manifest = gio.make_manifest(command, params)
    mhash = gio.manifest_hash(manifest)
    gio.write_json(outdir / "manifest.json", manifest, mhash)
    return mhash


# ---------------------------------------------------------------------------
# commands


def cmd_validate(ns) -> int:
    spec = gio.load_graph(ns.graph)
    report = spec.validate()
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_probe(ns) -> int:
    family = gio.load_family(ns.family)
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "probe", outdir)
    alphas = _parse_alphas(ns.alpha)
    probes = _parse_probes(ns.probes) if ns.probes else None
    schedule = _schedule(ns, family)
    report = comp.classify(family, alphas, probes, schedule, eps=ns.eps)
    tables = {}
    consistent = True
    for a in alphas:
        table = comp.verify_equivalences(family, a, probes=probes, schedule=schedule, eps=ns.eps)
        tables[str(a)] = table.as_dict()
        consistent = consistent and table.consistent
    payload = {
        "family": family.name,
        "classification": report.classification,
        "report": report.as_dict(),
        "equivalences": tables,
        "condition_A": check_condition_A(family).verdict,
    }
    gio.write_json(outdir / "probe_report.json", payload, mhash)
    for a in alphas:
        write_trace_csv(report.w_reports[a].limit, outdir / f"w_trace_alpha{a:g}.csv", mhash)
    print(f"classification: {report.classification}")
    for a in alphas:
        wf = report.w_reports[a].w_final
        print(f"  alpha={a:g}: w_final=" + ", ".join(f"{k!r}:{v:.3e}" for k, v in wf.items()))
    print(f"equivalence tables consistent: {consistent}")
    print(f"report: {outdir / 'probe_report.json'}")
    return EXIT_OK if consistent else EXIT_INTERNAL


def cmd_heat(ns) -> int:
    family = gio.load_family(ns.family)
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "heat", outdir)
    tgrid = _parse_tgrid(ns.tgrid)
    probes = _parse_probes(ns.probes) if ns.probes else None
    schedule = _schedule(ns, family)
    curve = comp.compute_M(family, tgrid, probes, schedule)
    rows = []
    for p in curve.probes:
        for i, t in enumerate(curve.tgrid):
            rows.append([repr(p), t, curve.M[p][i], curve.survival[p][i], curve.killed[p][i]])
    gio.write_csv(outdir / "heat_curve.csv", ["probe", "t", "M", "survival", "killed"], rows, mhash)
    gio.write_json(outdir / "heat_report.json", curve.as_dict(), mhash)
    print(f"levels used: {curve.levels}; heat residual max {curve.heat_residual_max:.3e}")
    print(f"curve: {outdir / 'heat_curve.csv'}")
    return EXIT_OK


def cmd_supergraph(ns) -> int:
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "supergraph", outdir)
    try:
        base = gio.load_family(ns.base)
    except InputError:
        base = explicit_family(gio.load_graph(ns.base))
    sg = build_supergraph_single_vertex(base) if ns.single_vertex else build_supergraph(base)
    path = outdir / "supergraph_family.json"
    gio.write_json(path, gio.family_to_dict(sg), mhash)
    print(f"family: {path}")
    return EXIT_OK


def cmd_subgraph(ns) -> int:
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "subgraph", outdir)
    spec = gio.load_graph(ns.graph)
    keep = []
    by_str = {str(v): v for v in spec.vertices}
    for raw in ns.keep.split(","):
        if raw not in by_str:
            raise InputError(f"--keep references unknown vertex {raw!r}")
        keep.append(by_str[raw])
    sub = dirichlet_subgraph(spec, keep)
    path = outdir / "subgraph.json"
    gio.write_json(path, gio.graph_to_dict(sub.spec), mhash)
    print(f"graph: {path}")
    return EXIT_OK


def cmd_simulate(ns) -> int:
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "simulate", outdir)
    try:
        graph = gio.load_family(ns.graph)
        start = int(ns.start)
    except InputError:
        graph = gio.load_graph(ns.graph)
        by_str = {str(v): v for v in graph.vertices}
        start = by_str.get(ns.start, ns.start)
    config = gmc.ProcessConfig(
        graph=graph, start=start, horizon=ns.horizon, replicas=ns.replicas,
        jump_cap=ns.jump_cap, seed=ns.seed,
    )
    if ns.tgrid:
        res, curve = gmc.estimate_M_curve(config, _parse_tgrid(ns.tgrid))
        rows = [
            [t, m, lo, hi]
            for t, m, lo, hi in zip(curve.tgrid, curve.M_hat, curve.band_lo, curve.band_hi)
        ]
        gio.write_csv(outdir / "mc_curve.csv", ["t", "M_hat", "band_lo", "band_hi"], rows, mhash)
    else:
        res = gmc.simulate(config)
    summary = res.summary()
    gio.write_json(outdir / "mc_summary.json", summary, mhash)
    print(json.dumps(gio._jsonable(summary), indent=2))
    if summary["censored_warning"]:
        print("warning: censored fraction exceeds 0.1%; explosion estimates are biased downward", file=sys.stderr)
    return EXIT_OK


def cmd_counterexample(ns) -> int:
    outdir = _outdir(ns)
    mhash = _start_manifest(ns, "counterexample", outdir)
    from .families import jacobi_counterexample

    fam = jacobi_counterexample(ns.lam)
    lam, alpha = ns.lam, fam.params["alpha"]
    u = lambda x: np.exp(lam * x)
    window = list(range(-50, 51))
    rep = residual(fam, u, alpha, at=window)
    sums_mu2 = float(sum(fam.measure(x) * u(x) ** 2 for x in window))
    sums_w = float(sum(2.0 ** (-abs(x)) for x in range(-200, 201)))
    payload = {
        "family": gio.family_to_dict(fam),
        "alpha": alpha,
        "residual_max_rel": rep.max_rel,
        "l2m_partial_sum": sums_mu2,
        "weight_total": sums_w,
        "condition_A": check_condition_A(fam).verdict,
    }
    gio.write_json(outdir / "counterexample.json", payload, mhash)
    gio.write_json(outdir / "jacobi_family.json", gio.family_to_dict(fam), mhash)
    print(f"alpha = {alpha!r}; max relative residual on [-50, 50] = {rep.max_rel:.3e}")
    print(f"family: {outdir / 'jacobi_family.json'}")
    return EXIT_OK


def cmd_selfcheck(ns) -> int:
    results = props.run_all(seed=ns.seed, instances=ns.instances)
    failures = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"[{status}] {r.name}: {r.instances} instances, {r.failures} failures, max_err={r.max_err:.3e} {r.note}")
        failures += r.failures
    return EXIT_OK if failures == 0 else EXIT_DOMAIN


def cmd_replay(ns) -> int:
    try:
        manifest = json.loads(Path(ns.manifest).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read manifest: {e}") from None
    command = manifest["command"]
    params = manifest["params"]
    argv = [command]
    positional = {
        "validate": ["graph"], "probe": ["family"], "heat": ["family"],
        "supergraph": ["base"], "subgraph": ["graph"], "simulate": ["graph"],
        "counterexample": [], "selfcheck": [],
    }[command]
    for name in positional:
        argv.append(str(params[name]))
    for key, value in params.items():
        if key in positional:
            continue
        flag = "--" + key.replace("_", "-")
        if key == "lam":
            flag = "--lambda"
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    if ns.out:
        argv.extend(["--out", ns.out])
    return main(argv)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphsc", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"graphsc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=None, help="output directory (default $GRAPHSC_OUT or ./graphsc_out)")

    p = sub.add_parser("validate", help="check the graph axioms of a spec file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("probe", help="classify a family and verify the equivalence table")
    p.add_argument("family", help="builtin name or family JSON path")
    p.add_argument("--alpha", default="0.5,1,2")
    p.add_argument("--levels", default=None, help="comma list or start:stop doubling")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--probes", default=None, help="comma list of integer vertices")
    add_out(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("heat", help="heat-loss curve M_t at probes")
    p.add_argument("family")
    p.add_argument("--tgrid", default="0:8:129", help="start:stop:points")
    p.add_argument("--levels", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--probes", default=None)
    add_out(p)
    p.set_defaults(func=cmd_heat)

    p = sub.add_parser("supergraph", help="emit the complete-supergraph family of a base")
    p.add_argument("base", help="family name/JSON or graph JSON")
    p.add_argument("--single-vertex", action="store_true", dest="single_vertex")
    add_out(p)
    p.set_defaults(func=cmd_supergraph)

    p = sub.add_parser("subgraph", help="Dirichlet restriction of a graph file")
    p.add_argument("graph")
    p.add_argument("--keep", required=True, help="comma list of vertex ids to keep")
    add_out(p)
    p.set_defaults(func=cmd_subgraph)

    p = sub.add_parser("simulate", help="Monte Carlo jump process with killing")
    p.add_argument("graph", help="family name/JSON or graph JSON")
    p.add_argument("--start", default="0")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--replicas", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jump-cap", type=int, default=1_000_000, dest="jump_cap")
    p.add_argument("--tgrid", default=None, help="also write an empirical M curve")
    add_out(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("counterexample", help="the tailored eigenfunction family on Z")
    p.add_argument("--lambda", type=float, default=1.0, dest="lam")
    add_out(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("selfcheck", help="run every randomized property suite")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    add_out(p)
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        return ns.func(ns)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_IO
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except InternalConsistencyError as e:
        print(f"internal consistency failure: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
