"""Monte Carlo oracle: the minimal jump process with killing.

The chain generated by the operator holds at x for an exponential time with
rate (sum_y b(x,y) + c(x)) / m(x), then jumps to a neighbor with probability
proportional to b(x,.) or is killed with probability c/(sum b + c).  Tallies
estimate the surviving mass exp(-TL)1(x), the killed mass
int_0^T exp(-sL)(c/m)(x) ds and the exploded mass 1 - M_T(x), giving a check
of the analytic machinery that shares none of its code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ._kernels import (
    CODE_ALIVE,
    CODE_CENSORED,
    CODE_EXPLODED,
    CODE_KILLED,
    sim_line,
    sim_table,
)
from .errors import InputError
from .families import GraphFamily
from .graphs import GraphSpec, Vertex

CODE_NAMES = {CODE_ALIVE: "alive", CODE_KILLED: "killed", CODE_EXPLODED: "exploded", CODE_CENSORED: "censored"}


@dataclass(frozen=True)
class ProcessConfig:
    graph: object  # GraphSpec or GraphFamily
    start: Vertex
    horizon: float
    replicas: int
    jump_cap: int = 1_000_000
    seed: int = 0
    line_extent: int = 1 << 17
    explode_safety: float = 10.0
    explode_block: int = 512
    section_level: int = 64  # table fallback for non-line families

    def __post_init__(self):
        if self.horizon <= 0:
            raise InputError("horizon must be positive")
        if self.replicas < 1:
            raise InputError("replicas must be >= 1")
        if self.jump_cap < 1:
            raise InputError("jump cap must be >= 1")


def _binom_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass
class SimResult:
    config: ProcessConfig
    codes: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    vertex_of: Tuple[Vertex, ...]
    censored_extent: bool  # whether the table edge is a censoring surface

    @property
    def n(self) -> int:
        return self.codes.size

    def counts(self) -> Dict[str, int]:
        return {name: int(np.sum(self.codes == code)) for code, name in CODE_NAMES.items()}

    def fraction(self, name: str) -> Tuple[float, float]:
        code = {v: k for k, v in CODE_NAMES.items()}[name]
        p = float(np.mean(self.codes == code))
        return p, _binom_se(p, self.n)

    @property
    def censored_fraction(self) -> float:
        return self.fraction("censored")[0]

    def explosion_fraction(self) -> Tuple[float, float]:
        return self.fraction("exploded")

    def killed_by(self, t: Optional[float] = None) -> Tuple[float, float]:
        mask = self.codes == CODE_KILLED
        if t is not None:
            mask = mask & (self.times <= t)
        p = float(np.mean(mask))
        return p, _binom_se(p, self.n)

    def occupancy(self) -> Dict[Vertex, Tuple[float, float]]:
        """Per-vertex probability of being alive at the final vertex at the horizon."""
        alive = self.codes == CODE_ALIVE
        out: Dict[Vertex, Tuple[float, float]] = {}
        pos = self.positions[alive]
        if pos.size:
            counts = np.bincount(pos, minlength=len(self.vertex_of))
            for i, tag in enumerate(self.vertex_of):
                p = counts[i] / self.n
                if counts[i] or True:
                    out[tag] = (float(p), _binom_se(float(p), self.n))
        else:
            out = {tag: (0.0, 0.0) for tag in self.vertex_of}
        return out

    def summary(self) -> dict:
        cts = self.counts()
        expl, expl_se = self.explosion_fraction()
        return {
            "replicas": self.n,
            "horizon": self.config.horizon,
            "seed": self.config.seed,
            "jump_cap": self.config.jump_cap,
            "counts": cts,
            "fractions": {k: v / self.n for k, v in cts.items()},
            "explosion_fraction": expl,
            "explosion_se": expl_se,
            "censored_fraction": self.censored_fraction,
            "censored_warning": self.censored_fraction > 1e-3,
        }


def _line_tables(family: GraphFamily, config: ProcessConfig):
    line = family.line
    extent = int(config.line_extent)
    if line.kind == "half":
        shift = 0
        lo_open = False
    else:
        shift = extent // 2
        lo_open = True
    bedge = np.empty(extent - 1)
    cvec = np.empty(extent)
    mvec = np.empty(extent)
    for i in range(extent):
        real = i - shift
        cvec[i] = family.killing(real)
        mvec[i] = family.measure(real)
    for i in range(extent - 1):
        bedge[i] = line.edge(i - shift)
    # clamp to the span where the measure stays representable
    valid = mvec > 0.0
    start_idx = int(config.start) + shift
    if not (0 <= start_idx < extent):
        raise InputError("start vertex outside the simulation table")
    lo = start_idx
    while lo > 0 and valid[lo - 1]:
        lo -= 1
    hi = start_idx
    while hi < extent - 1 and valid[hi + 1]:
        hi += 1
    if lo > 0 or hi < extent - 1:
        bedge = bedge[lo:hi]
        cvec = cvec[lo : hi + 1]
        mvec = mvec[lo : hi + 1]
        start_idx -= lo
        lo_open = True  # clipped table: both edges censor
    tags = tuple(range(lo - shift, hi - shift + 1))
    return bedge, cvec, mvec, start_idx, lo_open, tags


def _spec_tables(spec: GraphSpec, deficiency: Optional[dict] = None):
    spec.require_valid()
    idx = {x: i for i, x in enumerate(spec.vertices)}
    indptr = [0]
    nbr = []
    cum = []
    for x in spec.vertices:
        acc = 0.0
        for y, w in spec.neighbors(x):
            acc += w
            nbr.append(idx[y])
            cum.append(acc)
        indptr.append(len(nbr))
    cvec = np.array([spec.c[x] for x in spec.vertices])
    mvec = np.array([spec.m[x] for x in spec.vertices])
    esc = np.array([float((deficiency or {}).get(x, 0.0)) for x in spec.vertices])
    return (
        np.array(indptr, dtype=np.int64),
        np.array(nbr, dtype=np.int64),
        np.array(cum, dtype=np.float64),
        cvec,
        mvec,
        esc,
    )


def simulate(config: ProcessConfig) -> SimResult:
    """Run the jump process; deterministic for a fixed config (per-replica
    streams are derived from the master seed, so tallies do not depend on
    thread scheduling)."""
    n = config.replicas
    seeds = np.random.SeedSequence(config.seed).generate_state(n, dtype=np.uint64)
    out_code = np.empty(n, dtype=np.uint8)
    out_time = np.empty(n, dtype=np.float64)
    out_pos = np.empty(n, dtype=np.int64)
    out_jumps = np.empty(n, dtype=np.int64)

    graph = config.graph
    if isinstance(graph, GraphFamily) and graph.line is not None:
        bedge, cvec, mvec, start_idx, lo_open, tags = _line_tables(graph, config)
        sim_line(
            bedge, cvec, mvec, start_idx, lo_open,
            float(config.horizon), int(config.jump_cap), True,
            float(config.explode_safety), int(config.explode_block),
            seeds, out_code, out_time, out_pos, out_jumps,
        )
        return SimResult(config, out_code, out_time, out_pos, tags, True)
    if isinstance(graph, GraphFamily):
        if graph.cover_level is not None:
            sec = graph.section(graph.cover_level)
        else:
            sec = graph.section(config.section_level)
        indptr, nbr, cum, cvec, mvec, esc = _spec_tables(sec.spec, sec.deficiency)
        spec = sec.spec
        start_idx = spec.index(config.start)
        sim_table(
            indptr, nbr, cum, cvec, mvec, esc, start_idx,
            float(config.horizon), int(config.jump_cap),
            seeds, out_code, out_time, out_pos, out_jumps,
        )
        return SimResult(config, out_code, out_time, out_pos, spec.vertices, bool(np.any(esc > 0)))
    if isinstance(graph, GraphSpec):
        indptr, nbr, cum, cvec, mvec, esc = _spec_tables(graph)
        start_idx = graph.index(config.start)
        sim_table(
            indptr, nbr, cum, cvec, mvec, esc, start_idx,
            float(config.horizon), int(config.jump_cap),
            seeds, out_code, out_time, out_pos, out_jumps,
        )
        return SimResult(config, out_code, out_time, out_pos, graph.vertices, False)
    raise InputError("config.graph must be a GraphSpec or GraphFamily")


@dataclass
class MCurve:
    tgrid: np.ndarray
    M_hat: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    exploded_by: np.ndarray
    censored_by: np.ndarray

    def as_dict(self):
        return {
            "tgrid": self.tgrid.tolist(),
            "M_hat": self.M_hat.tolist(),
            "band_lo": self.band_lo.tolist(),
            "band_hi": self.band_hi.tolist(),
        }


def estimate_M_curve(config: ProcessConfig, tgrid: Sequence[float], z: float = 1.96) -> Tuple[SimResult, MCurve]:
    """Empirical retained-mass curve: alive-at-t plus killed-by-t.

    Killed mass counts as retained; losses are explosions.  Censored paths
    are alive up to their censoring time and unresolved afterwards, which
    widens the lower band.
    """
    res = simulate(config)
    ts = np.asarray(list(tgrid), dtype=float)
    expl_t = np.sort(res.times[res.codes == CODE_EXPLODED])
    cens_t = np.sort(res.times[res.codes == CODE_CENSORED])
    n = res.n
    exploded_by = np.searchsorted(expl_t, ts, side="right") / n
    censored_by = np.searchsorted(cens_t, ts, side="right") / n
    M = 1.0 - exploded_by
    se = np.array([_binom_se(p, n) for p in exploded_by])
    lo = M - censored_by - z * se
    hi = np.minimum(M + z * se, 1.0)
    return res, MCurve(ts, M, lo, hi, exploded_by, censored_by)
