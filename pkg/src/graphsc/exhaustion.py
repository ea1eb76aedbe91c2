"""Monotone limits of resolvents and semigroups along nested sections.

For nonnegative data the section values increase with the section (domain
monotonicity), so every recorded value is a certified lower bound on the
limit.  Levels are reported with honest "bound" semantics; convergence is
declared only when the gap between consecutive (by default doubling) levels
stays below the plateau threshold twice in a row.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, InternalConsistencyError
from .families import GraphFamily, Section
from .formal import apply_formal, as_rule
from .graphs import Vertex
from .sections import SectionOperator, assemble


@dataclass(frozen=True)
class Schedule:
    """Increasing section levels plus the numeric knobs of a limit run."""

    levels: Tuple[int, ...]
    tol: float = 1e-10
    plateau_gap: float = 1e-6
    ceiling: float = 1e12
    semigroup_tol: float = 1e-8

    def __post_init__(self):
        if not self.levels:
            raise InputError("schedule needs at least one level")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise InputError("schedule levels must be strictly increasing")

    @staticmethod
    def doubling(start: int = 16, stop: int = 4096, **kw) -> "Schedule":
        levels = []
        n = start
        while n <= stop:
            levels.append(n)
            n *= 2
        return Schedule(tuple(levels), **kw)


def default_schedule(family: GraphFamily, **kw) -> Schedule:
    if family.cover_level is not None:
        return Schedule((family.cover_level,), **kw)
    if family.template == "supergraph":
        return Schedule.doubling(4, 64, **kw)
    if family.template == "jacobi":
        return Schedule.doubling(8, 128, **kw)
    if family.template == "tree":
        return Schedule((2, 3, 4, 5, 6), **kw)
    return Schedule.doubling(16, 4096, **kw)


@dataclass
class LimitStatus:
    kind: str  # "exact" | "converged" | "still-rising" | "diverging"
    value: float
    gap: Optional[float] = None

    def as_dict(self):
        return {"kind": self.kind, "value": self.value, "gap": self.gap}


@dataclass
class MonotoneLimit:
    probes: Tuple[Vertex, ...]
    schedule: Schedule
    levels: List[int] = field(default_factory=list)
    sizes: List[int] = field(default_factory=list)
    probe_levels: Dict[Vertex, List[int]] = field(default_factory=dict)
    values: Dict[Vertex, List[float]] = field(default_factory=dict)
    statuses: Dict[Vertex, LimitStatus] = field(default_factory=dict)
    monotone_checked: bool = True

    def final(self, probe: Vertex) -> float:
        return self.values[probe][-1]

    def status(self, probe: Vertex) -> LimitStatus:
        return self.statuses[probe]

    def rows(self):
        """(level, section size, probe, value, gap) rows for CSV export."""
        out = []
        size_of = dict(zip(self.levels, self.sizes))
        for probe in self.probes:
            vals = self.values.get(probe, [])
            lvls = self.probe_levels.get(probe, [])
            prev = None
            for lvl, v in zip(lvls, vals):
                gap = None if prev is None else v - prev
                out.append((lvl, size_of.get(lvl), probe, v, gap))
                prev = v
        return out

    def as_dict(self):
        return {
            "levels": self.levels,
            "sizes": self.sizes,
            "statuses": {repr(p): self.statuses[p].as_dict() for p in self.probes},
            "values": {repr(p): self.values.get(p, []) for p in self.probes},
        }


def _status_of(family, schedule, level, vals) -> LimitStatus:
    last = vals[-1]
    if family.cover_level is not None and level >= family.cover_level:
        return LimitStatus("exact", last, 0.0)
    if abs(last) > schedule.ceiling:
        return LimitStatus("diverging", last, None)
    if len(vals) >= 3:
        g1 = abs(vals[-2] - vals[-3])
        g2 = abs(vals[-1] - vals[-2])
        if g1 < schedule.plateau_gap and g2 < schedule.plateau_gap:
            return LimitStatus("converged", last, g2)
    return LimitStatus("still-rising", last, abs(vals[-1] - vals[-2]) if len(vals) >= 2 else None)


def run_monotone_levels(
    family: GraphFamily,
    probes: Sequence[Vertex],
    schedule: Schedule,
    values_at: Callable[[Section, SectionOperator], np.ndarray],
    monotone: bool = True,
) -> MonotoneLimit:
    """Drive ``values_at`` over the schedule's sections, recording probe values.

    Raises if monotonicity fails beyond twice the solver tolerance (that
    signals a bug, not roundoff), and stops early once every probe has
    reached a terminal status.
    """
    probes = tuple(probes)
    lim = MonotoneLimit(probes, schedule)
    for probe in probes:
        lim.values[probe] = []
        lim.probe_levels[probe] = []
    for level in schedule.levels:
        sec = family.solver_section(level)
        op = assemble(sec)
        vec = values_at(sec, op)
        lim.levels.append(level)
        lim.sizes.append(op.n)
        done = True
        for probe in probes:
            i = op.index.get(probe)
            if i is None:
                done = False
                continue
            v = float(vec[i])
            vals = lim.values[probe]
            if monotone and vals and v < vals[-1] - 2.0 * schedule.tol * max(1.0, abs(v)):
                raise InternalConsistencyError(
                    f"monotonicity violated at probe {probe!r}: {vals[-1]!r} -> {v!r} (level {level})"
                )
            vals.append(v)
            lim.probe_levels[probe].append(level)
            st = _status_of(family, schedule, level, vals)
            lim.statuses[probe] = st
            if st.kind == "still-rising":
                done = False
        if family.cover_level is not None and level >= family.cover_level:
            break
        if done and all(p in lim.statuses for p in probes):
            break
    missing = [p for p in probes if not lim.values[p]]
    if missing:
        raise InputError(f"probes {missing!r} never appeared in the scheduled sections")
    lim.monotone_checked = monotone
    return lim


def _split_rule(f):
    rule = as_rule(f)
    pos = lambda x: max(rule(x), 0.0)
    neg = lambda x: max(-rule(x), 0.0)
    return rule, pos, neg


def extended_resolvent(
    family: GraphFamily,
    alpha: float,
    f,
    probes: Sequence[Vertex],
    schedule: Optional[Schedule] = None,
) -> MonotoneLimit:
    """Pointwise-monotone limit of section resolvents (A_n + alpha)^{-1} f.

    ``f`` is a rule over vertex tags, restricted to each section and extended
    by zero.  Nonnegative f gives increasing values; general f is handled by
    splitting into positive and negative parts (the combined values are then
    reported without a monotonicity claim).
    """
    if alpha <= 0:
        raise InputError("alpha must be positive")
    schedule = schedule or default_schedule(family)
    rule, pos, neg = _split_rule(f)

    def values_pos(sec, op):
        return op.solve_resolvent(alpha, pos, tol=schedule.tol).solution

    probe_signs = _rule_signs(family, rule, schedule)
    if probe_signs >= 0:
        return run_monotone_levels(family, probes, schedule, values_pos)

    def values_both(sec, op):
        up = op.solve_resolvent(alpha, pos, tol=schedule.tol).solution
        un = op.solve_resolvent(alpha, neg, tol=schedule.tol).solution
        return up - un

    return run_monotone_levels(family, probes, schedule, values_both, monotone=False)


def _rule_signs(family, rule, schedule) -> int:
    """-1 if the rule is negative somewhere on the largest scheduled section."""
    sec = family.solver_section(schedule.levels[-1])
    return -1 if any(rule(x) < 0.0 for x in sec.spec.vertices) else 1


def extended_semigroup(
    family: GraphFamily,
    t: float,
    f,
    probes: Sequence[Vertex],
    schedule: Optional[Schedule] = None,
) -> MonotoneLimit:
    """Pointwise-monotone limit of section semigroups exp(-t A_n) f (f >= 0 bounded)."""
    if t < 0:
        raise InputError("time must be nonnegative")
    schedule = schedule or default_schedule(family)
    rule, pos, neg = _split_rule(f)

    def values_pos(sec, op):
        return op.semigroup_curve([t], pos, tol=schedule.semigroup_tol)[0]

    if _rule_signs(family, rule, schedule) >= 0:
        return run_monotone_levels(family, probes, schedule, values_pos)

    def values_both(sec, op):
        a = op.semigroup_curve([t], pos, tol=schedule.semigroup_tol)[0]
        b = op.semigroup_curve([t], neg, tol=schedule.semigroup_tol)[0]
        return a - b

    return run_monotone_levels(family, probes, schedule, values_both, monotone=False)


@dataclass
class ExcessiveReport:
    status: str  # "pass" | "fail" | "hypotheses-not-met"
    max_violation: float
    detail: str = ""

    @property
    def passed(self):
        return self.status == "pass"


def excessive_check(
    family: GraphFamily,
    u,
    probes: Sequence[Vertex],
    t_list: Sequence[float] = (0.5, 1.0, 2.0),
    alpha_list: Sequence[float] = (0.5, 1.0, 2.0),
    schedule: Optional[Schedule] = None,
    window_level: Optional[int] = None,
    tol: float = 1e-8,
) -> ExcessiveReport:
    """Check the two equivalent supermedian bounds for u >= 0 with L u >= 0.

    First verifies L u >= 0 on a window by direct application of the formal
    operator (otherwise "hypotheses-not-met"), then checks
    exp(-tL) u <= u and alpha (L+alpha)^{-1} u <= u at the probes, with the
    extended operators realized as monotone limits.  The verification is
    one-sided: it certifies the inequality at every computed level.
    """
    schedule = schedule or default_schedule(family)
    rule = as_rule(u)
    wl = window_level or schedule.levels[0]
    window = family.section(wl).spec.vertices
    lu = apply_formal(family, rule, at=window)
    bad = min(lu.values())
    if bad < -tol:
        return ExcessiveReport("hypotheses-not-met", -bad, "L u < 0 on the window")
    if any(rule(x) < -tol for x in window):
        return ExcessiveReport("hypotheses-not-met", 0.0, "u < 0 on the window")
    worst = 0.0
    for alpha in alpha_list:
        lim = extended_resolvent(family, alpha, rule, probes, schedule)
        for p in probes:
            for v in lim.values[p]:
                worst = max(worst, alpha * v - rule(p))
    for t in t_list:
        lim = extended_semigroup(family, t, rule, probes, schedule)
        for p in probes:
            for v in lim.values[p]:
                worst = max(worst, v - rule(p))
    if worst > tol:
        return ExcessiveReport("fail", worst, "supermedian bound violated")
    return ExcessiveReport("pass", max(worst, 0.0))


def write_trace_csv(limit: MonotoneLimit, path, manifest_hash: Optional[str] = None) -> None:
    """Per-level trace: level, section size, probe, value, gap."""
    with open(path, "w", newline="") as fh:
        if manifest_hash:
            fh.write(f"# manifest_hash={manifest_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["level", "size", "probe", "value", "gap"])
        for level, size, probe, value, gap in limit.rows():
            writer.writerow([level, size, repr(probe), f"{value!r}", "" if gap is None else f"{gap!r}"])
