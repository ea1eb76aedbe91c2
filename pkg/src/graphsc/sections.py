"""Sparse realization of the Dirichlet operator on a finite section.

The operator on a section K has rows

    A[x][x] = (sum_{y in V} b(x,y) + c(x)) / m(x)        (deficiency included)
    A[x][y] = -b(x,y) / m(x)                              (x != y in K)

It is symmetric in the m-weighted inner product; solves and exponentials are
performed on the plainly symmetric conjugate D^{1/2} A D^{-1/2} (D = diag m),
which is positive semidefinite, so A + alpha I is SPD in that geometry for
every alpha > 0.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import InputError, InternalConsistencyError, SolverError
from .families import Section
from .graphs import GraphSpec, Vertex

DENSE_EIG_CUTOFF = 1400
DIRECT_SOLVE_CUTOFF = 200_000


@dataclass
class SolveResult:
    solution: np.ndarray
    residual: float  # relative infinity-norm residual
    method: str
    iterations: Optional[int] = None


class SectionOperator:
    """Immutable sparse operator over an ordered finite section.

    Factorizations (per alpha) and the dense eigendecomposition are cached
    behind a lock, so concurrent solves against one operator are safe.
    """

    def __init__(self, vertices: Sequence[Vertex], b_entries, c_eff: np.ndarray, m: np.ndarray):
        self.vertices: Tuple[Vertex, ...] = tuple(vertices)
        self.index: Dict[Vertex, int] = {x: i for i, x in enumerate(self.vertices)}
        n = len(self.vertices)
        self.n = n
        self.m = np.asarray(m, dtype=float)
        self.c_eff = np.asarray(c_eff, dtype=float)  # killing + deficiency, per vertex
        rows, cols, vals = b_entries
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        offdiag = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        offdiag.sum_duplicates()
        row_sums = np.asarray(offdiag.sum(axis=1)).ravel()
        diag = (row_sums + self.c_eff) / self.m
        self._A = sp.diags(diag).tocsr() - sp.diags(1.0 / self.m) @ offdiag
        sqm = np.sqrt(self.m)
        self.sqrt_m = sqm
        self._S = (sp.diags(diag) - sp.diags(1.0 / sqm) @ offdiag @ sp.diags(1.0 / sqm)).tocsr()
        self._lock = threading.Lock()
        self._factors: Dict[float, object] = {}
        self._eig: Optional[Tuple[np.ndarray, np.ndarray]] = None

    # -- plumbing ---------------------------------------------------------

    def matrix(self) -> sp.csr_matrix:
        return self._A

    def msym_matrix(self) -> sp.csr_matrix:
        return self._S

    def vector(self, f) -> np.ndarray:
        """Coerce an array / mapping / rule into the section's ordering."""
        if isinstance(f, np.ndarray):
            if f.shape != (self.n,):
                raise InputError(f"vector has shape {f.shape}, expected ({self.n},)")
            return f.astype(float)
        if callable(f):
            return np.array([float(f(x)) for x in self.vertices])
        data = dict(f)
        try:
            return np.array([float(data[x]) for x in self.vertices])
        except KeyError as e:
            raise InputError(f"vector is missing a value at vertex {e.args[0]!r}") from None

    def as_map(self, vec: np.ndarray) -> Dict[Vertex, float]:
        return {x: float(vec[i]) for i, x in enumerate(self.vertices)}

    def to_matrix_market(self, path) -> None:
        """Coordinate-format export of A for external verification."""
        import scipy.io

        scipy.io.mmwrite(str(path), sp.coo_matrix(self._A))

    # -- resolvent ---------------------------------------------------------

    def _factor(self, alpha: float):
        key = float(alpha)
        with self._lock:
            fac = self._factors.get(key)
        if fac is None:
            mat = (self._S + alpha * sp.eye(self.n, format="csr")).tocsc()
            fac = spla.splu(mat)
            with self._lock:
                self._factors[key] = fac
        return fac

    def solve_resolvent(self, alpha: float, f, tol: float = 1e-10, method: str = "auto") -> SolveResult:
        """Solve (A + alpha) u = f.

        The reported residual is the relative infinity-norm
        ||(A+alpha)u - f|| / (||A+alpha|| ||u|| + ||f||), the scale on which a
        backward-stable solve is meaningful for stiff sections.  If f >= 0 the
        solution is checked to be nonnegative (positivity preservation).
        """
        if alpha <= 0:
            raise InputError("alpha must be positive")
        fv = self.vector(f)
        rhs = self.sqrt_m * fv
        if method == "auto":
            method = "direct" if self.n <= DIRECT_SOLVE_CUTOFF else "cg"
        if method == "direct":
            y = self._factor(alpha).solve(rhs)
            iterations = None
        elif method == "cg":
            mat = self._S + alpha * sp.eye(self.n, format="csr")
            dinv = 1.0 / mat.diagonal()
            precond = spla.LinearOperator((self.n, self.n), matvec=lambda v: dinv * v)
            count = [0]

            def cb(_):
                count[0] += 1

            y, info = spla.cg(mat, rhs, rtol=min(1e-12, tol), atol=0.0, maxiter=20 * self.n, M=precond, callback=cb)
            iterations = count[0]
            if info != 0:
                r = mat @ y - rhs
                raise SolverError(
                    f"conjugate gradient did not converge (info={info})",
                    achieved_residual=float(np.max(np.abs(r))),
                )
        else:
            raise InputError(f"unknown solve method {method!r}")
        u = y / self.sqrt_m
        res = self._A @ u + alpha * u - fv
        scale = (float(np.max(np.abs(self._A @ u))) + alpha * float(np.max(np.abs(u))) + float(np.max(np.abs(fv))) + 1e-300)
        rel = float(np.max(np.abs(res))) / scale
        if rel > tol:
            raise SolverError(f"resolvent solve residual {rel:.3e} exceeds tol {tol:.1e}", achieved_residual=rel)
        if np.all(fv >= 0.0):
            floor = -1e-12 * max(1.0, float(np.max(np.abs(u))))
            if float(np.min(u)) < floor:
                raise InternalConsistencyError(
                    f"resolvent of a nonnegative function has negative entry {float(np.min(u)):.3e}"
                )
        return SolveResult(u, rel, method, iterations)

    # -- semigroup ---------------------------------------------------------

    def _eigendecomposition(self):
        with self._lock:
            eig = self._eig
        if eig is None:
            if self.n > DENSE_EIG_CUTOFF:
                raise InternalConsistencyError("dense eigendecomposition requested beyond cutoff")
            w, Q = scipy.linalg.eigh(self._S.toarray())
            w = np.maximum(w, 0.0)  # PSD up to roundoff
            eig = (w, Q)
            with self._lock:
                self._eig = eig
        return eig

    def semigroup_apply(self, t: float, v, tol: float = 1e-8) -> np.ndarray:
        """Action of exp(-t A) on v."""
        return self.semigroup_curve([t], v, tol=tol)[0]

    def semigroup_curve(self, tgrid: Sequence[float], v, tol: float = 1e-8) -> np.ndarray:
        """exp(-t A) v for every t in an increasing grid; shape (len(tgrid), n)."""
        ts = np.asarray(list(tgrid), dtype=float)
        if ts.size == 0:
            return np.zeros((0, self.n))
        if np.any(ts < 0):
            raise InputError("semigroup time must be nonnegative")
        if np.any(np.diff(ts) < 0):
            raise InputError("time grid must be nondecreasing")
        vv = self.vector(v)
        if self.n <= DENSE_EIG_CUTOFF:
            w, Q = self._eigendecomposition()
            coeff = Q.T @ (self.sqrt_m * vv)
            out = np.empty((ts.size, self.n))
            for i, t in enumerate(ts):
                out[i] = (Q @ (np.exp(-t * w) * coeff)) / self.sqrt_m
            return out
        return self._ode_curve(ts, vv, tol=tol, cumulative=False)

    def semigroup_integral_curve(self, tgrid: Sequence[float], g, tol: float = 1e-8) -> np.ndarray:
        """Cumulative integrals int_0^{t_i} exp(-s A) g ds; shape (len(tgrid), n)."""
        ts = np.asarray(list(tgrid), dtype=float)
        gv = self.vector(g)
        if self.n <= DENSE_EIG_CUTOFF:
            w, Q = self._eigendecomposition()
            coeff = Q.T @ (self.sqrt_m * gv)
            out = np.empty((ts.size, self.n))
            for i, t in enumerate(ts):
                factor = np.where(w * t < 1e-8, t * (1.0 - 0.5 * w * t), -np.expm1(-w * t) / np.where(w == 0.0, 1.0, w))
                factor = np.where(w == 0.0, t, factor)
                out[i] = (Q @ (factor * coeff)) / self.sqrt_m
            return out
        return self._ode_curve(ts, gv, tol=tol, cumulative=True)

    def _ode_curve(self, ts: np.ndarray, v: np.ndarray, tol: float, cumulative: bool) -> np.ndarray:
        y0 = self.sqrt_m * v
        S = self._S
        tmax = float(ts[-1])
        if tmax == 0.0:
            base = np.tile(y0, (ts.size, 1))
            out = np.zeros_like(base) if cumulative else base
            return out / self.sqrt_m
        rtol = max(1e-12, tol * 1e-1)
        atol = max(1e-14, tol * 1e-3) * max(1.0, float(np.max(np.abs(y0))))
        if cumulative:
            n = self.n
            Z = sp.csr_matrix((n, n))
            big = sp.bmat([[-S, None], [sp.eye(n), Z]], format="csr")

            def rhs(_t, y):
                return big @ y

            sol = solve_ivp(
                rhs, (0.0, tmax), np.concatenate([y0, np.zeros(n)]),
                method="BDF", jac=big, t_eval=np.unique(np.concatenate([[0.0], ts])),
                rtol=rtol, atol=atol,
            )
            if not sol.success:
                raise SolverError(f"stiff integration failed: {sol.message}")
            lookup = {float(t): sol.y[n:, i] for i, t in enumerate(sol.t)}
        else:
            def rhs(_t, y):
                return -(S @ y)

            sol = solve_ivp(
                rhs, (0.0, tmax), y0, method="BDF", jac=-S,
                t_eval=np.unique(np.concatenate([[0.0], ts])), rtol=rtol, atol=atol,
            )
            if not sol.success:
                raise SolverError(f"stiff integration failed: {sol.message}")
            lookup = {float(t): sol.y[:, i] for i, t in enumerate(sol.t)}
        out = np.empty((ts.size, self.n))
        for i, t in enumerate(ts):
            out[i] = lookup[float(t)] / self.sqrt_m
        return out


def assemble(section, deficiency: Optional[Dict[Vertex, float]] = None) -> SectionOperator:
    """Build the sparse operator of a section (or a bare finite graph).

    Accepts a family Section (its exact deficiency map is used) or a
    GraphSpec with an optional explicit deficiency mapping.
    """
    if isinstance(section, Section):
        spec = section.spec
        d = section.deficiency
    elif isinstance(section, GraphSpec):
        spec = section
        d = deficiency or {}
    else:
        raise InputError("assemble expects a Section or GraphSpec")
    spec.require_valid()
    n = len(spec.vertices)
    idx = {x: i for i, x in enumerate(spec.vertices)}
    rows, cols, vals = [], [], []
    for x in spec.vertices:
        i = idx[x]
        for y, w in spec.neighbors(x):
            rows.append(i)
            cols.append(idx[y])
            vals.append(w)
    c_eff = np.array([spec.c[x] + float(d.get(x, 0.0)) for x in spec.vertices])
    if np.any(c_eff < 0):
        raise InputError("negative killing + deficiency")
    m = np.array([spec.m[x] for x in spec.vertices])
    return SectionOperator(spec.vertices, (rows, cols, vals), c_eff, m)


# ---------------------------------------------------------------------------
# heat-equation residual on a sampled curve


@dataclass
class HeatResidualReport:
    dt: float
    max_abs: float
    per_time: np.ndarray  # max abs residual per interior grid point

    def as_dict(self):
        return {"dt": self.dt, "max_abs": self.max_abs}


def heat_residual(apply_op, tgrid: Sequence[float], curve: np.ndarray, source=None) -> HeatResidualReport:
    """Central-difference residual of d/dt N + A N = source on a uniform grid.

    ``apply_op`` is the operator action (a callable on vectors or a matrix).
    The residual of an exact solution scales as O(dt^2); halving the grid
    spacing should quarter it.
    """
    ts = np.asarray(list(tgrid), dtype=float)
    if ts.size < 3:
        raise InputError("need at least 3 grid points")
    dts = np.diff(ts)
    dt = float(dts[0])
    if np.max(np.abs(dts - dt)) > 1e-9 * max(dt, 1.0):
        raise InputError("time grid must be uniform")
    U = np.asarray(curve, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if U.shape[0] != ts.size:
        raise InputError("curve rows must match the time grid")
    if callable(apply_op):
        apply_vec = apply_op
    else:
        mat = apply_op
        apply_vec = lambda v: mat @ v
    src = np.zeros(U.shape[1]) if source is None else np.asarray(source, dtype=float)
    per = np.empty(ts.size - 2)
    worst = 0.0
    for i in range(1, ts.size - 1):
        dudt = (U[i + 1] - U[i - 1]) / (2.0 * dt)
        r = dudt + apply_vec(U[i]) - src
        per[i - 1] = float(np.max(np.abs(r)))
        worst = max(worst, per[i - 1])
    return HeatResidualReport(dt, worst, per)
