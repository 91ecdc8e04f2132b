"""Cyclic projection solver with sparse dual storage and
dual-certificate stopping.

The regularized objective is Q(x) = c.x + (1/2) x.W_g x with
W_g = W/gamma.  Starting from the unconstrained minimizer
x = -gamma W^{-1} c, each pass visits every constraint once: the stored
dual from the previous pass is first added back (correction), then the
point is projected onto the constraint's half-space (hyperplane for the
equality row) and the new multiplier, if nonzero, is appended to the
current store.  The dual objective D(y) = -b.y - (1/2) x.W_g x is a
nondecreasing lower bound on Q and drives the stopping rule.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import kernels as _kernels
from .problems import (
    Box,
    CouplingAbs,
    Problem,
    SumEq,
    TriangleAll,
    TriangleOnCliques,
    TrianglePerimeter,
    WedgeLower,
    total_constraints,
)

_GAP_FLOOR = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Stopping tolerances and schedule.

    gamma overrides the problem's regularization strength when set.
    tol_con defaults to 1e-8; large correlation-clustering runs may
    loosen it to 1e-2.  round_digits is the ascending list of
    significant-figure counts tried when rounding; full_check_period is
    the pass interval between full violation scans away from
    convergence.
    """

    gamma: float | None = None
    tol_gap: float = 1e-4
    tol_con: float = 1e-8
    max_passes: int = 10000
    round_digits: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)
    full_check_period: int = 10
    backend: str | None = None

    def __post_init__(self):
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.tol_gap <= 0 or self.tol_con <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")
        if self.full_check_period < 1:
            raise ValueError("full_check_period must be at least 1")
        rd = tuple(self.round_digits)
        if not rd or any(b <= a for a, b in zip(rd, rd[1:])) or rd[0] < 1:
            raise ValueError("round_digits must be nonempty and strictly ascending")
        object.__setattr__(self, "round_digits", rd)


class DualStore:
    """Two flat arrays of (t, y_t) pairs: the previous pass's nonzero
    duals (strictly increasing in t, consumed by an advancing cursor)
    and the current pass's appends.  Swapped at the end of each pass."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.prev_t = np.empty(capacity, dtype=np.int64)
        self.prev_y = np.empty(capacity, dtype=np.float64)
        self.prev_len = 0
        self.curr_t = np.empty(capacity, dtype=np.int64)
        self.curr_y = np.empty(capacity, dtype=np.float64)
        self.curr_len = 0

    def swap(self):
        self.prev_t, self.curr_t = self.curr_t, self.prev_t
        self.prev_y, self.curr_y = self.curr_y, self.prev_y
        self.prev_len = self.curr_len
        self.curr_len = 0

    @property
    def nnz(self) -> int:
        return self.prev_len

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.prev_t[: self.prev_len], self.prev_y[: self.prev_len]


def _family_plan(fam, t0: int):
    if isinstance(fam, TriangleAll):
        P = fam.n * (fam.n - 1) // 2
        d = fam.d if fam.d is not None else np.zeros(P, dtype=np.float64)
        return ("triangle_all", t0, fam.count, (np.ascontiguousarray(d, dtype=np.float64), fam.n))
    if isinstance(fam, TriangleOnCliques):
        return ("triangle_cliques", t0, fam.count, (np.ascontiguousarray(fam.var_rows),))
    if isinstance(fam, TrianglePerimeter):
        return ("perimeter", t0, fam.count, (fam.n, float(fam.bound)))
    if isinstance(fam, WedgeLower):
        return ("wedges", t0, fam.count, (np.ascontiguousarray(fam.var_rows),))
    if isinstance(fam, CouplingAbs):
        return ("coupling", t0, fam.count, (fam.num_pairs,))
    if isinstance(fam, Box):
        return ("box", t0, fam.count, (fam.num_vars, float(fam.lo), float(fam.hi)))
    if isinstance(fam, SumEq):
        return ("sumeq", t0, fam.count, (fam.num_vars, float(fam.target)))
    raise TypeError(f"unknown constraint family {type(fam).__name__}")


class SolverState:
    """Mutable solve state: primal x, sparse dual store, incremental
    b'y accumulator, pass counter, and cached per-family dispatch data.

    Not thread-safe during a pass; ownership is single-threaded.
    """

    def __init__(self, problem: Problem, gamma: float | None = None,
                 backend: str | None = None):
        self.problem = problem
        self.gamma = float(gamma) if gamma is not None else problem.gamma
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        self.kern = _kernels.get_kernels(backend)
        self.backend = self.kern.name
        self.invw = self.gamma / problem.w
        self.wg = problem.w / self.gamma
        # x = -gamma W^{-1} c, the unconstrained minimizer of Q
        self.x = -self.invw * problem.c
        self.num_constraints = total_constraints(problem)
        self.store = DualStore(self.num_constraints)
        self.bty = 0.0
        self.passes = 0
        self.projections = 0
        self.peak_store = 0
        self.plans = []
        t0 = 0
        for fam in problem.families:
            plan = _family_plan(fam, t0)
            self.plans.append(plan)
            t0 += plan[2]
        self.stats: dict = {}


def init_state(p: Problem, gamma: float | None = None,
               backend: str | None = None) -> SolverState:
    return SolverState(p, gamma=gamma, backend=backend)


def full_pass(s: SolverState) -> dict:
    """Visit every constraint once in the global order; swap the dual
    store; return counts for this pass."""
    ds = s.store
    kern = s.kern
    x, invw = s.x, s.invw
    cur = 0
    clen = 0
    bty = 0.0
    nproj = 0
    for tag, t0, _count, args in s.plans:
        common = (ds.prev_t, ds.prev_y, ds.prev_len, cur,
                  ds.curr_t, ds.curr_y, clen, bty)
        if tag == "triangle_all":
            d, n = args
            cur, clen, bty, np_ = kern.sweep_triangle_all(x, invw, d, n, t0, *common)
        elif tag == "triangle_cliques":
            (rows,) = args
            cur, clen, bty, np_ = kern.sweep_triangle_cliques(x, invw, rows, t0, *common)
        elif tag == "perimeter":
            n, bound = args
            cur, clen, bty, np_ = kern.sweep_perimeter(x, invw, n, bound, t0, *common)
        elif tag == "wedges":
            (rows,) = args
            cur, clen, bty, np_ = kern.sweep_wedges(x, invw, rows, t0, *common)
        elif tag == "coupling":
            (npairs,) = args
            cur, clen, bty, np_ = kern.sweep_coupling(x, invw, npairs, t0, *common)
        elif tag == "box":
            nv, lo, hi = args
            cur, clen, bty, np_ = kern.sweep_box(x, invw, nv, lo, hi, t0, *common)
        else:
            nv, target = args
            cur, clen, bty, np_ = kern.sweep_sumeq(x, invw, nv, target, t0, *common)
        nproj += np_
    ds.curr_len = clen
    ds.swap()
    s.bty = bty
    s.passes += 1
    s.projections += nproj
    s.peak_store = max(s.peak_store, ds.nnz)
    return {"projections": nproj, "stored": ds.nnz, "bty": bty}


def objectives(s: SolverState) -> tuple[float, float, float]:
    """(Q, D, omega): primal objective, dual objective for the current
    store, and the relative gap (Q - D)/max(|D|, floor)."""
    Q, D = _objectives_of(s, s.x)
    omega = (Q - D) / max(abs(D), _GAP_FLOOR)
    s.stats.update(Q=Q, D=D, omega=omega)
    return Q, D, omega


def _objectives_of(s: SolverState, x: np.ndarray) -> tuple[float, float]:
    quad = float(np.dot(x * s.wg, x))
    Q = float(np.dot(s.problem.c, x)) + 0.5 * quad
    D = -s.bty - 0.5 * quad
    return Q, D


def max_violation(s: SolverState, early_exit_at: float | None = None,
                  x: np.ndarray | None = None) -> float:
    """Worst positive residual a.x - b over all constraints (absolute
    residual for the equality row).  With early_exit_at set, returns the
    first violation found above that threshold without finishing the
    scan."""
    if x is None:
        x = s.x
    limit = early_exit_at if early_exit_at is not None else np.inf
    kern = s.kern
    rho = 0.0
    for tag, _t0, _count, args in s.plans:
        if tag == "triangle_all":
            d, n = args
            r = kern.viol_triangle_all(x, d, n, limit)
        elif tag == "triangle_cliques":
            r = kern.viol_triangle_cliques(x, args[0], limit)
        elif tag == "perimeter":
            r = kern.viol_perimeter(x, args[0], args[1], limit)
        elif tag == "wedges":
            r = kern.viol_wedges(x, args[0], limit)
        elif tag == "coupling":
            r = kern.viol_coupling(x, args[0], limit)
        elif tag == "box":
            r = kern.viol_box(x, args[0], args[1], args[2], limit)
        else:
            r = kern.viol_sumeq(x, args[0], args[1])
        if r > rho:
            rho = r
        if rho > limit:
            return rho
    return rho


def round_sig(x: np.ndarray, r: int) -> np.ndarray:
    """Round each entry to r significant decimal digits (half-even);
    zero stays zero."""
    out = np.asarray(x, dtype=np.float64).copy()
    nz = out != 0.0
    if not np.any(nz):
        return out
    v = out[nz]
    exp = np.floor(np.log10(np.abs(v)))
    scale = np.power(10.0, (r - 1) - exp)
    out[nz] = np.round(v * scale) / scale
    return out


def round_attempt(s: SolverState, r: int, tol_con: float,
                  tol_gap: float) -> dict | None:
    """Try accepting x rounded to r significant figures.

    Accepts iff the rounded point's worst violation stays within
    tol_con and its certified gap against the current dual value stays
    within tol_gap; returns the accepted point and its numbers, or None.
    The solver state is left untouched either way.
    """
    x_r = round_sig(s.x, r)
    rho_r = max_violation(s, early_exit_at=tol_con, x=x_r)
    if rho_r > tol_con:
        return None
    Q_r, D = _objectives_of(s, x_r)
    D = s.stats.get("D", D)
    gap_r = (Q_r - D) / max(abs(D), _GAP_FLOOR)
    if gap_r > tol_gap:
        return None
    return {"x": x_r, "r": r, "rho": rho_r, "gap": gap_r, "Q": Q_r}


def solve(p: Problem, cfg: SolverConfig | None = None):
    """Run passes until the duality gap and constraint violation meet
    the tolerances, a rounded point is certified, or the pass cap is
    hit.  Returns a SolveReport."""
    from .report import assemble_report  # deferred: report imports certify

    cfg = cfg or SolverConfig()
    if cfg.gamma is not None and cfg.gamma != p.gamma:
        # keep the problem and the state on one gamma so the
        # certificate's factors see the value actually solved
        p = replace(p, gamma=cfg.gamma)
    t_start = time.perf_counter()
    s = init_state(p, backend=cfg.backend)
    termination = "max_passes"
    accepted = None
    rho = math.inf
    while s.passes < cfg.max_passes:
        full_pass(s)
        Q, D, omega = objectives(s)
        near = abs(omega) <= 10.0 * cfg.tol_gap
        if near or s.passes % cfg.full_check_period == 0:
            rho = max_violation(s, early_exit_at=10.0 * cfg.tol_con)
            s.stats["rho"] = rho
        else:
            rho = math.inf
        if near and rho <= 10.0 * cfg.tol_con:
            for r in cfg.round_digits:
                res = round_attempt(s, r, cfg.tol_con, cfg.tol_gap)
                if res is not None:
                    accepted = res
                    termination = "rounded"
                    break
            if accepted is not None:
                break
        if omega <= cfg.tol_gap and rho <= cfg.tol_con:
            termination = "gap_met"
            break
    wall = time.perf_counter() - t_start
    return assemble_report(p, cfg, s, termination, accepted, wall)
