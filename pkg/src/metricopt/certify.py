"""Approximation certificates.

A-priori factors depend only on (kind, gamma, lambda).  A-posteriori
improvements use the solved pair (x, y): the quadratic-to-linear ratio
R, and a perturbed-dual lower bound obtained by charging the dual
residual p = W_g x against a small LP over a region known to contain
the LP optimum.  Every emitted lower bound is valid for the LP
relaxation's optimal linear objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .oracle import DenseLP, Infeasible, OracleError, Unbounded, lp_simplex_small
from .problems import Problem

_GAP_FLOOR = 1e-300


@dataclass(frozen=True)
class Region:
    """Bounds plus optional extra rows describing a set known to contain
    the LP optimum."""

    lb: np.ndarray | float
    ub: np.ndarray | float
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None


def apriori_factor(p: Problem) -> tuple[float | None, dict]:
    """Guaranteed factor between the rounded relaxation objective and
    the discrete optimum, fixed before solving.  None when the cost
    vector has nonpositive entries (max cut, modularity)."""
    g = p.gamma
    if p.kind == "ClusterDeletion":
        return 1.0 + 1.0 / (2.0 * g), {"apriori": "unit-box QP shift, B = 1"}
    if p.kind in ("CorrelationClustering", "MetricNearness"):
        return 1.0 + 1.0 / g, {"apriori": "disagreement-form QP shift"}
    if p.kind == "SparsestCut":
        lam = p.meta["lam"]
        n = p.meta["n"]
        return (
            1.0 + (1.0 + lam * n) / (2.0 * g),
            {
                "apriori": "cut-ratio QP shift vs the discrete optimum",
                "apriori_conditional": "assumes both sides of the optimal cut have >= 2 nodes",
            },
        )
    return None, {"apriori": "not applicable: cost vector not positive"}


def aposteriori_ratio(p: Problem, xhat: np.ndarray,
                      base_factor: float | None) -> tuple[float | None, float | None]:
    """R = x.W x / (2 gamma c.x) at the solved point, and the improved
    factor (1 + A)/(1 + R).  Degenerate (c.x <= 0) or missing base
    factor yields None."""
    if base_factor is None:
        return None, None
    cx = float(np.dot(p.c, xhat))
    quad = float(np.dot(xhat * p.w, xhat))
    if quad == 0.0:
        return 0.0, base_factor
    if cx <= 0.0:
        return None, None
    R = quad / (2.0 * p.gamma * cx)
    A = base_factor - 1.0
    return R, (1.0 + A) / (1.0 + R)


def default_region(p: Problem) -> Region:
    """The tightest set this module can justify as containing the LP
    optimum, per problem kind."""
    N = p.layout.N
    if p.kind in ("CorrelationClustering", "MetricNearness"):
        # optimal pair values x = y + d stay in [0, 1], so y in [-d, 1-d]
        # and the slacks m = |y| stay in [0, 1]
        d = p.meta["d_pairs"]
        P = len(d)
        lb = np.concatenate([-d, np.zeros(P)])
        ub = np.concatenate([1.0 - d, np.ones(P)])
        return Region(lb=lb, ub=ub)
    if p.kind == "SparsestCut":
        n = p.meta["n"]
        return Region(
            lb=0.0,
            ub=float(n) / (n - 1),
            A_eq=np.ones((1, N)),
            b_eq=np.array([float(n)]),
        )
    # remaining kinds carry an explicit [0, 1] box in their constraints
    return Region(lb=0.0, ub=1.0)


def perturbed_dual_bound(p: Problem, x: np.ndarray, bty: float,
                         region: Region | None = None) -> tuple[float | None, dict]:
    """Lower bound on the LP relaxation's optimal c.x*.

    With (x, y) maintaining the stationarity and dual-sign conditions,
    c.x* >= -b.y - max { (W_g x).z : c.z <= c.x, z in region }.  The
    inner maximization is a small LP; infeasibility or unboundedness
    means the supplied region was invalid and no bound is emitted.
    """
    if region is None:
        region = default_region(p)
    phat = (p.w / p.gamma) * x
    cx = float(np.dot(p.c, x))
    A_ub = [p.c.reshape(1, -1)]
    b_ub = [np.array([cx])]
    if region.A_ub is not None:
        A_ub.append(region.A_ub)
        b_ub.append(region.b_ub)
    lp = DenseLP(
        c=phat,
        A_ub=np.vstack(A_ub),
        b_ub=np.concatenate(b_ub),
        A_eq=region.A_eq,
        b_eq=region.b_eq,
        lb=region.lb,
        ub=region.ub,
        maximize=True,
    )
    try:
        _, opt = lp_simplex_small(lp)
    except (Infeasible, Unbounded, OracleError) as e:
        return None, {"dual_lower_bound": f"inner LP failed: {e}"}
    bound = -bty - opt
    return bound, {"dual_lower_bound": "perturbed-dual bound over the kind's default region"}


def sc_lower_bound(p: Problem, s) -> float | None:
    """Sparsest-cut specialization: region {sum z = n,
    0 <= z <= n/(n-1)} plus the edge-mass cap c.z <= c.x added by
    perturbed_dual_bound."""
    if p.kind != "SparsestCut":
        raise ValueError("sc_lower_bound requires a sparsest-cut problem")
    bty = recompute_bty(p, s)
    bound, _ = perturbed_dual_bound(p, s.x, bty, default_region(p))
    return bound


def recompute_bty(p: Problem, s) -> float:
    """Exact b.y of the stored duals, by family; cross-checks the
    incremental accumulator."""
    t_arr, y_arr = s.store.entries()
    total = 0.0
    pos = 0
    for tag, t0, count, args in s.plans:
        hi = t0 + count
        k0 = pos
        while pos < len(t_arr) and t_arr[pos] < hi:
            pos += 1
        k1 = pos
        if k0 == k1:
            continue
        ids = t_arr[k0:k1]
        ys = y_arr[k0:k1]
        if tag == "triangle_all":
            d, n = args
            if np.any(d != 0.0):
                total += float(s.kern.bty_triangle_all(t_arr, y_arr, k0, k1, d, n, t0))
        elif tag == "perimeter":
            total += args[1] * float(ys.sum())
        elif tag == "wedges":
            total += -float(ys.sum())
        elif tag == "box":
            _nv, lo, hi_b = args
            if np.isfinite(lo) and np.isfinite(hi_b):
                is_hi = ((ids - t0) % 2).astype(bool)
                total += (-lo) * float(ys[~is_hi].sum()) + hi_b * float(ys[is_hi].sum())
            elif np.isfinite(lo):
                total += (-lo) * float(ys.sum())
            else:
                total += hi_b * float(ys.sum())
        elif tag == "sumeq":
            total += args[1] * float(ys.sum())
        # coupling and triangle_cliques rows have b = 0
    return total


@dataclass(frozen=True)
class Certificate:
    """Bounds and factors for one solved instance.

    dual_lower_bound bounds the LP relaxation's optimal linear
    objective; dual_objective is the regularized dual value D (a lower
    bound on the regularized optimum).  rel_gap is nonnegative whenever
    the reported point is feasible.
    """

    dual_lower_bound: float | None
    dual_objective: float
    primal_value: float
    primal_linear: float
    rel_gap: float
    max_violation: float
    apriori_factor: float | None
    R: float | None
    aposteriori_factor: float | None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dual_lower_bound": self.dual_lower_bound,
            "dual_objective": self.dual_objective,
            "primal_value": self.primal_value,
            "primal_linear": self.primal_linear,
            "rel_gap": self.rel_gap,
            "max_violation": self.max_violation,
            "apriori_factor": self.apriori_factor,
            "R": self.R,
            "aposteriori_factor": self.aposteriori_factor,
            "notes": dict(self.notes),
        }


def build_certificate(p: Problem, s, solution: np.ndarray) -> Certificate:
    """Assemble the certificate from the converged state and the
    reported solution (the iterate, or an accepted rounded point).

    Dual quantities always come from the iterate pair (s.x, duals),
    which maintains the stationarity identity; the rounded point only
    affects the primal side.
    """
    from .solver import _objectives_of, max_violation  # local: avoid cycle

    bty_inc = s.bty
    bty_exact = recompute_bty(p, s)
    drift = abs(bty_exact - bty_inc)
    quad_it = float(np.dot(s.x * s.wg, s.x))
    D = -bty_exact - 0.5 * quad_it
    Q_sol, _ = _objectives_of(s, solution)
    lin_sol = float(np.dot(p.c, solution))
    rel_gap = (Q_sol - D) / max(abs(D), _GAP_FLOOR)
    rho = max_violation(s, x=solution)
    factor, notes = apriori_factor(p)
    R, improved = aposteriori_ratio(p, solution, factor)
    bound, bnotes = perturbed_dual_bound(p, s.x, bty_exact)
    notes.update(bnotes)
    notes["bty_drift"] = drift
    if p.meta.get("maximize"):
        offset = p.meta.get("offset", 0.0)
        notes["reported_objective"] = offset - lin_sol
        notes["objective_sense"] = "maximize (reported = offset - linear part)"
    return Certificate(
        dual_lower_bound=bound,
        dual_objective=D,
        primal_value=Q_sol,
        primal_linear=lin_sol,
        rel_gap=rel_gap,
        max_violation=rho,
        apriori_factor=factor,
        R=R,
        aposteriori_factor=improved,
        notes=notes,
    )
