"""Independent reference solvers for small instances.

These exist to cross-validate the projection engine and the certificate
math, so they deliberately use a different method family: a working-set
QP solver with dense KKT systems, an exact LP solver, and exhaustive
enumeration of discrete optima.  Hard size guards keep them honest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .graphs import Graph, SignedGraph
from .problems import Problem, all_pairs, iter_rows, pair_index, total_constraints


class OracleError(RuntimeError):
    pass


class Infeasible(OracleError):
    pass


class Unbounded(OracleError):
    pass


_MAX_CELLS = 1_000_000


@dataclass
class DenseLP:
    """min (or max) c.x subject to A_ub x <= b_ub, A_eq x = b_eq,
    lb <= x <= ub.  Rows are dense; row_count * var_count is capped."""

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | float = 0.0
    ub: np.ndarray | float = np.inf
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        n = len(self.c)
        rows = 0
        for name in ("A_ub", "A_eq"):
            a = getattr(self, name)
            if a is not None:
                a = np.asarray(a, dtype=np.float64).reshape(-1, n)
                setattr(self, name, a)
                rows += a.shape[0]
        if rows * n > _MAX_CELLS:
            raise OracleError(f"LP too large: {rows} rows x {n} vars")
        self.lb = np.broadcast_to(np.asarray(self.lb, dtype=np.float64), (n,)).copy()
        self.ub = np.broadcast_to(np.asarray(self.ub, dtype=np.float64), (n,)).copy()


def lp_simplex_small(lp: DenseLP) -> tuple[np.ndarray, float]:
    """Exact solution of a small dense LP.  Raises Infeasible/Unbounded."""
    c = -lp.c if lp.maximize else lp.c
    bounds = [
        (None if lo == -np.inf else lo, None if hi == np.inf else hi)
        for lo, hi in zip(lp.lb, lp.ub)
    ]
    res = scipy.optimize.linprog(
        c,
        A_ub=lp.A_ub,
        b_ub=lp.b_ub,
        A_eq=lp.A_eq,
        b_eq=lp.b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        raise Infeasible(res.message)
    if res.status == 3:
        raise Unbounded(res.message)
    if res.status != 0:
        raise OracleError(f"LP solve failed: {res.message}")
    value = float(np.dot(lp.c, res.x))
    return np.asarray(res.x, dtype=np.float64), value


def materialize(p: Problem, max_rows: int = 5000):
    """Dense (A, b, eq_mask) of every constraint row, in global order."""
    m = total_constraints(p)
    n = p.layout.N
    if m > max_rows or m * n > _MAX_CELLS:
        raise OracleError(f"refusing to materialize {m} rows x {n} vars")
    A = np.zeros((m, n))
    b = np.zeros(m)
    eq = np.zeros(m, dtype=bool)
    for t, cols, signs, bt, is_eq in iter_rows(p):
        for c, s in zip(cols, signs):
            A[t, c] = s
        b[t] = bt
        eq[t] = is_eq
    return A, b, eq


def lp_from_problem(p: Problem) -> DenseLP:
    """The problem's LP relaxation (quadratic term dropped), with free
    variable bounds; every bound the instance needs is already a row."""
    A, b, eq = materialize(p)
    return DenseLP(
        c=p.c,
        A_ub=A[~eq] if np.any(~eq) else None,
        b_ub=b[~eq] if np.any(~eq) else None,
        A_eq=A[eq] if np.any(eq) else None,
        b_eq=b[eq] if np.any(eq) else None,
        lb=-np.inf,
        ub=np.inf,
    )


@dataclass
class QPResult:
    x: np.ndarray
    multipliers: np.ndarray
    value: float
    iterations: int


def _feasible_start(p: Problem) -> np.ndarray:
    """A point strictly inside every inequality (equality rows exact),
    by layout.  Interior starts keep the first working set small."""
    lay = p.layout
    if lay.kind == "pairs_plus_slack":
        # pair values y + d = 0.5 put every triangle row at slack 0.5;
        # slacks one above |y| keep both coupling rows strict
        d = p.meta["d_pairs"]
        y = 0.5 - d
        return np.concatenate([y, np.abs(y) + 1.0])
    if p.kind == "SparsestCut":
        return np.full(lay.N, float(lay.n) / len(lay.pairs))
    if p.kind == "ClusterDeletion":
        # wedge rows need x_ik + x_jk >= 1, so sit above one half
        return np.full(lay.N, 0.75)
    return np.full(lay.N, 0.5)


def qp_active_set(p: Problem, max_rows: int = 5000, gamma: float | None = None,
                  tol: float = 1e-9) -> QPResult:
    """Exact optimum of min c.x + (1/2g) x.W x over the instance rows.

    Primal active-set iteration from a feasible interior point: solve
    the equality-constrained KKT system on the working set, step toward
    its optimum with a ratio test over the remaining rows, add the
    blocking row (lowest index on ties), and at a working-set optimum
    drop the lowest-index row with a negative multiplier.  A blocking
    row is always independent of the working set because the step
    direction lies in the set's null space, so the KKT system stays
    nonsingular.  Verifies the KKT conditions before returning, so
    agreement with the projection engine is a real two-method check.
    """
    g = gamma if gamma is not None else p.gamma
    A, b, eq = materialize(p, max_rows=max_rows)
    m, n = A.shape
    wg = p.w / g
    c = p.c
    x = _feasible_start(p)
    res0 = A @ x - b
    if np.any(res0[~eq] > 1e-9) or (eq.any() and np.max(np.abs(res0[eq])) > 1e-9):
        raise OracleError("starting point is not feasible")
    S: list[int] = list(np.where(eq)[0])
    in_S = np.zeros(m, dtype=bool)
    in_S[S] = True
    tol_mult = 1e-10
    tol_dir = 1e-12
    max_iter = 50 * (m + n) + 200
    mu_S = np.zeros(0)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        AS = A[S] if S else np.zeros((0, n))
        k = len(S)
        K = np.zeros((n + k, n + k))
        K[:n, :n] = np.diag(wg)
        if k:
            K[:n, n:] = AS.T
            K[n:, :n] = AS
        rhs = np.concatenate([-c, b[S]])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError as e:  # independence argument should prevent this
            raise OracleError(f"singular KKT system with working set {S}") from e
        target = sol[:n]
        mu_S = sol[n:]
        pdir = target - x
        if np.max(np.abs(pdir)) <= 1e-12 * (1.0 + np.max(np.abs(x))):
            negs = [
                (S[pos], pos)
                for pos in range(k)
                if not eq[S[pos]] and mu_S[pos] < -tol_mult
            ]
            if negs:
                pos = min(negs)[1]
                in_S[S[pos]] = False
                S.pop(pos)
                continue
            x = target
            break
        Ap = A @ pdir
        slack = b - A @ x
        cand = np.where(~in_S & ~eq & (Ap > tol_dir))[0]
        alpha = 1.0
        block = -1
        for t in cand:
            ratio = max(slack[t], 0.0) / Ap[t]
            if ratio < alpha - 1e-12:
                alpha = ratio
                block = t
        x = x + alpha * pdir
        if block >= 0:
            S.append(block)
            in_S[block] = True
            continue
        # full step reached the working-set optimum; loop to check duals
        x = target
    else:
        raise OracleError("active-set iteration cap exceeded")

    mu = np.zeros(m)
    mu[S] = mu_S
    _verify_kkt(A, b, eq, wg, c, x, mu, tol)
    value = float(np.dot(c, x) + 0.5 * np.dot(x * wg, x))
    return QPResult(x=x, multipliers=mu, value=value, iterations=iterations)


def _verify_kkt(A, b, eq, wg, c, x, mu, tol):
    scale = max(1.0, float(np.max(np.abs(c))), float(np.max(np.abs(b), initial=0.0)))
    res = A @ x - b
    stat = wg * x + c + A.T @ mu
    if np.max(np.abs(stat)) > tol * scale:
        raise OracleError(f"stationarity residual {np.max(np.abs(stat)):.2e}")
    if np.any(res[~eq] > tol * scale):
        raise OracleError(f"primal violation {np.max(res[~eq]):.2e}")
    if eq.any() and np.max(np.abs(res[eq])) > tol * scale:
        raise OracleError(f"equality violation {np.max(np.abs(res[eq])):.2e}")
    if np.any(mu[~eq] < -tol * scale):
        raise OracleError(f"negative multiplier {np.min(mu[~eq]):.2e}")
    comp = np.abs(mu * res)
    if np.max(comp, initial=0.0) > tol * scale * 10:
        raise OracleError(f"complementary slackness residual {np.max(comp):.2e}")


# --- direct LP form of the signed-graph objective ---------------------------


def cc_direct_lp(sg: SignedGraph) -> tuple[np.ndarray, float]:
    """Disagreement LP over pair variables x in [0,1]^P with all metric
    rows: minimize sum w+ x + w- (1 - x).  Returns (x, value)."""
    n = sg.n
    P = n * (n - 1) // 2
    w_plus = sg.w * (1 - sg.d)
    w_minus = sg.w * sg.d
    rows = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ij = pair_index(n, i, j)
            for k in range(j + 1, n + 1):
                ik = pair_index(n, i, k)
                jk = pair_index(n, j, k)
                for s0, s1, s2 in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                    row = np.zeros(P)
                    row[ij] = s0
                    row[ik] = s1
                    row[jk] = s2
                    rows.append(row)
    lp = DenseLP(
        c=w_plus - w_minus,
        A_ub=np.array(rows),
        b_ub=np.zeros(len(rows)),
        lb=0.0,
        ub=1.0,
    )
    x, lin = lp_simplex_small(lp)
    return x, lin + float(w_minus.sum())


# --- exhaustive discrete optima ---------------------------------------------


def set_partitions(n: int):
    """All partitions of {0..n-1} as label arrays (restricted growth
    strings, canonical order)."""
    labels = [0] * n
    maxes = [0] * n

    def rec(i):
        if i == n:
            yield list(labels)
            return
        top = maxes[i - 1] if i > 0 else -1
        for lab in range(top + 2):
            labels[i] = lab
            maxes[i] = max(top, lab)
            yield from rec(i + 1)

    yield from rec(0)


def _bipartitions(n: int):
    """Nonempty proper subsets containing node 0, as boolean masks."""
    for mask in range(0, 1 << (n - 1)):
        side = np.zeros(n, dtype=bool)
        side[0] = True
        for i in range(n - 1):
            if mask >> i & 1:
                side[i + 1] = True
        if side.all():
            continue
        yield side


def _pair_arrays(n: int):
    ii, jj = [], []
    for i, j in all_pairs(n):
        ii.append(i - 1)
        jj.append(j - 1)
    return np.array(ii), np.array(jj)


def ilp_bruteforce(instance, kind: str) -> float:
    """Exact discrete optimum by enumeration.  Partition kinds (cc,
    cluster_deletion, modularity) allow n <= 10; bipartition kinds
    (sparsest_cut, max_cut) allow n <= 18."""
    if kind == "cc":
        sg: SignedGraph = instance
        if sg.n > 10:
            raise OracleError("cc enumeration capped at n = 10")
        ii, jj = _pair_arrays(sg.n)
        w = sg.w
        d = sg.d.astype(np.float64)
        best = np.inf
        for labels in set_partitions(sg.n):
            lab = np.asarray(labels)
            same = lab[ii] == lab[jj]
            cost = float(np.dot(w, np.where(same, d, 1.0 - d)))
            best = min(best, cost)
        return best

    g: Graph = instance
    n = g.n
    adj = np.zeros((n, n), dtype=bool)
    for i, j in g.edges:
        adj[i - 1, j - 1] = adj[j - 1, i - 1] = True

    if kind == "sparsest_cut":
        if n > 18:
            raise OracleError("bipartition enumeration capped at n = 18")
        best = np.inf
        for side in _bipartitions(n):
            cut = int(np.sum(adj[side][:, ~side]))
            s = int(side.sum())
            best = min(best, cut / s + cut / (n - s))
        return best

    if kind == "max_cut":
        if n > 18:
            raise OracleError("bipartition enumeration capped at n = 18")
        best = 0
        for side in _bipartitions(n):
            best = max(best, int(np.sum(adj[side][:, ~side])))
        return float(best)

    if kind == "cluster_deletion":
        if n > 10:
            raise OracleError("partition enumeration capped at n = 10")
        m = g.num_edges
        best = np.inf
        for labels in set_partitions(n):
            lab = np.asarray(labels)
            kept = 0
            ok = True
            for blk in range(lab.max() + 1):
                nodes = np.where(lab == blk)[0]
                size = len(nodes)
                if size == 1:
                    continue
                inside = int(np.sum(adj[np.ix_(nodes, nodes)])) // 2
                if inside != size * (size - 1) // 2:
                    ok = False
                    break
                kept += inside
            if ok:
                best = min(best, m - kept)
        return best

    if kind == "modularity":
        if n > 10:
            raise OracleError("partition enumeration capped at n = 10")
        deg = g.degrees().astype(np.float64)
        two_m = 2.0 * g.num_edges
        ii, jj = _pair_arrays(n)
        q = (adj[ii, jj].astype(np.float64) - deg[ii] * deg[jj] / two_m) / two_m
        best = -np.inf
        for labels in set_partitions(n):
            lab = np.asarray(labels)
            same = lab[ii] == lab[jj]
            best = max(best, float(q[same].sum()))
        return best

    raise ValueError(f"unknown kind {kind!r}")
