"""Relaxation instances: variable layouts, cost/weight vectors, and
implicit constraint families.

Constraint families are never materialized as a matrix.  Each family
knows its exact count and can enumerate rows (cols, signs, rhs) in a
fixed, reproducible order; the hot solver kernels regenerate the same
rows arithmetically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .graphs import Graph, SignedGraph


def pair_index(n: int, i: int, j: int) -> int:
    """Position of pair (i, j), 1 <= i < j <= n, in lexicographic order:
    (i-1)(2n-i)/2 + (j-i) - 1."""
    return (i - 1) * (2 * n - i) // 2 + (j - i) - 1


def all_pairs(n: int):
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            yield i, j


@dataclass(frozen=True)
class Layout:
    """Variable indexing for a Problem.

    kind: "all_pairs" | "edges_only" | "pairs_plus_slack".
    pairs: primal pair per variable, in index order (for edges_only the
    edge list).  pairs_plus_slack stores y_ij for every pair first, then
    m_ij in the same pair order.
    """

    kind: str
    n: int
    N: int
    pairs: tuple[tuple[int, int], ...]
    _edge_pos: dict = field(default_factory=dict, compare=False, repr=False)

    def index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        if self.kind == "edges_only":
            return self._edge_pos[(i, j)]
        return pair_index(self.n, i, j)

    def m_index(self, i: int, j: int) -> int:
        if self.kind != "pairs_plus_slack":
            raise ValueError("layout has no slack variables")
        return self.n * (self.n - 1) // 2 + self.index(i, j)

    @property
    def num_pairs(self) -> int:
        return len(self.pairs)


def _all_pairs_layout(n: int) -> Layout:
    pairs = tuple(all_pairs(n))
    return Layout(kind="all_pairs", n=n, N=len(pairs), pairs=pairs)


def _pairs_plus_slack_layout(n: int) -> Layout:
    pairs = tuple(all_pairs(n))
    return Layout(kind="pairs_plus_slack", n=n, N=2 * len(pairs), pairs=pairs)


def _edges_only_layout(n: int, edges: tuple[tuple[int, int], ...]) -> Layout:
    pos = {e: t for t, e in enumerate(edges)}
    return Layout(kind="edges_only", n=n, N=len(edges), pairs=edges, _edge_pos=pos)


# ---------------------------------------------------------------------------
# Constraint families.  Each yields rows (cols, signs, b, is_eq) with all
# signs +/-1.  Every row has at most 4 nonzeros except the single SumEq
# hyperplane, which is dense by nature and handled specially everywhere.
# ---------------------------------------------------------------------------

_TRIANGLE_SIGNS = ((1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0))


@dataclass(frozen=True)
class TriangleAll:
    """All 3*C(n,3) metric constraints over pair variables.

    For triple i<j<k and sign vector s over (x_ij, x_ik, x_jk) the row is
    s.x <= -s.d, with d = 0 when no dissimilarity labels are given.
    """

    n: int
    d: np.ndarray | None = None  # per-pair rhs labels, lexicographic order

    @property
    def count(self) -> int:
        return 3 * comb(self.n, 3)

    def rows(self):
        n = self.n
        d = self.d
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                ij = pair_index(n, i, j)
                for k in range(j + 1, n + 1):
                    ik = pair_index(n, i, k)
                    jk = pair_index(n, j, k)
                    cols = (ij, ik, jk)
                    for s in _TRIANGLE_SIGNS:
                        if d is None:
                            b = 0.0
                        else:
                            b = -(s[0] * d[ij] + s[1] * d[ik] + s[2] * d[jk])
                        yield cols, s, b, False


@dataclass(frozen=True)
class TrianglePerimeter:
    """x_ij + x_ik + x_jk <= bound for every triple i<j<k."""

    n: int
    bound: float = 2.0

    @property
    def count(self) -> int:
        return comb(self.n, 3)

    def rows(self):
        n = self.n
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                ij = pair_index(n, i, j)
                for k in range(j + 1, n + 1):
                    cols = (ij, pair_index(n, i, k), pair_index(n, j, k))
                    yield cols, (1.0, 1.0, 1.0), self.bound, False


@dataclass(frozen=True)
class TriangleOnCliques:
    """Metric constraints restricted to triangles of the graph; var_rows
    holds (edge_ij, edge_ik, edge_jk) variable indices per triangle."""

    var_rows: np.ndarray  # (T, 3) int64

    @property
    def count(self) -> int:
        return 3 * len(self.var_rows)

    def rows(self):
        for r in self.var_rows:
            cols = (int(r[0]), int(r[1]), int(r[2]))
            for s in _TRIANGLE_SIGNS:
                yield cols, s, 0.0, False


@dataclass(frozen=True)
class WedgeLower:
    """1 <= x_ik + x_jk for open wedges i-k-j, stored as the row
    -x_ik - x_jk <= -1; var_rows holds the two edge-variable indices."""

    var_rows: np.ndarray  # (W, 2) int64

    @property
    def count(self) -> int:
        return len(self.var_rows)

    def rows(self):
        for r in self.var_rows:
            yield (int(r[0]), int(r[1])), (-1.0, -1.0), -1.0, False


@dataclass(frozen=True)
class CouplingAbs:
    """|y_ij| <= m_ij, as y - m <= 0 then -y - m <= 0 per pair; y at
    index t, its slack at index num_pairs + t."""

    num_pairs: int

    @property
    def count(self) -> int:
        return 2 * self.num_pairs

    def rows(self):
        P = self.num_pairs
        for t in range(P):
            yield (t, P + t), (1.0, -1.0), 0.0, False
            yield (t, P + t), (-1.0, -1.0), 0.0, False


@dataclass(frozen=True)
class Box:
    """lo <= x_v <= hi over variables 0..num_vars-1; per variable the
    finite lower row (-x <= -lo) precedes the finite upper row (x <= hi)."""

    num_vars: int
    lo: float = 0.0
    hi: float = np.inf

    @property
    def count(self) -> int:
        per = (1 if np.isfinite(self.lo) else 0) + (1 if np.isfinite(self.hi) else 0)
        return per * self.num_vars

    def rows(self):
        has_lo = np.isfinite(self.lo)
        has_hi = np.isfinite(self.hi)
        for v in range(self.num_vars):
            if has_lo:
                yield (v,), (-1.0,), -self.lo, False
            if has_hi:
                yield (v,), (1.0,), self.hi, False


@dataclass(frozen=True)
class SumEq:
    """Single dense hyperplane sum(x_v) = target over variables
    0..num_vars-1, with a sign-free dual."""

    num_vars: int
    target: float

    @property
    def count(self) -> int:
        return 1

    def rows(self):
        yield tuple(range(self.num_vars)), (1.0,) * self.num_vars, self.target, True


@dataclass(frozen=True)
class Problem:
    """A relaxation instance: minimize c.x + (1/2 gamma) x.W x subject to
    the constraint families, with W = diag(w)."""

    layout: Layout
    c: np.ndarray
    w: np.ndarray
    gamma: float
    families: tuple
    kind: str
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if len(self.c) != self.layout.N or len(self.w) != self.layout.N:
            raise ValueError("c and w must match the layout size")
        if np.any(self.w <= 0):
            raise ValueError("weight diagonal must be strictly positive")


def total_constraints(p: Problem) -> int:
    return sum(f.count for f in p.families)


def iter_rows(p: Problem):
    """Enumerate every constraint as (t, cols, signs, b, is_eq) in the
    fixed global order: families as listed, rows in family order."""
    t = 0
    for fam in p.families:
        for cols, signs, b, eq in fam.rows():
            yield t, cols, signs, b, eq
            t += 1


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _pairs_array(n: int, a, name: str) -> np.ndarray:
    """Accept an (n, n) symmetric matrix or a flat length-C(n,2) array in
    lexicographic pair order; return the flat form."""
    a = np.asarray(a, dtype=np.float64)
    P = n * (n - 1) // 2
    if a.shape == (P,):
        return a.copy()
    if a.shape == (n, n):
        if not np.allclose(a, a.T):
            raise ValueError(f"{name} must be symmetric")
        if np.any(np.abs(np.diag(a)) > 0):
            raise ValueError(f"{name} must have zero diagonal")
        out = np.empty(P, dtype=np.float64)
        t = 0
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                out[t] = a[i - 1, j - 1]
                t += 1
        return out
    raise ValueError(f"{name} has shape {a.shape}, expected ({n},{n}) or ({P},)")


def build_metric_nearness(d, w, gamma: float, n: int | None = None) -> Problem:
    """Closest-metric problem in shifted form.

    Variables are (y_ij, m_ij) with y_ij = x_ij - d_ij, so the triangle
    rows get rhs b = -s.d and the slacks satisfy |y| <= m.  Cost is
    (0, w), weight diagonal (w, w).
    """
    d = np.asarray(d, dtype=np.float64)
    if n is None:
        if d.ndim != 2:
            raise ValueError("pass n when d is given in flat pair order")
        n = d.shape[0]
    d_pairs = _pairs_array(n, d, "d")
    if np.any(d_pairs < 0):
        raise ValueError("dissimilarities must be nonnegative")
    w_pairs = _pairs_array(n, w, "w")
    if np.any(w_pairs <= 0):
        raise ValueError("pair weights must be strictly positive")
    layout = _pairs_plus_slack_layout(n)
    P = layout.num_pairs
    c = np.concatenate([np.zeros(P), w_pairs])
    wdiag = np.concatenate([w_pairs, w_pairs])
    families = (TriangleAll(n=n, d=d_pairs), CouplingAbs(num_pairs=P))
    meta = {"n": n, "d_pairs": d_pairs, "w_pairs": w_pairs}
    return Problem(layout=layout, c=c, w=wdiag, gamma=float(gamma),
                   families=families, kind="MetricNearness", meta=meta)


def build_correlation_clustering(sg: SignedGraph, gamma: float) -> Problem:
    """Disagreement-minimizing relaxation of a signed graph, solved in
    metric-nearness form.  No box rows: optimal pair values stay in
    [0, 1] without them, so the families are triangles plus coupling."""
    p = build_metric_nearness(sg.d.astype(np.float64), sg.w, gamma, n=sg.n)
    meta = dict(p.meta)
    meta["signed_graph"] = sg
    return Problem(layout=p.layout, c=p.c, w=p.w, gamma=p.gamma,
                   families=p.families, kind="CorrelationClustering", meta=meta)


def build_sparsest_cut(g: Graph, lam: float, gamma: float) -> Problem:
    """Cut-ratio relaxation: minimize edge mass subject to the full
    metric cone, nonnegativity, and sum(x) = n."""
    if g.n < 3:
        raise ValueError("need at least 3 nodes")
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    comps = _component_count(g)
    if comps != 1:
        raise ValueError("graph must be connected (run preprocess first)")
    layout = _all_pairs_layout(g.n)
    P = layout.num_pairs
    c = np.zeros(P)
    w = np.full(P, lam)
    for i, j in g.edges:
        t = layout.index(i, j)
        c[t] = 1.0
        w[t] = 1.0
    families = (
        TriangleAll(n=g.n),
        Box(num_vars=P, lo=0.0, hi=np.inf),
        SumEq(num_vars=P, target=float(g.n)),
    )
    meta = {"n": g.n, "num_edges": g.num_edges, "lam": lam}
    return Problem(layout=layout, c=c, w=w, gamma=float(gamma),
                   families=families, kind="SparsestCut", meta=meta)


def _component_count(g: Graph) -> int:
    seen = [False] * (g.n + 1)
    comps = 0
    for start in range(1, g.n + 1):
        if seen[start]:
            continue
        comps += 1
        seen[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            for u in g.adjacency[v - 1]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
    return comps


def enumerate_triangles(g: Graph) -> list[tuple[int, int, int]]:
    """Triples i<j<k with all three edges present, lexicographic."""
    out = []
    nbrs = [set(a) for a in g.adjacency]
    for i, j in g.edges:
        common = nbrs[i - 1] & nbrs[j - 1]
        for k in sorted(common):
            if k > j:
                out.append((i, j, k))
    out.sort()
    return out


def enumerate_wedges(g: Graph) -> list[tuple[int, int, int]]:
    """Open wedges (i, j, k): i<j both adjacent to center k, (i,j) not an
    edge; sorted by (i, j, k)."""
    out = []
    nbrs = [set(a) for a in g.adjacency]
    for k in range(1, g.n + 1):
        nk = g.adjacency[k - 1]
        for a in range(len(nk)):
            for b in range(a + 1, len(nk)):
                i, j = nk[a], nk[b]
                if j not in nbrs[i - 1]:
                    out.append((i, j, k))
    out.sort()
    return out


def build_cluster_deletion(g: Graph, gamma: float) -> Problem:
    """Edge-deletion-to-cliques relaxation on edge variables: unit cost,
    identity weights, metric rows on graph triangles, a lower-bound row
    per open wedge, and a [0, 1] box."""
    if g.num_edges == 0:
        raise ValueError("graph has no edges")
    layout = _edges_only_layout(g.n, g.edges)
    m = layout.N
    tri = enumerate_triangles(g)
    tri_rows = np.array(
        [
            [layout.index(i, j), layout.index(i, k), layout.index(j, k)]
            for i, j, k in tri
        ],
        dtype=np.int64,
    ).reshape(-1, 3)
    wed = enumerate_wedges(g)
    wedge_rows = np.array(
        [[layout.index(i, k), layout.index(j, k)] for i, j, k in wed],
        dtype=np.int64,
    ).reshape(-1, 2)
    families = (
        TriangleOnCliques(var_rows=tri_rows),
        WedgeLower(var_rows=wedge_rows),
        Box(num_vars=m, lo=0.0, hi=1.0),
    )
    meta = {"n": g.n, "num_edges": m, "triangles": tri, "wedges": wed}
    return Problem(layout=layout, c=np.ones(m), w=np.ones(m), gamma=float(gamma),
                   families=families, kind="ClusterDeletion", meta=meta)


def build_max_cut(g: Graph, gamma: float) -> Problem:
    """Cut maximization as minimization of -sum_E x_ij over the metric
    polytope with perimeter caps and a [0, 1] box.  No a-priori factor
    applies (costs are negative); certificates still do."""
    layout = _all_pairs_layout(g.n)
    P = layout.num_pairs
    c = np.zeros(P)
    for i, j in g.edges:
        c[layout.index(i, j)] = -1.0
    families = (
        TriangleAll(n=g.n),
        TrianglePerimeter(n=g.n, bound=2.0),
        Box(num_vars=P, lo=0.0, hi=1.0),
    )
    meta = {"n": g.n, "num_edges": g.num_edges, "maximize": True, "offset": 0.0}
    return Problem(layout=layout, c=c, w=np.ones(P), gamma=float(gamma),
                   families=families, kind="MaxCut", meta=meta)


def build_modularity(g: Graph, gamma: float, wmin: float | None = None) -> Problem:
    """Modularity maximization over the metric polytope.

    Per-pair coefficient q_ij = (A_ij - deg_i deg_j / (2|E|)) / (2|E|);
    maximizing sum q_ij (1 - x_ij) is minimizing c.x with c = q, and the
    additive constant sum q_ij is recorded for reporting.  Weights are
    |q| floored at wmin (default 1/n^2) to keep W positive definite."""
    if g.num_edges < 1:
        raise ValueError("graph has no edges")
    if wmin is None:
        wmin = 1.0 / (g.n * g.n)
    if wmin <= 0:
        raise ValueError("wmin must be positive")
    layout = _all_pairs_layout(g.n)
    P = layout.num_pairs
    deg = g.degrees()
    two_m = 2.0 * g.num_edges
    q = np.empty(P)
    for t, (i, j) in enumerate(layout.pairs):
        a_ij = 1.0 if g.has_edge(i, j) else 0.0
        q[t] = (a_ij - deg[i - 1] * deg[j - 1] / two_m) / two_m
    families = (
        TriangleAll(n=g.n),
        Box(num_vars=P, lo=0.0, hi=1.0),
    )
    meta = {
        "n": g.n,
        "num_edges": g.num_edges,
        "maximize": True,
        "offset": float(q.sum()),
        "wmin": wmin,
    }
    return Problem(layout=layout, c=q, w=np.maximum(np.abs(q), wmin),
                   gamma=float(gamma), families=families, kind="Modularity",
                   meta=meta)
