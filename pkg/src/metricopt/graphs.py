"""Graph loading, normalization, and signed-graph construction.

Graphs are simple, undirected and unweighted.  Node ids are 1-based in
every public structure; array-backed internals subtract 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """Input file could not be parsed as a graph."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 1..n.

    edges: lexicographically sorted tuple of pairs (i, j), i < j.
    adjacency: adjacency[v-1] is the sorted tuple of neighbors of v.
    meta: bookkeeping (relabel map etc.); excluded from equality.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        if i > j:
            i, j = j, i
        # adjacency lists are sorted; binary search not worth it at these sizes
        return j in self.adjacency[i - 1]

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)


def _make_graph(n: int, edge_set: set[tuple[int, int]], meta: dict | None = None) -> Graph:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edge_set:
        adj[i - 1].append(j)
        adj[j - 1].append(i)
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    return Graph(n=n, edges=tuple(sorted(edge_set)), adjacency=adjacency, meta=meta or {})


def graph_from_edges(edges, n: int | None = None, meta: dict | None = None) -> Graph:
    """Build a Graph from an iterable of (i, j) pairs (1-based).

    Self-loops are dropped, duplicates and orientation collapsed.
    n defaults to the largest node id seen.
    """
    edge_set: set[tuple[int, int]] = set()
    max_id = 0
    for i, j in edges:
        i, j = int(i), int(j)
        if i < 1 or j < 1:
            raise GraphFormatError(f"node ids must be positive, got ({i}, {j})")
        max_id = max(max_id, i, j)
        if i == j:
            continue
        edge_set.add((i, j) if i < j else (j, i))
    if n is None:
        n = max_id
    if n < 1:
        raise GraphFormatError("empty graph")
    return _make_graph(n, edge_set, meta)


def _parse_edgelist(path: str) -> list[tuple[int, int]]:
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("%") or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two node ids")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError as e:
                raise GraphFormatError(f"{path}:{lineno}: non-integer node id") from e
            pairs.append((i, j))
    return pairs


def _parse_matrixmarket(path: str) -> tuple[int, list[tuple[int, int]]]:
    import scipy.io

    try:
        mat = scipy.io.mmread(path)
    except Exception as e:
        raise GraphFormatError(f"{path}: not a valid MatrixMarket file: {e}") from e
    coo = mat.tocoo()
    n = max(coo.shape)
    pairs = [(int(r) + 1, int(c) + 1) for r, c in zip(coo.row, coo.col)]
    return n, pairs


def load_graph(path: str, format: str = "edgelist") -> Graph:
    """Load a graph file. Formats: "edgelist" (whitespace pairs, '%'/'#'
    comments) or "matrixmarket" (coordinate; weights ignored)."""
    if format in ("edgelist", "txt"):
        pairs = _parse_edgelist(path)
        if not pairs:
            raise GraphFormatError(f"{path}: no edges found")
        return graph_from_edges(pairs, meta={"source": path})
    if format in ("matrixmarket", "mtx"):
        n, pairs = _parse_matrixmarket(path)
        g = graph_from_edges(pairs, n=n, meta={"source": path})
        if g.num_edges == 0:
            raise GraphFormatError(f"{path}: no off-diagonal entries")
        return g
    raise ValueError(f"unknown graph format: {format!r}")


def preprocess(g: Graph) -> Graph:
    """Restrict to the largest connected component and relabel nodes
    1..n' (original order preserved). Ties between equal-size components
    go to the one containing the smallest original node id."""
    if g.n < 1:
        raise ValueError("empty graph")
    seen = [False] * (g.n + 1)
    components: list[list[int]] = []
    for start in range(1, g.n + 1):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            for u in g.adjacency[v - 1]:
                if not seen[u]:
                    seen[u] = True
                    comp.append(u)
                    stack.append(u)
        components.append(sorted(comp))
    # max() keeps the first of equal-size components; components are
    # discovered in order of their smallest node id
    best = max(components, key=len)
    relabel = {orig: new for new, orig in enumerate(best, start=1)}
    edges = [
        (relabel[i], relabel[j])
        for i, j in g.edges
        if i in relabel and j in relabel
    ]
    meta = {
        "original_ids": tuple(best),
        "n_original": g.n,
        "num_components": len(components),
        "singleton": len(best) == 1,
    }
    return graph_from_edges(edges, n=len(best), meta=meta)


@dataclass(frozen=True)
class SignedGraph:
    """Weighted sign information for every node pair.

    w and d are indexed in lexicographic pair order (1,2),(1,3),...;
    w strictly positive, d = 1 marks a dissimilar pair.
    """

    n: int
    w: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        m = self.n * (self.n - 1) // 2
        if len(self.w) != m or len(self.d) != m:
            raise ValueError("w and d must cover all node pairs")
        if np.any(self.w <= 0):
            raise ValueError("pair weights must be strictly positive")
        if not np.all((self.d == 0) | (self.d == 1)):
            raise ValueError("labels must be 0/1")

    def __eq__(self, other):
        return (
            isinstance(other, SignedGraph)
            and self.n == other.n
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.d, other.d)
        )


def jaccard_signed_graph(g: Graph, delta: float = 0.05, eps: float = 0.01) -> SignedGraph:
    """Turn a graph into a correlation-clustering instance via
    neighborhood similarity.

    For each pair: J = |N(i) cap N(j)| / |N(i) cup N(j)|, the log-odds
    score S = ln((1 + (J - delta)) / (1 - (J - delta))), then the offset
    Z = S + eps if S > 0, S - eps if S < 0, and +/-eps at S = 0 according
    to whether (i, j) is an edge.  Weight w = |Z|, label d = 1 iff Z < 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    nbrs = [set(a) for a in g.adjacency]
    m = g.n * (g.n - 1) // 2
    w = np.empty(m, dtype=np.float64)
    d = np.zeros(m, dtype=np.uint8)
    t = 0
    for i in range(1, g.n + 1):
        for j in range(i + 1, g.n + 1):
            ni, nj = nbrs[i - 1], nbrs[j - 1]
            union = len(ni | nj)
            jac = len(ni & nj) / union if union else 0.0
            u = jac - delta
            if 1.0 - u <= 0.0:
                raise ValueError("similarity offset out of range; delta too small")
            s = math.log((1.0 + u) / (1.0 - u))
            if s > 0.0:
                z = s + eps
            elif s < 0.0:
                z = s - eps
            else:
                z = eps if g.has_edge(i, j) else -eps
            w[t] = abs(z)
            d[t] = 1 if z < 0.0 else 0
            t += 1
    return SignedGraph(n=g.n, w=w, d=d)
