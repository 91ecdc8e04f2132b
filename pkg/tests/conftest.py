"""Shared instance builders for the test suite."""

import numpy as np

from metricopt.graphs import SignedGraph, graph_from_edges, preprocess
from metricopt.rng import SplitMix64, gnp_edges


def complete_graph(n):
    return graph_from_edges(
        [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    )


def path_graph(n):
    return graph_from_edges([(i, i + 1) for i in range(1, n)])


def star_graph(leaves):
    return graph_from_edges([(1, k) for k in range(2, leaves + 2)])


def gnp_graph(n, p, seed):
    return graph_from_edges(gnp_edges(n, p, seed), n=n)


def gnp_component(n, p, seed):
    """Largest component of G(n, p), relabeled 1..n'; the standard
    pipeline ahead of builders that require connectivity."""
    return preprocess(gnp_graph(n, p, seed))


def random_signed_graph(n, seed, w_lo=0.2, w_hi=3.0):
    rng = SplitMix64(seed)
    m = n * (n - 1) // 2
    w = np.array([w_lo + (w_hi - w_lo) * rng.uniform() for _ in range(m)])
    d = np.array([1 if rng.uniform() < 0.5 else 0 for _ in range(m)], dtype=np.uint8)
    return SignedGraph(n=n, w=w, d=d)


def random_dissimilarities(n, seed, d_hi=2.0):
    """Random nonnegative dissimilarities and strictly positive weights
    in flat pair order."""
    rng = SplitMix64(seed)
    m = n * (n - 1) // 2
    d = np.array([d_hi * rng.uniform() for _ in range(m)])
    w = np.array([0.5 + 1.5 * rng.uniform() for _ in range(m)])
    return d, w


def instrumented_reference_run(p, num_passes, check_hildreth=True):
    """Dense-dual sweeps with per-visit instrumentation.

    Tracks, across the whole trajectory: the number of visits and of
    recorded (nonzero-dual) projections, the most negative inequality
    dual seen, the worst per-visit decrease of the dual objective, the
    worst end-of-pass stationarity residual, and (optionally) the worst
    per-pass deviation between the two sweep forms.
    """
    from metricopt.reference import (
        dykstra_pass,
        hildreth_pass,
        init_x,
        materialize_rows,
    )

    rows = materialize_rows(p)
    invw = p.gamma / p.w
    wg = p.w / p.gamma
    x = init_x(p)
    y = np.zeros(len(rows))
    stats = {
        "visits": 0,
        "projections": 0,
        "neg_dual": 0.0,
        "worst_d_drop": 0.0,
        "worst_kkt": 0.0,
        "worst_form_gap": 0.0,
        "bty": 0.0,
    }
    stats["D"] = -0.5 * float(np.dot(x * wg, x))

    def on_visit(t, cols, signs, b, eq, y_old, theta):
        stats["visits"] += 1
        if theta != 0.0:
            stats["projections"] += 1
        if not eq:
            stats["neg_dual"] = min(stats["neg_dual"], theta, y_old)
        stats["bty"] += b * (theta - y_old)
        d_new = -stats["bty"] - 0.5 * float(np.dot(x * wg, x))
        drop = stats["D"] - d_new
        if drop > stats["worst_d_drop"]:
            stats["worst_d_drop"] = drop
        stats["D"] = d_new

    if check_hildreth:
        x_h = init_x(p)
        y_h = np.zeros(len(rows))

    for _ in range(num_passes):
        dykstra_pass(rows, x, y, invw, on_visit=on_visit)
        resid = wg * x + p.c
        for t, (cols, signs, _b, _eq) in enumerate(rows):
            if y[t] != 0.0:
                for c, sg in zip(cols, signs):
                    resid[c] += sg * y[t]
        kkt = float(np.max(np.abs(resid)))
        if kkt > stats["worst_kkt"]:
            stats["worst_kkt"] = kkt
        if check_hildreth:
            hildreth_pass(rows, x_h, y_h, invw)
            gap = max(
                float(np.max(np.abs(x - x_h))), float(np.max(np.abs(y - y_h)))
            )
            if gap > stats["worst_form_gap"]:
                stats["worst_form_gap"] = gap
    stats["x"] = x
    stats["y"] = y
    return stats
