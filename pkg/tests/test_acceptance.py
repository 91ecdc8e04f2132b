"""Acceptance checks.

Each test covers one numbered claim about the package as a whole and
prints a single [PASS] line when it holds (run with -s to see them).
Small instances are solved against independent oracles; the last test
exercises the full-scale path.
"""

import resource
import time

import numpy as np
import pytest

from conftest import (
    complete_graph,
    gnp_component,
    gnp_graph,
    instrumented_reference_run,
    random_dissimilarities,
    random_signed_graph,
)
from metricopt.certify import sc_lower_bound
from metricopt.graphs import SignedGraph, jaccard_signed_graph, preprocess
from metricopt.oracle import (
    cc_direct_lp,
    ilp_bruteforce,
    lp_from_problem,
    lp_simplex_small,
    qp_active_set,
)
from metricopt.problems import (
    build_cluster_deletion,
    build_correlation_clustering,
    build_max_cut,
    build_metric_nearness,
    build_modularity,
    build_sparsest_cut,
    total_constraints,
)
from metricopt.solver import (
    SolverConfig,
    full_pass,
    init_state,
    max_violation,
    objectives,
    solve,
)


def _tight_cfg():
    return SolverConfig(tol_gap=1e-9, tol_con=1e-11, round_digits=(12, 13),
                        max_passes=200000)


def _drive(p, tol_omega, tol_rho, cap=40000, check_every=25):
    """Run passes until both the gap and the violation tolerances hold."""
    s = init_state(p)
    for k in range(cap):
        full_pass(s)
        if (k + 1) % check_every == 0:
            _, _, om = objectives(s)
            if om <= tol_omega and max_violation(s, early_exit_at=tol_rho) <= tol_rho:
                break
    objectives(s)
    return s


def test_criterion_1_solver_matches_oracle_optimum():
    worst = 0.0
    runs = 0
    for seed in range(1, 21):
        g = gnp_component(10, 0.4, seed)
        instances = {
            "cc": build_correlation_clustering(jaccard_signed_graph(g), 5.0),
            "sc": build_sparsest_cut(g, 1.0 / g.n, 5.0),
            "cd": build_cluster_deletion(g, 5.0),
            "maxcut": build_max_cut(g, 5.0),
        }
        for name, p in instances.items():
            t0 = time.perf_counter()
            rep = solve(p, _tight_cfg())
            wall = time.perf_counter() - t0
            assert wall <= 30.0, (seed, name, wall)
            assert rep.termination != "max_passes", (seed, name)
            opt = qp_active_set(p).value
            rel = abs(rep.certificate.primal_value - opt) / max(abs(opt), 1e-12)
            worst = max(worst, rel)
            runs += 1
            assert rel <= 1e-6, (seed, name, rel)
    assert runs == 80
    print(f"\n[PASS] criterion 1: solve matches the QP oracle on {runs} runs, "
          f"worst relative error {worst:.2e}")


def test_criterion_2_direct_and_metric_forms_agree():
    worst = 0.0
    for seed in range(1, 11):
        n = 5 + (seed % 4)
        sg = random_signed_graph(n, seed)
        _, direct = cc_direct_lp(sg)
        p = build_correlation_clustering(sg, 5.0)
        _, slack = lp_simplex_small(lp_from_problem(p))
        gap = abs(direct - slack)
        worst = max(worst, gap)
        assert gap <= 1e-8, (seed, n, direct, slack)
    print(f"\n[PASS] criterion 2: direct and metric-form disagreement LPs agree "
          f"on 10 signed graphs, worst gap {worst:.2e}")


def test_criterion_3_relaxation_sandwiches():
    checks = 0
    for seed in range(1, 21):
        g = gnp_component(7, 0.5, seed)
        lam = 1.0 / g.n
        sg = random_signed_graph(6, seed)
        phi = ilp_bruteforce(g, "sparsest_cut")
        for gamma in (1.0, 5.0, 50.0):
            p = build_cluster_deletion(g, gamma)
            lin = float(np.dot(p.c, qp_active_set(p).x))
            _, lp = lp_simplex_small(lp_from_problem(p))
            assert lp - 1e-8 <= lin <= (1.0 + 1.0 / (2 * gamma)) * lp + 1e-8, (
                "cd", seed, gamma, lp, lin)

            p = build_correlation_clustering(sg, gamma)
            lin = float(np.dot(p.c, qp_active_set(p).x))
            _, lp = lp_simplex_small(lp_from_problem(p))
            assert lp - 1e-8 <= lin <= (1.0 + 1.0 / gamma) * lp + 1e-8, (
                "cc", seed, gamma, lp, lin)

            p = build_sparsest_cut(g, lam, gamma)
            value = qp_active_set(p).value
            cap = (1.0 + (1.0 + lam * g.n) / (2 * gamma)) * phi
            assert value <= cap + 1e-9, ("sc", seed, gamma, value, cap)
            checks += 3
    assert checks == 180
    print(f"\n[PASS] criterion 3: relaxation sandwiches hold in {checks} checks, "
          f"zero violations")


def test_criterion_4_complete_graph_cut_certificates():
    _, lp6 = lp_simplex_small(
        lp_from_problem(build_sparsest_cut(complete_graph(6), 1.0 / 6, 5.0)))
    assert abs(lp6 - 6.0) <= 1e-9
    bounds = {}
    for n in (6, 10, 20):
        p = build_sparsest_cut(complete_graph(n), 1.0 / n, 5.0)
        t0 = time.perf_counter()
        rep = solve(p)
        wall = time.perf_counter() - t0
        cert = rep.certificate
        assert n * (1.0 - 1e-3) <= cert.dual_lower_bound <= n, (n, cert)
        assert n <= cert.primal_value <= 1.2 * n, (n, cert)
        assert wall <= 60.0, (n, wall)
        bounds[n] = cert.dual_lower_bound
    print(f"\n[PASS] criterion 4: complete-graph certificates tight, "
          f"bounds {bounds}")


def test_criterion_5_trajectory_invariants_in_bulk():
    g6 = gnp_component(6, 0.5, 3)
    g7 = gnp_component(7, 0.45, 11)
    d, w = random_dissimilarities(5, 7)
    dm = np.zeros((5, 5))
    wm = np.zeros((5, 5))
    k = 0
    for i in range(4):
        for j in range(i + 1, 5):
            dm[i, j] = dm[j, i] = d[k]
            wm[i, j] = wm[j, i] = w[k]
            k += 1
    instances = [
        build_metric_nearness(dm, wm, 4.0),
        build_correlation_clustering(random_signed_graph(5, 11), 2.0),
        build_correlation_clustering(random_signed_graph(6, 23), 5.0),
        build_sparsest_cut(g6, 1.0 / g6.n, 5.0),
        build_sparsest_cut(g7, 1.0 / g7.n, 5.0),
        build_cluster_deletion(g7, 5.0),
        build_max_cut(g6, 5.0),
        build_modularity(g7, 5.0),
    ]
    total = 0
    worst_drop = 0.0
    worst_kkt = 0.0
    worst_gap = 0.0
    for p in instances:
        stats = instrumented_reference_run(p, 500)
        assert stats["neg_dual"] == 0.0, p.kind
        assert stats["worst_d_drop"] <= 1e-10, (p.kind, stats["worst_d_drop"])
        assert stats["worst_kkt"] <= 1e-9, (p.kind, stats["worst_kkt"])
        assert stats["worst_form_gap"] <= 1e-12, (p.kind, stats["worst_form_gap"])
        total += stats["projections"]
        worst_drop = max(worst_drop, stats["worst_d_drop"])
        worst_kkt = max(worst_kkt, stats["worst_kkt"])
        worst_gap = max(worst_gap, stats["worst_form_gap"])
    assert total >= 100000, total
    print(f"\n[PASS] criterion 5: {total} projections kept duals nonnegative, "
          f"dual objective monotone within {worst_drop:.1e}, stationarity "
          f"within {worst_kkt:.1e}, sweep forms within {worst_gap:.1e}")


def test_criterion_6_rounding_certification():
    sg = SignedGraph(3, np.array([2.0, 2.0, 1.0]), np.array([0.0, 0.0, 1.0]))
    p = build_correlation_clustering(sg, 5.0)
    rep = solve(p)
    cert = rep.certificate
    assert rep.termination == "rounded"
    assert rep.rounded_digits is not None and rep.rounded_digits <= 6
    assert cert.max_violation <= 1e-8
    assert cert.rel_gap <= 1e-4
    # the accepted point is the known optimum: one disagreement slack up
    assert np.allclose(rep.x[3:], [0.0, 0.0, 1.0], atol=1e-9)
    assert cert.primal_linear == pytest.approx(1.0, abs=1e-9)
    print(f"\n[PASS] criterion 6: rounding accepted at r={rep.rounded_digits} "
          f"with violation {cert.max_violation:.1e} and gap {cert.rel_gap:.1e}")


def test_criterion_7_lower_bounds_track_lp():
    worst_ratio = np.inf
    for seed in range(1, 11):
        g = gnp_component(6, 0.5, seed)
        lam = 1.0 / g.n
        _, lp = lp_simplex_small(lp_from_problem(build_sparsest_cut(g, lam, 5.0)))
        for gamma in (5.0, 50.0):
            p = build_sparsest_cut(g, lam, gamma)
            s = _drive(p, 1e-7, 1e-9)
            bound = sc_lower_bound(p, s)
            assert bound <= lp + 1e-8, (seed, gamma, bound, lp)
            if gamma == 50.0:
                assert bound >= 0.98 * lp, (seed, bound, lp)
                worst_ratio = min(worst_ratio, bound / lp)
        rep = solve(build_sparsest_cut(g, lam, 5.0))
        cert = rep.certificate
        assert cert.apriori_factor is not None
        if cert.aposteriori_factor is not None:
            assert cert.aposteriori_factor <= cert.apriori_factor + 1e-12
    print(f"\n[PASS] criterion 7: certified bounds never exceed the LP optimum "
          f"and reach it within 2% at gamma=50 (worst ratio {worst_ratio:.4f})")


def test_criterion_8_scale_smoke():
    g2 = gnp_component(8, 0.4, 13)
    solve(build_sparsest_cut(g2, 1.0 / g2.n, 5.0), SolverConfig(max_passes=5))

    # gamma=1 with a loose feasibility tolerance is the intended regime
    # for instances this size; the gap tolerance is the binding stop
    g = preprocess(gnp_graph(200, 0.05, 0))
    p = build_sparsest_cut(g, 1.0 / g.n, 1.0)
    count = total_constraints(p)
    assert count > 3_000_000
    cfg = SolverConfig(tol_gap=1e-4, tol_con=1e-4, max_passes=30000)
    t0 = time.perf_counter()
    rep = solve(p, cfg)
    wall = time.perf_counter() - t0
    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    assert rep.termination in ("gap_met", "rounded"), rep.termination
    assert wall <= 600.0, wall
    assert peak_kb <= 2_000_000, peak_kb
    assert rep.dual_store_size < rep.constraint_count
    print(f"\n[PASS] criterion 8: G(200, 0.05) with {count} constraints reached "
          f"gap {rep.certificate.rel_gap:.2e} in {wall:.0f}s and "
          f"{peak_kb / 1e6:.2f} GB, dual store {rep.dual_store_size} of "
          f"{rep.constraint_count}")
