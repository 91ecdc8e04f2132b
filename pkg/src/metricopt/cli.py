"""Command-line front end.

Two subcommands: `solve` builds a problem from a graph (or distance)
file, runs the projection solver, and writes a JSON report plus an
optional solution dump; `bench` generates a reproducible G(n, p)
instance from a seed and times a fixed number of passes on each
kernel backend.

Exit codes: 0 converged (gap_met or rounded), 2 pass cap hit,
64 bad flags or arguments, 74 could not read or write a file.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

EXIT_OK = 0
EXIT_MAX_PASSES = 2
EXIT_USAGE = 64
EXIT_IO = 74

_KINDS = ("cc", "sc", "cd", "maxcut", "mod", "mn")


class CliError(Exception):
    """Carries the exit code for a failed run."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is 64
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="metricopt-x",
        description="Metric-constrained relaxations of graph clustering "
        "objectives, solved by cyclic projections.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve one instance from a file")
    sp.add_argument("kind", choices=_KINDS,
                    help="cc correlation clustering, sc sparsest cut, "
                    "cd cluster deletion, maxcut, mod modularity, "
                    "mn metric nearness")
    sp.add_argument("--graph", help="input graph file (all kinds except mn)")
    sp.add_argument("--format", choices=("edgelist", "mtx"), default="edgelist")
    sp.add_argument("--distances",
                    help="square distance matrix file for mn (np.loadtxt)")
    sp.add_argument("--gamma", type=float, default=5.0)
    sp.add_argument("--lambda", dest="lam", default="auto", metavar="auto|F",
                    help="sparsest-cut balance weight; auto = 1/n")
    sp.add_argument("--delta", type=float, default=0.05,
                    help="cc similarity shift")
    sp.add_argument("--eps", type=float, default=0.01,
                    help="cc zero-score offset")
    sp.add_argument("--wmin", type=float, default=None,
                    help="modularity weight floor; default 1/n^2")
    sp.add_argument("--tol-gap", type=float, default=1e-4)
    sp.add_argument("--tol-con", type=float, default=1e-8)
    sp.add_argument("--max-passes", type=int, default=10000)
    sp.add_argument("--backend", choices=("auto", "python", "numba"),
                    default=None)
    sp.add_argument("--out", default="report.json", help="JSON report path")
    sp.add_argument("--solution", default=None,
                    help="also dump the solution vector as text")
    parser._solve_parser = sp

    bp = sub.add_parser("bench",
                        help="time fixed passes on a generated G(n,p) instance")
    bp.add_argument("--kind", choices=("cc", "sc", "cd", "maxcut", "mod"),
                    default="sc")
    bp.add_argument("--n", type=int, default=60)
    bp.add_argument("--p", type=float, default=0.2)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--gamma", type=float, default=5.0)
    bp.add_argument("--lambda", dest="lam", default="auto", metavar="auto|F")
    bp.add_argument("--delta", type=float, default=0.05)
    bp.add_argument("--eps", type=float, default=0.01)
    bp.add_argument("--passes", type=int, default=20)
    bp.add_argument("--backend", choices=("both", "auto", "python", "numba"),
                    default="both")
    bp.add_argument("--out", default=None, help="optional JSON timing dump")
    parser._bench_parser = bp
    return parser


def _parse_lam(raw, n: int, sp) -> float:
    if raw == "auto":
        return 1.0 / n
    try:
        lam = float(raw)
    except ValueError:
        sp.error(f"--lambda must be 'auto' or a float, got {raw!r}")
    return lam


def _load_preprocessed(args, sp):
    from .graphs import GraphFormatError, load_graph, preprocess

    if not args.graph:
        sp.error(f"--graph is required for kind {args.kind!r}")
    try:
        g = load_graph(args.graph, args.format)
    except (OSError, GraphFormatError) as e:
        raise CliError(EXIT_IO, f"cannot load graph {args.graph!r}: {e}")
    return preprocess(g)


def _build_problem(args, sp):
    from . import problems
    from .graphs import jaccard_signed_graph

    kind = args.kind
    if kind == "mn":
        if not args.distances:
            sp.error("--distances is required for kind 'mn'")
        try:
            d = np.loadtxt(args.distances, dtype=np.float64, ndmin=2)
        except (OSError, ValueError) as e:
            raise CliError(EXIT_IO, f"cannot load distances {args.distances!r}: {e}")
        if d.shape[0] != d.shape[1]:
            raise CliError(EXIT_USAGE,
                           f"distance matrix must be square, got {d.shape}")
        w = np.ones(d.shape[0] * (d.shape[0] - 1) // 2)
        p = problems.build_metric_nearness(d, w, args.gamma)
        return p, {"n": d.shape[0], "source": args.distances}

    g = _load_preprocessed(args, sp)
    gmeta = {
        "n": g.n,
        "num_edges": g.num_edges,
        "n_original": g.meta.get("n_original", g.n),
        "num_components": g.meta.get("num_components", 1),
        "singleton": bool(g.meta.get("singleton", False)),
        "source": args.graph,
    }
    if kind == "cc":
        sg = jaccard_signed_graph(g, delta=args.delta, eps=args.eps)
        return problems.build_correlation_clustering(sg, args.gamma), gmeta
    if kind == "sc":
        lam = _parse_lam(args.lam, g.n, sp)
        return problems.build_sparsest_cut(g, lam, args.gamma), gmeta
    if kind == "cd":
        return problems.build_cluster_deletion(g, args.gamma), gmeta
    if kind == "maxcut":
        return problems.build_max_cut(g, args.gamma), gmeta
    return problems.build_modularity(g, args.gamma, wmin=args.wmin), gmeta


def _run_solve(args, parser) -> int:
    from .report import write_report, write_solution
    from .solver import SolverConfig, solve

    sp = parser._solve_parser
    try:
        p, gmeta = _build_problem(args, sp)
        cfg = SolverConfig(
            tol_gap=args.tol_gap,
            tol_con=args.tol_con,
            max_passes=args.max_passes,
            backend=args.backend,
        )
    except CliError:
        raise
    except (ValueError, RuntimeError) as e:
        raise CliError(EXIT_USAGE, str(e))
    report = solve(p, cfg).with_graph(gmeta)
    if args.solution:
        try:
            write_solution(report.x, p.layout, args.solution, p.kind)
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot write solution: {e}")
        report = report.with_solution_path(args.solution)
    try:
        write_report(report, args.out)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write report: {e}")
    cert = report.certificate
    print(f"{p.kind}: {report.termination} after {report.pass_count} passes, "
          f"gap {cert.rel_gap:.3e}, violation {cert.max_violation:.3e}, "
          f"report {args.out}")
    if report.termination == "max_passes":
        return EXIT_MAX_PASSES
    return EXIT_OK


def _bench_problem(args):
    from . import problems
    from .graphs import graph_from_edges, jaccard_signed_graph, preprocess
    from .rng import gnp_edges

    edges = gnp_edges(args.n, args.p, args.seed)
    if not edges:
        raise CliError(EXIT_USAGE,
                       f"G({args.n}, {args.p}) seed {args.seed} has no edges")
    g = preprocess(graph_from_edges(edges, n=args.n))
    if args.kind == "cc":
        sg = jaccard_signed_graph(g, delta=args.delta, eps=args.eps)
        return problems.build_correlation_clustering(sg, args.gamma), g
    if args.kind == "sc":
        lam = 1.0 / g.n if args.lam == "auto" else float(args.lam)
        return problems.build_sparsest_cut(g, lam, args.gamma), g
    if args.kind == "cd":
        return problems.build_cluster_deletion(g, args.gamma), g
    if args.kind == "maxcut":
        return problems.build_max_cut(g, args.gamma), g
    return problems.build_modularity(g, args.gamma), g


def _time_backend(p, backend: str, passes: int) -> dict:
    from .solver import full_pass, init_state, objectives

    s = init_state(p, backend=backend)
    t0 = time.perf_counter()
    full_pass(s)
    first = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(passes - 1):
        full_pass(s)
    rest = time.perf_counter() - t0
    Q, D, omega = objectives(s)
    return {
        "backend": s.backend,
        "passes": passes,
        "first_pass_s": first,
        "steady_s": rest,
        "steady_per_pass_s": rest / max(passes - 1, 1),
        "Q": float(Q),
        "D": float(D),
        "omega": float(omega),
        "dual_store_size": s.store.nnz,
        "x": s.x.copy(),
    }


def _run_bench(args) -> int:
    import json

    from .kernels import HAS_NUMBA
    from .problems import total_constraints

    if args.passes < 1:
        raise CliError(EXIT_USAGE, "--passes must be at least 1")
    try:
        p, g = _bench_problem(args)
    except CliError:
        raise
    except (ValueError, RuntimeError) as e:
        raise CliError(EXIT_USAGE, str(e))
    if args.backend == "both":
        backends = ["python"] + (["numba"] if HAS_NUMBA else [])
        if not HAS_NUMBA:
            print("numba unavailable; timing the python backend only",
                  file=sys.stderr)
    else:
        backends = [args.backend]
    print(f"instance: {args.kind} G({args.n}, {args.p}) seed={args.seed} "
          f"gamma={args.gamma} -> n={g.n} |E|={g.num_edges} "
          f"N={p.layout.N} constraints={total_constraints(p)}")
    results = []
    try:
        for be in backends:
            results.append(_time_backend(p, be, args.passes))
    except (ValueError, RuntimeError) as e:
        raise CliError(EXIT_USAGE, str(e))
    for r in results:
        print(f"backend {r['backend']}: first pass {r['first_pass_s']:.4f} s, "
              f"then {r['passes'] - 1} passes at {r['steady_per_pass_s']:.6f} "
              f"s/pass, Q={r['Q']!r}, D={r['D']!r}, omega={r['omega']:.3e}, "
              f"stored duals {r['dual_store_size']}")
    if len(results) == 2:
        diff = float(np.max(np.abs(results[0]["x"] - results[1]["x"])))
        print(f"max |x_{results[0]['backend']} - x_{results[1]['backend']}| "
              f"= {diff!r}")
    if args.out:
        dump = [{k: v for k, v in r.items() if k != "x"} for r in results]
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump({"instance": vars(args) | {"command": "bench"},
                           "results": dump}, fh, indent=2, sort_keys=True,
                          default=float)
                fh.write("\n")
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot write timings: {e}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return _run_solve(args, parser)
        return _run_bench(args)
    except SystemExit as e:
        # argparse paths: --help exits 0, flag errors exit 64
        code = e.code
        return int(code) if code is not None else 0
    except CliError as e:
        print(f"metricopt-x: error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
