"""Run reports and solution dumps.

SolveReport carries everything a downstream tool needs to reproduce a
table row: problem kind and parameters, counts, timings, the
certificate, and the termination reason.  JSON serialization
round-trips losslessly except for the in-memory solution vector, which
is written separately by write_solution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .certify import Certificate, build_certificate
from .problems import Layout, Problem

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SolveReport:
    """One solver run, serializable.

    x holds the reported solution vector (rounded when termination is
    "rounded") and is excluded from JSON and equality; use
    write_solution for a durable copy.
    """

    kind: str
    params: dict
    graph: dict | None
    constraint_count: int
    pass_count: int
    projections: int
    dual_store_size: int
    dual_store_peak: int
    wall_time: float
    termination: str
    rounded_digits: int | None
    certificate: Certificate
    solution_path: str | None = None
    schema: int = SCHEMA_VERSION
    x: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "kind": self.kind,
            "params": self.params,
            "graph": self.graph,
            "constraint_count": self.constraint_count,
            "pass_count": self.pass_count,
            "projections": self.projections,
            "dual_store_size": self.dual_store_size,
            "dual_store_peak": self.dual_store_peak,
            "wall_time": self.wall_time,
            "termination": self.termination,
            "rounded_digits": self.rounded_digits,
            "certificate": self.certificate.to_dict(),
            "solution_path": self.solution_path,
        }

    def to_json(self) -> str:
        return json.dumps(_json_safe(self.to_dict()), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        cert = Certificate(**d["certificate"])
        return cls(
            kind=d["kind"],
            params=d["params"],
            graph=d["graph"],
            constraint_count=d["constraint_count"],
            pass_count=d["pass_count"],
            projections=d["projections"],
            dual_store_size=d["dual_store_size"],
            dual_store_peak=d["dual_store_peak"],
            wall_time=d["wall_time"],
            termination=d["termination"],
            rounded_digits=d["rounded_digits"],
            certificate=cert,
            solution_path=d["solution_path"],
            schema=d["schema"],
        )

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        return cls.from_dict(json.loads(text))

    def with_graph(self, graph: dict) -> "SolveReport":
        return replace(self, graph=_json_safe(graph))

    def with_solution_path(self, path: str) -> "SolveReport":
        return replace(self, solution_path=path)


def _json_safe(value):
    """Plain-Python copy: tuples to lists, numpy scalars/arrays to
    native types.  Raises on anything json cannot hold."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise TypeError(f"not JSON-serializable: {type(value).__name__}")


def _report_params(p: Problem, cfg, backend: str) -> dict:
    params = {
        "gamma": p.gamma,
        "tol_gap": cfg.tol_gap,
        "tol_con": cfg.tol_con,
        "max_passes": cfg.max_passes,
        "round_digits": list(cfg.round_digits),
        "full_check_period": cfg.full_check_period,
        "backend": backend,
    }
    for key in ("lam", "wmin", "offset", "maximize"):
        if key in p.meta:
            params[key] = p.meta[key]
    return _json_safe(params)


def assemble_report(p: Problem, cfg, s, termination: str, accepted: dict | None,
                    wall: float) -> SolveReport:
    """Build the report from a finished solver state.  accepted is the
    round_attempt result when termination is "rounded"."""
    solution = accepted["x"] if accepted is not None else s.x
    cert = build_certificate(p, s, solution)
    graph = None
    if "n" in p.meta:
        graph = _json_safe({k: p.meta[k] for k in ("n",) if k in p.meta})
    return SolveReport(
        kind=p.kind,
        params=_report_params(p, cfg, s.backend),
        graph=graph,
        constraint_count=s.num_constraints,
        pass_count=s.passes,
        projections=s.projections,
        dual_store_size=s.store.nnz,
        dual_store_peak=s.peak_store,
        wall_time=wall,
        termination=termination,
        rounded_digits=accepted["r"] if accepted is not None else None,
        certificate=cert,
        x=np.array(solution, dtype=np.float64, copy=True),
    )


def write_report(report: SolveReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def load_report(path: str) -> SolveReport:
    with open(path, "r", encoding="utf-8") as fh:
        return SolveReport.from_json(fh.read())


def write_solution(x: np.ndarray, layout: Layout, path: str, kind: str) -> None:
    """Dump the solution as text: header "metricopt-x v1 <kind> n=<n>
    N=<N>", then one line "<i> <j> <value>" per variable in layout
    order.  The pairs-plus-slack layout lists the pair block first and
    the matching slack block after it.  repr keeps every float
    round-trippable, and rounded solutions print with their short
    digits.  Byte output is deterministic for identical inputs.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) != layout.N:
        raise ValueError(f"solution length {len(x)} != layout size {layout.N}")
    lines = [f"metricopt-x v1 {kind} n={layout.n} N={layout.N}"]
    pairs = layout.pairs
    for t in range(layout.N):
        i, j = pairs[t % len(pairs)] if layout.kind == "pairs_plus_slack" else pairs[t]
        lines.append(f"{i} {j} {float(x[t])!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
