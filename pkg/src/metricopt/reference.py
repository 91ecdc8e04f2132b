"""Dense-dual reference passes used for validation.

Two slow twins of the production sweep: the correct-then-project form
and the dual-coordinate-ascent form whose step is
delta = min(-theta, y_t).  Both keep a dense dual vector indexed by
constraint id and accept a per-visit callback, which makes them the
instrumentation harness for the maintained-KKT, monotone-dual, and
equivalence checks.  Only for instances small enough to hold every row
in memory.
"""

from __future__ import annotations

import numpy as np

from .problems import Problem, iter_rows, total_constraints


def materialize_rows(p: Problem, limit: int = 500_000) -> list:
    """List of (cols, signs, b, eq) in global constraint order."""
    count = total_constraints(p)
    if count > limit:
        raise ValueError(f"{count} constraints exceed the reference limit {limit}")
    return [(cols, signs, b, eq) for _, cols, signs, b, eq in iter_rows(p)]


def init_x(p: Problem, gamma: float | None = None) -> np.ndarray:
    g = gamma if gamma is not None else p.gamma
    return -(g / p.w) * p.c


def dykstra_pass(rows, x, y, invw, on_visit=None) -> None:
    """One pass of the correction/projection form over dense duals.

    For each row: add back the stored dual, measure the residual, and
    replace the dual with the new projection multiplier (zero when the
    corrected point already satisfies an inequality).
    """
    for t, (cols, signs, b, eq) in enumerate(rows):
        y_old = y[t]
        if y_old != 0.0:
            for c, sg in zip(cols, signs):
                x[c] += sg * y_old * invw[c]
        acc = 0.0
        den = 0.0
        for c, sg in zip(cols, signs):
            acc += sg * x[c]
            den += invw[c]
        delta = acc - b
        if eq:
            theta = delta / den
        else:
            theta = delta / den if delta > 0.0 else 0.0
        if theta != 0.0:
            for c, sg in zip(cols, signs):
                x[c] -= sg * theta * invw[c]
        y[t] = theta
        if on_visit is not None:
            on_visit(t, cols, signs, b, eq, y_old, theta)


def hildreth_pass(rows, x, y, invw, on_visit=None) -> None:
    """One pass of the dual-coordinate-ascent form.

    theta is the raw residual in the dual metric at the uncorrected
    point; the step is clipped at the stored dual (delta = min(-theta,
    y_t), unclipped for the equality row), applied once to x, and
    subtracted from the dual.  Produces the same iterates as
    dykstra_pass up to roundoff.
    """
    for t, (cols, signs, b, eq) in enumerate(rows):
        y_old = y[t]
        acc = 0.0
        den = 0.0
        for c, sg in zip(cols, signs):
            acc += sg * x[c]
            den += invw[c]
        theta = (acc - b) / den
        if eq:
            step = -theta
        else:
            step = min(-theta, y_old)
        if step != 0.0:
            for c, sg in zip(cols, signs):
                x[c] += sg * step * invw[c]
        y[t] = y_old - step
        if on_visit is not None:
            on_visit(t, cols, signs, b, eq, y_old, y[t])


def run_passes(p: Problem, num_passes: int, variant: str = "dykstra",
               gamma: float | None = None, on_visit=None, rows=None):
    """Run full reference passes from the standard start; returns
    (x, y, rows)."""
    if rows is None:
        rows = materialize_rows(p)
    g = gamma if gamma is not None else p.gamma
    invw = g / p.w
    x = init_x(p, g)
    y = np.zeros(len(rows))
    step = dykstra_pass if variant == "dykstra" else hildreth_pass
    for _ in range(num_passes):
        step(rows, x, y, invw, on_visit=on_visit)
    return x, y, rows
