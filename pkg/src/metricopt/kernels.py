"""Constraint-sweep kernels.

Each family gets a sweep kernel (correct-then-project over every row,
appending nonzero duals to the current store) and a violation kernel
(read-only max residual scan with optional early exit).  The functions
are written once in plain Python; the numba backend compiles the same
function objects with @njit, so both backends execute identical
arithmetic in identical order.

Backend selection: the METRICOPT_BACKEND environment variable
("auto" | "numba" | "python", default "auto") or an explicit argument to
get_kernels.  "auto" uses numba when importable and falls back to pure
Python otherwise.

Sweep kernels share a parameter tail
    (prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty)
and return (cur, clen, bty, nproj): the advanced cursor into the
previous-pass store, the current store length after appends, the
accumulated b'y contribution, and the number of projections performed.
The previous-pass store is sorted by constraint id and each id is
consumed at most once, so a single advancing cursor suffices.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False

BACKEND_ENV = "METRICOPT_BACKEND"

_INF = np.inf


def sweep_triangle_all(x, invw, d, n, t0,
                       prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    nproj = 0
    t = t0
    for i in range(1, n + 1):
        row_i = (i - 1) * (2 * n - i) // 2 - i - 1
        for j in range(i + 1, n + 1):
            ij = row_i + j
            row_j = (j - 1) * (2 * n - j) // 2 - j - 1
            for k in range(j + 1, n + 1):
                ik = row_i + k
                jk = row_j + k
                iwij = invw[ij]
                iwik = invw[ik]
                iwjk = invw[jk]
                den = iwij + iwik + iwjk
                dij = d[ij]
                dik = d[ik]
                djk = d[jk]
                for o in range(3):
                    s0 = 1.0 if o == 0 else -1.0
                    s1 = 1.0 if o == 1 else -1.0
                    s2 = 1.0 if o == 2 else -1.0
                    b = -(s0 * dij + s1 * dik + s2 * djk)
                    if cur < plen and prev_t[cur] == t:
                        yt = prev_y[cur]
                        cur += 1
                        x[ij] += s0 * yt * iwij
                        x[ik] += s1 * yt * iwik
                        x[jk] += s2 * yt * iwjk
                    delta = s0 * x[ij] + s1 * x[ik] + s2 * x[jk] - b
                    if delta > 0.0:
                        theta = delta / den
                        x[ij] -= s0 * theta * iwij
                        x[ik] -= s1 * theta * iwik
                        x[jk] -= s2 * theta * iwjk
                        curr_t[clen] = t
                        curr_y[clen] = theta
                        clen += 1
                        if b != 0.0:
                            bty += b * theta
                        nproj += 1
                    t += 1
    return cur, clen, bty, nproj


def sweep_triangle_cliques(x, invw, rows, t0,
                           prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    nproj = 0
    t = t0
    for r in range(rows.shape[0]):
        ij = rows[r, 0]
        ik = rows[r, 1]
        jk = rows[r, 2]
        iwij = invw[ij]
        iwik = invw[ik]
        iwjk = invw[jk]
        den = iwij + iwik + iwjk
        for o in range(3):
            s0 = 1.0 if o == 0 else -1.0
            s1 = 1.0 if o == 1 else -1.0
            s2 = 1.0 if o == 2 else -1.0
            if cur < plen and prev_t[cur] == t:
                yt = prev_y[cur]
                cur += 1
                x[ij] += s0 * yt * iwij
                x[ik] += s1 * yt * iwik
                x[jk] += s2 * yt * iwjk
            delta = s0 * x[ij] + s1 * x[ik] + s2 * x[jk]
            if delta > 0.0:
                theta = delta / den
                x[ij] -= s0 * theta * iwij
                x[ik] -= s1 * theta * iwik
                x[jk] -= s2 * theta * iwjk
                curr_t[clen] = t
                curr_y[clen] = theta
                clen += 1
                nproj += 1
            t += 1
    return cur, clen, bty, nproj


def sweep_perimeter(x, invw, n, bound, t0,
                    prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    nproj = 0
    t = t0
    for i in range(1, n + 1):
        row_i = (i - 1) * (2 * n - i) // 2 - i - 1
        for j in range(i + 1, n + 1):
            ij = row_i + j
            row_j = (j - 1) * (2 * n - j) // 2 - j - 1
            for k in range(j + 1, n + 1):
                ik = row_i + k
                jk = row_j + k
                iwij = invw[ij]
                iwik = invw[ik]
                iwjk = invw[jk]
                if cur < plen and prev_t[cur] == t:
                    yt = prev_y[cur]
                    cur += 1
                    x[ij] += yt * iwij
                    x[ik] += yt * iwik
                    x[jk] += yt * iwjk
                delta = x[ij] + x[ik] + x[jk] - bound
                if delta > 0.0:
                    theta = delta / (iwij + iwik + iwjk)
                    x[ij] -= theta * iwij
                    x[ik] -= theta * iwik
                    x[jk] -= theta * iwjk
                    curr_t[clen] = t
                    curr_y[clen] = theta
                    clen += 1
                    bty += bound * theta
                    nproj += 1
                t += 1
    return cur, clen, bty, nproj


def sweep_wedges(x, invw, rows, t0,
                 prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    # row -x_u - x_v <= -1
    nproj = 0
    t = t0
    for r in range(rows.shape[0]):
        u = rows[r, 0]
        v = rows[r, 1]
        iwu = invw[u]
        iwv = invw[v]
        if cur < plen and prev_t[cur] == t:
            yt = prev_y[cur]
            cur += 1
            x[u] -= yt * iwu
            x[v] -= yt * iwv
        delta = 1.0 - x[u] - x[v]
        if delta > 0.0:
            theta = delta / (iwu + iwv)
            x[u] += theta * iwu
            x[v] += theta * iwv
            curr_t[clen] = t
            curr_y[clen] = theta
            clen += 1
            bty -= theta
            nproj += 1
        t += 1
    return cur, clen, bty, nproj


def sweep_coupling(x, invw, num_pairs, t0,
                   prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    # per pair p: y_p - m_p <= 0 then -y_p - m_p <= 0, with m at num_pairs + p
    nproj = 0
    t = t0
    for p in range(num_pairs):
        q = num_pairs + p
        iwy = invw[p]
        iwm = invw[q]
        den = iwy + iwm
        if cur < plen and prev_t[cur] == t:
            yt = prev_y[cur]
            cur += 1
            x[p] += yt * iwy
            x[q] -= yt * iwm
        delta = x[p] - x[q]
        if delta > 0.0:
            theta = delta / den
            x[p] -= theta * iwy
            x[q] += theta * iwm
            curr_t[clen] = t
            curr_y[clen] = theta
            clen += 1
            nproj += 1
        t += 1
        if cur < plen and prev_t[cur] == t:
            yt = prev_y[cur]
            cur += 1
            x[p] -= yt * iwy
            x[q] -= yt * iwm
        delta = -x[p] - x[q]
        if delta > 0.0:
            theta = delta / den
            x[p] += theta * iwy
            x[q] += theta * iwm
            curr_t[clen] = t
            curr_y[clen] = theta
            clen += 1
            nproj += 1
        t += 1
    return cur, clen, bty, nproj


def sweep_box(x, invw, num_vars, lo, hi, t0,
              prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    # per variable: -x <= -lo (if lo finite) then x <= hi (if hi finite)
    nproj = 0
    t = t0
    has_lo = lo > -_INF
    has_hi = hi < _INF
    for v in range(num_vars):
        iwv = invw[v]
        if has_lo:
            if cur < plen and prev_t[cur] == t:
                yt = prev_y[cur]
                cur += 1
                x[v] -= yt * iwv
            delta = lo - x[v]
            if delta > 0.0:
                theta = delta / iwv
                x[v] += theta * iwv
                curr_t[clen] = t
                curr_y[clen] = theta
                clen += 1
                if lo != 0.0:
                    bty += (-lo) * theta
                nproj += 1
            t += 1
        if has_hi:
            if cur < plen and prev_t[cur] == t:
                yt = prev_y[cur]
                cur += 1
                x[v] += yt * iwv
            delta = x[v] - hi
            if delta > 0.0:
                theta = delta / iwv
                x[v] -= theta * iwv
                curr_t[clen] = t
                curr_y[clen] = theta
                clen += 1
                if hi != 0.0:
                    bty += hi * theta
                nproj += 1
            t += 1
    return cur, clen, bty, nproj


def sweep_sumeq(x, invw, num_vars, target, t0,
                prev_t, prev_y, plen, cur, curr_t, curr_y, clen, bty):
    # single dense hyperplane sum(x) = target; sign-free dual
    nproj = 0
    if cur < plen and prev_t[cur] == t0:
        yt = prev_y[cur]
        cur += 1
        for v in range(num_vars):
            x[v] += yt * invw[v]
    acc = 0.0
    den = 0.0
    for v in range(num_vars):
        acc += x[v]
        den += invw[v]
    theta = (acc - target) / den
    if theta != 0.0:
        for v in range(num_vars):
            x[v] -= theta * invw[v]
        curr_t[clen] = t0
        curr_y[clen] = theta
        clen += 1
        bty += target * theta
        nproj += 1
    return cur, clen, bty, nproj


# --- violation scans --------------------------------------------------------


def viol_triangle_all(x, d, n, limit):
    rho = 0.0
    for i in range(1, n + 1):
        row_i = (i - 1) * (2 * n - i) // 2 - i - 1
        for j in range(i + 1, n + 1):
            ij = row_i + j
            row_j = (j - 1) * (2 * n - j) // 2 - j - 1
            for k in range(j + 1, n + 1):
                ik = row_i + k
                jk = row_j + k
                xij = x[ij]
                xik = x[ik]
                xjk = x[jk]
                dij = d[ij]
                dik = d[ik]
                djk = d[jk]
                r = xij - xik - xjk + (dij - dik - djk)
                if r > rho:
                    rho = r
                r = -xij + xik - xjk + (-dij + dik - djk)
                if r > rho:
                    rho = r
                r = -xij - xik + xjk + (-dij - dik + djk)
                if r > rho:
                    rho = r
                if rho > limit:
                    return rho
    return rho


def viol_triangle_cliques(x, rows, limit):
    rho = 0.0
    for r_ in range(rows.shape[0]):
        xij = x[rows[r_, 0]]
        xik = x[rows[r_, 1]]
        xjk = x[rows[r_, 2]]
        r = xij - xik - xjk
        if r > rho:
            rho = r
        r = -xij + xik - xjk
        if r > rho:
            rho = r
        r = -xij - xik + xjk
        if r > rho:
            rho = r
        if rho > limit:
            return rho
    return rho


def viol_perimeter(x, n, bound, limit):
    rho = 0.0
    for i in range(1, n + 1):
        row_i = (i - 1) * (2 * n - i) // 2 - i - 1
        for j in range(i + 1, n + 1):
            ij = row_i + j
            row_j = (j - 1) * (2 * n - j) // 2 - j - 1
            for k in range(j + 1, n + 1):
                r = x[ij] + x[row_i + k] + x[row_j + k] - bound
                if r > rho:
                    rho = r
                    if rho > limit:
                        return rho
    return rho


def viol_wedges(x, rows, limit):
    rho = 0.0
    for r_ in range(rows.shape[0]):
        r = 1.0 - x[rows[r_, 0]] - x[rows[r_, 1]]
        if r > rho:
            rho = r
            if rho > limit:
                return rho
    return rho


def viol_coupling(x, num_pairs, limit):
    rho = 0.0
    for p in range(num_pairs):
        m = x[num_pairs + p]
        r = x[p] - m
        if r > rho:
            rho = r
        r = -x[p] - m
        if r > rho:
            rho = r
        if rho > limit:
            return rho
    return rho


def viol_box(x, num_vars, lo, hi, limit):
    rho = 0.0
    has_lo = lo > -_INF
    has_hi = hi < _INF
    for v in range(num_vars):
        if has_lo:
            r = lo - x[v]
            if r > rho:
                rho = r
        if has_hi:
            r = x[v] - hi
            if r > rho:
                rho = r
        if rho > limit:
            return rho
    return rho


def viol_sumeq(x, num_vars, target):
    acc = 0.0
    for v in range(num_vars):
        acc += x[v]
    return abs(acc - target)


def bty_triangle_all(store_t, store_y, k0, k1, d, n, t0):
    """Recompute the b'y contribution of stored triangle duals by
    decoding each constraint id back to its triple and orientation."""
    total = 0.0
    for k in range(k0, k1):
        local = store_t[k] - t0
        o = local % 3
        rank = local // 3
        i = 1
        cnt = (n - i) * (n - i - 1) // 2
        while rank >= cnt:
            rank -= cnt
            i += 1
            cnt = (n - i) * (n - i - 1) // 2
        j = i + 1
        while rank >= n - j:
            rank -= n - j
            j += 1
        kk = j + 1 + rank
        ij = (i - 1) * (2 * n - i) // 2 + (j - i) - 1
        ik = (i - 1) * (2 * n - i) // 2 + (kk - i) - 1
        jk = (j - 1) * (2 * n - j) // 2 + (kk - j) - 1
        s0 = 1.0 if o == 0 else -1.0
        s1 = 1.0 if o == 1 else -1.0
        s2 = 1.0 if o == 2 else -1.0
        b = -(s0 * d[ij] + s1 * d[ik] + s2 * d[jk])
        total += b * store_y[k]
    return total


_KERNEL_NAMES = (
    "sweep_triangle_all",
    "sweep_triangle_cliques",
    "sweep_perimeter",
    "sweep_wedges",
    "sweep_coupling",
    "sweep_box",
    "sweep_sumeq",
    "viol_triangle_all",
    "viol_triangle_cliques",
    "viol_perimeter",
    "viol_wedges",
    "viol_coupling",
    "viol_box",
    "viol_sumeq",
    "bty_triangle_all",
)

_PY_NS = None
_NB_NS = None


def _python_namespace() -> SimpleNamespace:
    global _PY_NS
    if _PY_NS is None:
        _PY_NS = SimpleNamespace(
            name="python", **{k: globals()[k] for k in _KERNEL_NAMES}
        )
    return _PY_NS


def _numba_namespace() -> SimpleNamespace:
    global _NB_NS
    if _NB_NS is None:
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        jit = numba.njit(cache=True, nogil=True)
        _NB_NS = SimpleNamespace(
            name="numba", **{k: jit(globals()[k]) for k in _KERNEL_NAMES}
        )
    return _NB_NS


def resolve_backend(choice: str | None = None) -> str:
    """Map a requested backend ("auto"/"numba"/"python"/None) to the
    concrete one, consulting METRICOPT_BACKEND when unset."""
    if choice is None:
        choice = os.environ.get(BACKEND_ENV, "auto")
    choice = choice.strip().lower()
    if choice == "auto":
        return "numba" if HAS_NUMBA else "python"
    if choice in ("numba", "python"):
        return choice
    raise ValueError(f"unknown backend {choice!r} (use auto, numba, or python)")


def get_kernels(backend: str | None = None) -> SimpleNamespace:
    concrete = resolve_backend(backend)
    if concrete == "numba":
        return _numba_namespace()
    return _python_namespace()
