"""Backend selection and python/numba twin equivalence.

The compiled backend is the same function objects passed through njit,
so the two backends must produce bit-identical iterates, not merely
close ones.
"""

import numpy as np
import pytest

from metricopt import kernels
from metricopt.graphs import SignedGraph
from metricopt.problems import (
    build_cluster_deletion,
    build_correlation_clustering,
    build_max_cut,
    build_metric_nearness,
    build_modularity,
    build_sparsest_cut,
)
from metricopt.solver import full_pass, init_state

from conftest import gnp_component, random_dissimilarities, random_signed_graph

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")


def test_resolve_backend_explicit():
    assert kernels.resolve_backend("python") == "python"
    assert kernels.resolve_backend(" PYTHON ") == "python"
    with pytest.raises(ValueError):
        kernels.resolve_backend("fortran")


def test_resolve_backend_env(monkeypatch):
    monkeypatch.delenv(kernels.BACKEND_ENV, raising=False)
    assert kernels.resolve_backend(None) in ("python", "numba")
    monkeypatch.setenv(kernels.BACKEND_ENV, "python")
    assert kernels.resolve_backend(None) == "python"
    monkeypatch.setenv(kernels.BACKEND_ENV, "auto")
    expected = "numba" if kernels.HAS_NUMBA else "python"
    assert kernels.resolve_backend(None) == expected
    monkeypatch.setenv(kernels.BACKEND_ENV, "cuda")
    with pytest.raises(ValueError):
        kernels.resolve_backend(None)


def test_explicit_argument_beats_env(monkeypatch):
    monkeypatch.setenv(kernels.BACKEND_ENV, "python")
    assert kernels.resolve_backend("auto") in ("python", "numba")
    s = init_state(
        build_max_cut(gnp_component(6, 0.5, 1), 5.0), backend="python"
    )
    assert s.backend == "python"


def test_python_namespace_is_cached():
    assert kernels.get_kernels("python") is kernels.get_kernels("python")
    assert kernels.get_kernels("python").name == "python"


@needs_numba
def test_numba_namespace_is_cached():
    assert kernels.get_kernels("numba") is kernels.get_kernels("numba")
    assert kernels.get_kernels("numba").name == "numba"


def _twin_instances():
    g = gnp_component(8, 0.4, 13)
    d, w = random_dissimilarities(6, 17)
    sg = random_signed_graph(6, 19)
    return [
        build_metric_nearness(d, w, 5.0, n=6),
        build_correlation_clustering(sg, 5.0),
        build_sparsest_cut(g, 1.0 / g.n, 5.0),
        build_cluster_deletion(g, 5.0),
        build_max_cut(g, 5.0),
        build_modularity(g, 5.0),
    ]


@needs_numba
def test_backends_produce_identical_iterates():
    for p in _twin_instances():
        s_py = init_state(p, backend="python")
        s_nb = init_state(p, backend="numba")
        for _ in range(15):
            info_py = full_pass(s_py)
            info_nb = full_pass(s_nb)
            assert info_py == info_nb
            assert np.array_equal(s_py.x, s_nb.x)  # bitwise, no tolerance
        assert s_py.bty == s_nb.bty
        t_py, y_py = s_py.store.entries()
        t_nb, y_nb = s_nb.store.entries()
        assert np.array_equal(t_py, t_nb)
        assert np.array_equal(y_py, y_nb)


@needs_numba
def test_backends_agree_on_violation_scans():
    p = build_sparsest_cut(gnp_component(8, 0.4, 23), 0.125, 5.0)
    from metricopt.solver import max_violation

    s_py = init_state(p, backend="python")
    s_nb = init_state(p, backend="numba")
    for _ in range(5):
        full_pass(s_py)
        full_pass(s_nb)
    assert max_violation(s_py) == max_violation(s_nb)
