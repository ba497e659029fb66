"""The compiled core and the numpy fallback must agree."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from graphon_lab import _pycore

try:
    from graphon_lab import _core
except ImportError:
    _core = None

pytestmark = pytest.mark.skipif(_core is None, reason="compiled core not built")

unit = st.floats(0.0, 1.0)
coords = st.floats(-100, 100)


def test_backend_names():
    assert _pycore.BACKEND == "numpy" and _core.BACKEND == "cython"


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 15).flatmap(lambda n: st.tuples(arrays(np.float64, (n, n), elements=unit),
                                                     arrays(np.float64, (n, 3), elements=coords))))
def test_drift_and_distances(args):
    w, x = args
    assert np.allclose(_core.laplacian_drift(w, x), _pycore.laplacian_drift(w, x), rtol=1e-13, atol=1e-11)
    assert np.allclose(_core.pairwise_dist(x), _pycore.pairwise_dist(x), rtol=1e-14, atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 15).flatmap(lambda n: arrays(np.float64, (n, n), elements=unit)))
def test_overlap(w):
    n = w.shape[0]
    assert _core.pair_overlap_min(w, float(n)) == pytest.approx(_pycore.pair_overlap_min(w, float(n)), abs=1e-15)
    assert _core.self_overlap(w[0], n) == pytest.approx(_pycore.self_overlap(w[0], n), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.floats(-5, 5))))
def test_jacobi(m):
    m = 0.5 * (m + m.T)
    a = np.sort(_core.jacobi_eigenvalues(m.copy()))
    b = np.sort(_pycore.jacobi_eigenvalues(m.copy()))
    assert np.allclose(a, b, atol=1e-10)
    assert np.allclose(a, np.linalg.eigvalsh(m), atol=1e-10)


def test_jacobi_non_convergence():
    m = np.random.default_rng(0).standard_normal((30, 30))
    m = m + m.T
    for mod in (_core, _pycore):
        with pytest.raises(RuntimeError):
            mod.jacobi_eigenvalues(m.copy(), 1e-300, 1)


def test_perron_iterate():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.random((8, 8)) + 0.05
        va, oka, _ = _core.perron_iterate(a)
        vb, okb, _ = _pycore.perron_iterate(a)
        assert oka and okb
        assert np.allclose(va, vb, atol=1e-10)
