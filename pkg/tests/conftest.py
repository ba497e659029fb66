import numpy as np
import pytest

from graphon_lab import _pycore, dynamics, spectral

try:
    from graphon_lab import _core
except ImportError:
    _core = None

BACKENDS = ["numpy"] + (["cython"] if _core is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available compiled/numpy core."""
    mod = _pycore if request.param == "numpy" else _core
    monkeypatch.setattr(dynamics, "core", mod)
    monkeypatch.setattr(spectral, "core", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
