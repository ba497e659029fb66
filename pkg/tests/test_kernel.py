import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_lab.kernel import (
    BUILTIN_NAMES,
    TimeKernel,
    builtin_kernel,
    constant_phi,
    cucker_smale_phi,
    gamma_R,
    load_grid_kernel,
    switching_kernel,
)


def test_balanced_cycle_diagonal_is_one():
    k = builtin_kernel("balanced_cycle")
    for t in (0.0, 3.7, 100.0):
        for i in (0.0, 0.31, 0.999, 1.0):
            assert k(t, i, i) == 1.0


def test_complete_is_one():
    assert builtin_kernel("complete")(5.0, 0.3, 0.7) == 1.0


def test_leader_silent_in_last_slot():
    k = builtin_kernel("leader", T=10, n=10)
    i, j = np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41))
    assert np.all(k(9.5, i, j) == 0.0)
    # active otherwise, at the centre of the tent
    assert k(0.0, 0.4, 0.05) == pytest.approx(1.0)


def test_half_connected_example():
    assert builtin_kernel("half_connected")(0.0, 0.25, 0.6) == 0.0


def test_metadata():
    leader = builtin_kernel("leader", T=10, n=10)
    assert not leader.is_symmetric and leader.period == 10
    bc = builtin_kernel("balanced_cycle")
    assert bc.is_balanced and bc.is_stationary and not bc.is_symmetric
    ss = builtin_kernel("symmetric_switch", T=10, n=10)
    assert ss.is_symmetric and ss.period == 10
    for name in ("half_connected", "complete", "two_block"):
        k = builtin_kernel(name)
        assert k.is_symmetric and k.is_balanced and k.is_stationary


@pytest.mark.parametrize("bad", [dict(name="nope"), dict(name="leader", T=0), dict(name="leader", n=0),
                                 dict(name="symmetric_switch", T=-1.0), dict(name="leader", n=2.5)])
def test_builtin_errors(bad):
    with pytest.raises(ValueError):
        builtin_kernel(**bad)


def test_cucker_smale_values():
    phi = cucker_smale_phi()
    assert phi(0.0) == 1.0
    assert phi(1.0) == 0.25
    assert phi.c_phi == 1.0


def _grid_min(f, R, n=200_001):
    r = np.linspace(0.0, 2 * R, n)
    return float(np.min(f(r)))


def test_gamma_R_values():
    assert gamma_R(constant_phi(1.0), 5.0) == 1.0
    cs = cucker_smale_phi()
    # brute-force grid oracle
    assert gamma_R(cs, 1.0) == pytest.approx(_grid_min(cs, 1.0), abs=1e-12)
    assert gamma_R(cs, 1.0) == pytest.approx(1 / 9, abs=1e-12)
    assert gamma_R(cs, 0.5) == pytest.approx(0.25, abs=1e-12)


def test_gamma_R_interior_minimum():
    phi = constant_phi(1.0)
    bump = type(phi)(lambda r: 1.0 + (np.asarray(r) - 0.7) ** 2, c_phi=10.0)
    assert gamma_R(bump, 1.0) == pytest.approx(1.0, abs=1e-10)


def test_gamma_R_rejects_bad_R():
    with pytest.raises(ValueError):
        gamma_R(cucker_smale_phi(), 0.0)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_values_in_unit_interval(name):
    rng = np.random.default_rng(0)
    k = builtin_kernel(name)
    i, j = rng.random(100_000), rng.random(100_000)
    for t in rng.random(5) * 40:
        v = k(t, i, j)
        assert v.shape == i.shape
        assert np.all((v >= 0) & (v <= 1))


@pytest.mark.parametrize("name", [n for n in BUILTIN_NAMES if builtin_kernel(n).is_symmetric])
def test_symmetry_is_honest(name):
    rng = np.random.default_rng(1)
    k = builtin_kernel(name)
    i, j = rng.random(10_000), rng.random(10_000)
    for t in rng.random(5) * 40:
        assert np.max(np.abs(k(t, i, j) - k(t, j, i))) == 0.0


@pytest.mark.parametrize("name", ["leader", "symmetric_switch"])
def test_periodicity_is_honest(name):
    rng = np.random.default_rng(2)
    k = builtin_kernel(name, T=8.0, n=4)
    i, j = rng.random(10_000), rng.random(10_000)
    # periods that keep t + period exact in binary
    for t in (0.5, 1.25, 3.0, 6.5, 7.75):
        assert np.array_equal(k(t, i, j), k(t + k.period, i, j))


def test_balanced_cycle_row_and_column_integrals():
    k = builtin_kernel("balanced_cycle")
    s = (np.arange(20_000) + 0.5) / 20_000
    for i in (0.0, 0.13, 0.5, 0.87):
        row = k(0.0, i, s).mean()
        col = k(0.0, s, i).mean()
        assert abs(row - col) < 1e-6
        assert row == pytest.approx(1 / 8, abs=1e-6)


def test_switch_times_validated():
    with pytest.raises(ValueError):
        TimeKernel(lambda t, i, j: 1.0, switch_times=(0.0, 2.0, 1.0))
    with pytest.raises(ValueError):
        TimeKernel(lambda t, i, j: 1.0, switch_times=(0.5, 1.0))


def test_dwell_time_and_breakpoints():
    k = switching_kernel([np.ones((2, 2)), np.eye(2)], [1.0, 3.0], periodic=True)
    assert k.dwell_time == 1.0
    assert k.breakpoints(0.0, 9.0) == [1.0, 4.0, 5.0, 8.0]
    assert k.is_symmetric and k.piecewise_constant


def test_switching_kernel_values():
    k = switching_kernel([np.ones((2, 2)), np.eye(2)], [1.0, 3.0], periodic=True)
    assert k(0.5, 0.1, 0.9) == 1.0
    assert k(2.0, 0.1, 0.9) == 0.0
    assert k(4.5, 0.1, 0.9) == 1.0


def test_grid_file(tmp_path):
    p = tmp_path / "k.txt"
    p.write_text("N 2 T_SAMPLES 2\n1 0\n0 1\n1 1\n1 1\n")
    k = load_grid_kernel(p)
    assert k.period == 2.0 and k.piecewise_constant
    assert k(0.5, 0.1, 0.9) == 0.0
    assert k(1.5, 0.1, 0.9) == 1.0
    assert k(2.5, 0.1, 0.9) == 0.0


@pytest.mark.parametrize("text", ["N 2 T_SAMPLES 1\n1 0\n0\n", "M 2 T 1\n1 1\n1 1\n", "N 1 T_SAMPLES 1\n2\n"])
def test_grid_file_errors(tmp_path, text):
    p = tmp_path / "k.txt"
    p.write_text(text)
    with pytest.raises(ValueError):
        load_grid_kernel(p)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0),
       st.sampled_from(BUILTIN_NAMES))
def test_scalar_evaluation_matches_vectorised(t, i, j, name):
    k = builtin_kernel(name)
    v = k(t, np.array([i, 0.5]), np.array([j, 0.5]))
    assert float(k(t, i, j)) == v[0]
    assert 0.0 <= v[0] <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 50.0))
def test_gamma_R_is_a_lower_bound(R):
    phi = cucker_smale_phi()
    g = gamma_R(phi, R)
    r = np.linspace(0.0, 2 * R, 1001)
    assert np.all(g <= phi(r) + 1e-12)
    assert g == pytest.approx(1.0 / (1.0 + 2 * R) ** 2, rel=1e-9)
