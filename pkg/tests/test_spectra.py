import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steklov_geom.separation import collar_mixed_mode, flat_mixed_mode
from steklov_geom.spectra import (
    ClosedFormSpectrum,
    collar_depth,
    collar_mixed,
    collar_test_energy,
    collar_width,
    cylinder_mixed,
    cylinder_steklov,
    rho,
)

ASINH1 = math.asinh(1.0)


def test_rho():
    r = rho()
    assert abs(r - 1.19968) < 1e-4
    assert abs(r * math.tanh(r) - 1.0) < 1e-12
    assert 1.0 < r < 1.5


@pytest.mark.parametrize("n", [1, 2, 4])
def test_long_cylinder_first_eigenvalue(n):
    T = 2 * math.pi * n
    assert cylinder_steklov(1.0, T, 4)[1] == 1.0 / T


def test_short_cylinder_first_eigenvalue():
    spec = cylinder_steklov(1.0, 1.0, 6)
    assert spec[0] == 0.0
    assert spec[1] == pytest.approx(math.tanh(1.0), rel=1e-15)
    assert spec[1] == pytest.approx(0.761594, abs=1e-6)


def test_cylinder_multiplicities_and_labels():
    spec = cylinder_steklov(1.0, 1.0, 8)
    kinds = [m.kind for m in spec]
    assert kinds[0] == "const"
    for j in (1, 2):
        assert sum(1 for m in spec.modes if m.j == j and m.kind == "tanh") == 2
    assert np.all(np.diff(spec.values) >= 0)


@pytest.mark.parametrize("R,T", [(1.0, 0.3), (2.0, 5.0), (0.5, 0.6)])
def test_threshold_behaviour(R, T):
    s1 = cylinder_steklov(R, T, 2)[1]
    if T / R >= rho():
        assert s1 == pytest.approx(1.0 / T)
    else:
        assert s1 == pytest.approx(math.tanh(T / R) / R)


def test_mixed_examples():
    n = cylinder_mixed(2 * math.pi, 1.0, "N", 4).values
    np.testing.assert_allclose(n, [0, math.tanh(1), math.tanh(1), 2 * math.tanh(2), 2 * math.tanh(2)], rtol=1e-15)
    d = cylinder_mixed(2 * math.pi, 1.0, "D", 2).values
    np.testing.assert_allclose(d, [1.0, 1 / math.tanh(1), 1 / math.tanh(1)], rtol=1e-15)


@pytest.mark.parametrize("a,L", [(2 * math.pi, 1.0), (1.0, 0.3), (5.0, 2.0)])
def test_mixed_against_separation_oracle(a, L):
    for kind in "ND":
        spec = cylinder_mixed(a, L, kind, 8)
        for m in spec:
            if m.j >= 1:
                assert flat_mixed_mode(a, L, m.j, kind) == pytest.approx(m.sigma, rel=1e-10)


@given(st.floats(0.1, 10.0), st.floats(0.05, 5.0))
@settings(max_examples=50, deadline=None)
def test_neumann_below_dirichlet(a, L):
    n = cylinder_mixed(a, L, "N", 10).values
    d = cylinder_mixed(a, L, "D", 10).values
    assert np.all(n <= d)


@pytest.mark.parametrize("R,T", [(1.0, 1.0), (1.0, 0.4), (2.0, 3.0)])
def test_cylinder_interleaving_up_to_20(R, T):
    # the strips next to each circle of S^1_R x [-T, T] have depth T and boundary length 2 pi R
    full = cylinder_steklov(R, T, 20).values
    a = 2 * math.pi * R
    n1 = cylinder_mixed(a, T, "N", 20).values
    d1 = cylinder_mixed(a, T, "D", 20).values
    n = np.sort(np.r_[n1, n1])[:21]
    d = np.sort(np.r_[d1, d1])[:21]
    assert np.all(n <= full + 1e-14)
    assert np.all(full <= d + 1e-14)


def test_collar_width():
    assert collar_width(2 * ASINH1) == pytest.approx(ASINH1, rel=1e-14)
    ls = np.geomspace(1e-8, 200, 60)
    ws = [collar_width(float(x)) for x in ls]
    assert np.all(np.diff(ws) < 0)
    # logarithmic blow-up: w(1e-3) = arcsinh(1/sinh(5e-4)) = log(4000) + O(l^2)
    assert collar_width(1e-3) == pytest.approx(math.log(4000.0), rel=1e-6)
    assert collar_width(1e3) == pytest.approx(2 * math.exp(-500.0), rel=1e-12)
    # asymptotic branches join the direct formula
    assert collar_width(49.999) == pytest.approx(collar_width(50.001), rel=1e-2)
    assert collar_width(9.999e-7) == pytest.approx(collar_width(1.0001e-6), rel=1e-3)
    assert collar_width(1.0001e-6) == pytest.approx(math.asinh(1 / math.sinh(0.50005e-6)), rel=1e-12)


def test_collar_mixed_examples():
    a = 2 * ASINH1
    assert collar_depth(a) == pytest.approx(math.pi / 4, rel=1e-15)
    s1 = collar_mixed(a, "N", 2)[1]
    w = 2 * math.pi / a
    assert s1 == pytest.approx(w * math.tanh(w * math.pi / 4), rel=1e-15)
    assert s1 == pytest.approx(3.5382, abs=1e-4)
    assert collar_mixed(a, "D", 3).values.tolist() == cylinder_mixed(a, math.pi / 4, "D", 3).values.tolist()


@pytest.mark.parametrize("l", [0.3, 1.0, 2 * ASINH1, 3.0])
def test_collar_mixed_against_ode_oracle(l):
    w = collar_width(l)
    for kind in "ND":
        spec = collar_mixed(l, kind, 4)
        for m in spec:
            if m.j >= 1:
                assert collar_mixed_mode(l, w, m.j, kind) == pytest.approx(m.sigma, rel=1e-10)


def test_collar_test_energy():
    assert collar_test_energy(1.0) == pytest.approx(1.0 / math.atan(1 / math.sinh(0.5)), rel=1e-15)
    assert collar_test_energy(1.0) == pytest.approx(0.9171, abs=1e-4)
    assert collar_test_energy(2 * ASINH1) == pytest.approx(8 * ASINH1 / math.pi, rel=1e-15)


def test_invalid_arguments():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            cylinder_steklov(bad, 1.0, 2)
        with pytest.raises(ValueError):
            collar_width(bad)
    with pytest.raises(ValueError):
        cylinder_mixed(1.0, 1.0, "X", 2)
    with pytest.raises(ValueError):
        cylinder_steklov(1.0, 1.0, -1)


def test_csv_format():
    text = cylinder_steklov(1.0, 1.0, 2).to_csv()
    assert text.splitlines()[0] == "k,sigma,j,mode"
    assert text.splitlines()[1] == "0,0.0,0,const"
    assert isinstance(cylinder_steklov(1.0, 1.0, 2), ClosedFormSpectrum)
