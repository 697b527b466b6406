import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from steklov_geom.dtn_eigen import (
    SolverError,
    dtn_matrix,
    is_zero_eigenvalue,
    mixed_spectrum,
    rooted_rcm,
    steklov_spectrum,
)
from steklov_geom.fem import assemble_boundary_mass, assemble_stiffness
from steklov_geom.separation import collar_mixed_mode, flat_cylinder_modes, spectrum_from_modes
from steklov_geom.spectra import collar_depth, cylinder_mixed, cylinder_steklov
from steklov_geom.surface import FlatCylinder, HyperbolicCollar, build_surface, triangulate


def test_three_node_path_dtn():
    K = sp.csr_matrix(np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]]))
    np.testing.assert_allclose(dtn_matrix(K, [0, 2]), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_dtn_matches_dense_schur_complement(unit_cylinder_mesh):
    K = assemble_stiffness(unit_cylinder_mesh)
    b = unit_cylinder_mesh.boundary_vertices()
    i = np.setdiff1d(np.arange(K.shape[0]), b)
    Kd = K.toarray()
    ref = Kd[np.ix_(b, b)] - Kd[np.ix_(b, i)] @ np.linalg.solve(Kd[np.ix_(i, i)], Kd[np.ix_(i, b)])
    np.testing.assert_allclose(dtn_matrix(K, b), ref, atol=1e-10)


def test_rooted_rcm_is_permutation(unit_cylinder_mesh):
    K = assemble_stiffness(unit_cylinder_mesh)
    roots = unit_cylinder_mesh.boundary_vertices()
    perm = rooted_rcm(K, roots)
    assert sorted(perm) == list(range(K.shape[0]))


def test_unit_cylinder_spectrum_against_closed_form(bench):
    an = bench["cyl-unit"]
    exact = cylinder_steklov(1.0, 1.0, 6).values
    got = an.spectrum.sigma
    assert abs(got[0]) < 1e-10
    np.testing.assert_allclose(got[1:], exact[1:], rtol=0.02)
    assert np.all(an.spectrum.residuals <= 1e-8)


def test_eigenvectors_are_b_orthonormal(unit_cylinder_mesh):
    res = steklov_spectrum(unit_cylinder_mesh, 5)
    B = assemble_boundary_mass(unit_cylinder_mesh)
    U = res.extensions
    np.testing.assert_allclose(U.T @ (B @ U), np.eye(6), atol=1e-9)


def test_rayleigh_quotient_matches_eigenvalue(unit_cylinder_mesh):
    K = assemble_stiffness(unit_cylinder_mesh)
    B = assemble_boundary_mass(unit_cylinder_mesh)
    res = steklov_spectrum(unit_cylinder_mesh, 4, K)
    for q in range(1, 5):
        u = res.extensions[:, q]
        assert (u @ K @ u) / (u @ B @ u) == pytest.approx(res.sigma[q], rel=1e-10)


def test_fem_is_an_upper_bound_that_converges():
    s = build_surface(FlatCylinder(1.0, 1.0))
    exact = cylinder_steklov(1.0, 1.0, 3)[1]
    errs = []
    for h in (0.1, 0.05):
        sigma = steklov_spectrum(triangulate(s, h), 3).sigma[1]
        assert sigma >= exact - 1e-12
        errs.append(sigma - exact)
    assert math.log2(errs[0] / errs[1]) > 1.7


@pytest.mark.parametrize("kind", ["N", "D"])
def test_half_cylinder_mixed_spectrum(kind):
    # strip of depth 0.5 next to each circle of S^1_1 x [-1, 1]
    mesh = triangulate(build_surface(FlatCylinder(1.0, 1.0)), 0.05).boundary_strips(0.5, cut_label=2)
    res = mixed_spectrum(mesh, (0, 1), (2,), kind, 6)
    one = cylinder_mixed(2 * math.pi, 0.5, kind, 3).values
    both = np.sort(np.r_[one, one])[:7]
    np.testing.assert_allclose(res.sigma, both, rtol=0.01, atol=1e-10)


def test_collar_mixed_neumann_fine_mesh():
    l = 2 * math.asinh(1.0)
    s = build_surface(HyperbolicCollar(l))
    res = mixed_spectrum(triangulate(s, 0.02), (0,), (1,), "N", 2)
    ode = collar_mixed_mode(l, s.t_range[1], 1, "N")
    assert res.sigma[1] == pytest.approx(ode, rel=0.01)


def test_mixed_rejects_overlap(coarse_cylinder_mesh):
    with pytest.raises(ValueError):
        mixed_spectrum(coarse_cylinder_mesh, (0,), (0,), "N", 1)
    with pytest.raises(ValueError):
        mixed_spectrum(coarse_cylinder_mesh, (0,), (1,), "X", 1)


def test_too_many_eigenvalues_rejected(coarse_cylinder_mesh):
    with pytest.raises(ValueError):
        steklov_spectrum(coarse_cylinder_mesh, 16)
    with pytest.raises(ValueError):
        steklov_spectrum(coarse_cylinder_mesh, -1)


def test_csv_shape(coarse_cylinder_mesh):
    res = steklov_spectrum(coarse_cylinder_mesh, 3)
    lines = res.to_csv().splitlines()
    assert lines[0] == "k,sigma,residual"
    assert len(lines) == 5
    ef = res.eigenfunction_csv(coarse_cylinder_mesh, 1).splitlines()
    assert ef[0] == "vertex,s,t,u"
    assert len(ef) == coarse_cylinder_mesh.n_vertices + 1


def test_zero_eigenvalue_detection():
    assert is_zero_eigenvalue(1e-14, 0.5)
    assert not is_zero_eigenvalue(1e-3, 0.5)


def test_solver_error_is_runtime_error():
    assert issubclass(SolverError, RuntimeError)


def test_separation_oracle_matches_closed_forms():
    pairs = [(0.0, 1), (1.0, 1)]
    for j in range(1, 5):
        lo, hi = flat_cylinder_modes(1.0, 1.0, j)
        pairs += [(lo, 2), (hi, 2)]
    np.testing.assert_allclose(spectrum_from_modes(pairs, 6), cylinder_steklov(1.0, 1.0, 6).values, atol=1e-13)
    l = 1.5
    s = build_surface(HyperbolicCollar(l))
    # the half collar is conformal to a flat strip of depth arctan(1/sinh(l/2)) and the same boundary length
    for kind in "ND":
        flat = cylinder_mixed(l, collar_depth(l), kind, 2).values
        assert collar_mixed_mode(l, s.t_range[1], 1, kind) == pytest.approx(flat[1], rel=1e-11)


def test_cylinder_pairs_have_tiny_gap(unit_cylinder_mesh):
    s = steklov_spectrum(unit_cylinder_mesh, 6).sigma
    # sigma = 0, (tanh 1) x2, 1, (coth 1) x2, ...
    assert abs(s[2] - s[1]) / s[1] < 1e-6
    assert abs(s[5] - s[4]) / s[4] < 1e-6


@pytest.mark.parametrize("kind,expected", [
    ("D", [1.0, 1 / math.tanh(1.0), 1 / math.tanh(1.0)]),
    ("N", [0.0, math.tanh(1.0), math.tanh(1.0)]),
])
def test_unit_depth_half_cylinder(kind, expected):
    # circle of length 2 pi, depth 1: Steklov at one end, N or D at the other
    mesh = triangulate(build_surface(FlatCylinder(1.0, 0.5)), 0.05)
    res = mixed_spectrum(mesh, (0,), (1,), kind, 2)
    np.testing.assert_allclose(res.sigma, expected, rtol=0.01, atol=1e-10)
    if kind == "N":
        u0 = res.boundary_vectors[:, 0]
        assert np.ptp(u0) < 1e-8 * np.abs(u0).max()
    else:
        assert res.sigma[0] > 0


def test_long_cylinder_first_eigenvalue_fem():
    s = build_surface(FlatCylinder(1.0, 2 * math.pi))
    sigma = steklov_spectrum(triangulate(s, 0.1), 2).sigma
    assert sigma[1] == pytest.approx(1 / (2 * math.pi), rel=0.01)
