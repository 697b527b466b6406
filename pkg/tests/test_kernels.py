"""Numba and numpy kernels agree, and the eigensolver matches LAPACK."""
import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from steklov_geom import kernels
from steklov_geom.dtn_eigen import generalized_eigen, rooted_rcm, symmetric_eigen


def random_triangles(rng, n=50):
    coords = rng.uniform(-1, 1, size=(n, 3, 2))
    a = rng.uniform(0.5, 2.0, size=(n, 2, 2))
    tensor = np.einsum("eij,ekj->eik", a, a) + 0.1 * np.eye(2)
    return coords, tensor


def test_element_stiffness_reference_triangle():
    coords = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    tensor = np.eye(2)[None]
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    for fn in (kernels.element_stiffness_numba, kernels.element_stiffness_numpy):
        np.testing.assert_allclose(fn(coords, tensor)[0], expected, atol=1e-15)


def test_element_stiffness_paths_agree():
    coords, tensor = random_triangles(np.random.default_rng(1))
    a = kernels.element_stiffness_numba(coords, tensor)
    b = kernels.element_stiffness_numpy(coords, tensor)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_element_stiffness_rows_sum_to_zero_and_psd(seed):
    coords, tensor = random_triangles(np.random.default_rng(seed), n=5)
    ke = kernels.element_stiffness_numpy(coords, tensor)
    scale = np.abs(ke).max()
    np.testing.assert_allclose(ke.sum(axis=2), 0.0, atol=1e-10 * scale)
    assert np.all(np.linalg.eigvalsh(ke) >= -1e-10 * scale)


def test_levelset_paths_agree():
    rng = np.random.default_rng(2)
    coords, metric = random_triangles(rng, 80)
    sqrt_det = np.sqrt(np.linalg.det(metric))
    values = rng.standard_normal((80, 3))
    thr = np.linspace(-1.5, 1.5, 17)
    a1, p1 = kernels.levelset_measures_numba(coords, metric, sqrt_det, values, thr)
    a2, p2 = kernels.levelset_measures_numpy(coords, metric, sqrt_det, values, thr)
    np.testing.assert_allclose(a1, a2, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(p1, p2, rtol=1e-12, atol=1e-14)


def test_levelset_of_linear_function_on_square():
    # unit square split in two triangles, u = x: level x = t has length 1, area 1 - t
    coords = np.array([[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1], [0, 1]]], dtype=float)
    metric = np.repeat(np.eye(2)[None], 2, axis=0)
    values = coords[:, :, 0].copy()
    area, perim = kernels.levelset_measures(coords, metric, np.ones(2), values, np.array([0.25, 0.5]))
    np.testing.assert_allclose(area, [0.75, 0.5], rtol=1e-14)
    np.testing.assert_allclose(perim, [1.0, 1.0], rtol=1e-14)


@pytest.mark.parametrize("tag", ["numba", "numpy"])
def test_tridiagonal_pipeline_matches_lapack(tag):
    rng = np.random.default_rng(3)
    n = 120
    A = rng.standard_normal((n, n))
    A = A + A.T
    d, e, vecs, betas = getattr(kernels, f"householder_tridiagonal_{tag}")(A.copy())
    lam = getattr(kernels, f"tql_eigenvalues_{tag}")(d.copy(), e.copy(), 1e-12)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(A), atol=1e-11)
    k = 8
    Y, rq = getattr(kernels, f"tridiagonal_inverse_iteration_{tag}")(d, e, lam[:k].copy(), rng.standard_normal((n, k)), 20, 1e-13)
    X = kernels.apply_householder(vecs, betas, Y)
    assert np.linalg.norm(A @ X - X * rq) < 1e-10
    np.testing.assert_allclose(X.T @ X, np.eye(k), atol=1e-12)


def test_symmetric_eigen_handles_exact_multiplicity():
    # cycle graph Laplacian: every nonzero eigenvalue is double
    n = 40
    L = 2 * np.eye(n) - np.roll(np.eye(n), 1, axis=0) - np.roll(np.eye(n), -1, axis=0)
    lam, X = symmetric_eigen(L, 7)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(L)[:7], atol=1e-12)
    np.testing.assert_allclose(X.T @ X, np.eye(7), atol=1e-12)


def test_generalized_eigen_matches_scipy_eigh():
    rng = np.random.default_rng(4)
    n = 60
    A = rng.standard_normal((n, n))
    S = A @ A.T
    M = np.diag(rng.uniform(1, 2, n)) + 0.1 * np.ones((n, n)) / n
    lam, V = generalized_eigen(S, M, 5)
    ref = sla.eigh(S, M, eigvals_only=True)[:5]
    # backward-stable accuracy: errors scale with the largest eigenvalue, not each one
    np.testing.assert_allclose(lam, ref, rtol=1e-10, atol=1e-13 * np.abs(sla.eigh(S, M, eigvals_only=True)).max())
    np.testing.assert_allclose(V.T @ M @ V, np.eye(5), atol=1e-10)


def test_cuthill_mckee_paths_agree_and_cover_graph():
    g = sp.random(200, 200, density=0.02, random_state=5)
    g = ((g + g.T) > 0).astype(float).tocsr()
    g.setdiag(0)
    g.eliminate_zeros()
    roots = np.array([3, 17, 40])
    a = kernels.cuthill_mckee_from_roots_numba(g.indptr.astype(np.int64), g.indices.astype(np.int64), roots)
    b = kernels.cuthill_mckee_from_roots_numpy(g.indptr.astype(np.int64), g.indices.astype(np.int64), roots)
    np.testing.assert_array_equal(a, b)
    perm = rooted_rcm(g, roots)
    assert sorted(perm) == list(range(200))
    assert set(perm[-3:]) == set(roots)


def test_env_flag_selects_numpy_backend():
    import os
    import subprocess
    import sys

    code = "from steklov_geom import _accel, kernels; print(_accel.backend(), kernels.element_stiffness is kernels.element_stiffness_numpy)"
    env = dict(os.environ, STEKLOV_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--h", "0.3", "--repeat", "1"]) == 0
    out = capsys.readouterr().out
    for name in ("element_stiffness", "levelset_measures", "tridiagonal_eigen", "cuthill_mckee"):
        assert name in out
