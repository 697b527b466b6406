"""Time every hot kernel on its numba and pure-numpy paths.

Usage::

    python benchmarks/bench_kernels.py [--h 0.02] [--repeat 3]

The workload is the unit flat cylinder at mesh size ``h``: element
stiffness over all triangles, the level-set sweep of ``u = t``, the
tridiagonal eigen pipeline on its discrete Dirichlet-to-Neumann matrix,
and the rooted Cuthill-McKee ordering of its stiffness graph. The numba
column excludes compilation (one warm-up call first).
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from steklov_geom import kernels
from steklov_geom.cheeger import select_thresholds
from steklov_geom.dtn_eigen import dtn_matrix
from steklov_geom.fem import assemble_stiffness
from steklov_geom.surface import FlatCylinder, build_surface, triangulate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(h: float, k: int = 7):
    mesh = triangulate(build_surface(FlatCylinder(1.0, 1.0)), h)
    coords = np.ascontiguousarray(mesh.local_coords)
    tensor = np.ascontiguousarray(mesh.tensor)
    metric = np.ascontiguousarray(mesh.metric)
    sqrt_det = np.ascontiguousarray(mesh.sqrt_det)
    u = mesh.vertices[:, 1]
    vals = np.ascontiguousarray(u[mesh.triangles])
    thr = select_thresholds(u)
    K = assemble_stiffness(mesh)
    S = dtn_matrix(K, mesh.boundary_vertices())
    indptr, indices = K.indptr.astype(np.int64), K.indices.astype(np.int64)
    roots = mesh.boundary_vertices().astype(np.int64)
    rng = np.random.default_rng(20240607)

    def eig(tag):
        tri = getattr(kernels, f"householder_tridiagonal_{tag}")
        tql = getattr(kernels, f"tql_eigenvalues_{tag}")
        inv = getattr(kernels, f"tridiagonal_inverse_iteration_{tag}")

        def run():
            d, e, vecs, betas = tri(S.copy())
            lam = np.sort(tql(d.copy(), e.copy(), 1e-13))[:k]
            inv(d, e, lam, rng.standard_normal((d.size, k)), 20, 1e-13)

        return run

    return mesh, {
        "element_stiffness": lambda tag: (lambda: getattr(kernels, f"element_stiffness_{tag}")(coords, tensor)),
        "levelset_measures": lambda tag: (
            lambda: getattr(kernels, f"levelset_measures_{tag}")(coords, metric, sqrt_det, vals, thr)),
        "tridiagonal_eigen": eig,
        "cuthill_mckee": lambda tag: (
            lambda: getattr(kernels, f"cuthill_mckee_from_roots_{tag}")(indptr, indices, roots)),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, default=0.02)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    mesh, jobs = workloads(args.h)
    print(f"unit cylinder, h={args.h}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, "
          f"{mesh.boundary_vertices().size} boundary vertices")
    print(f"{'kernel':<20} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for name, make in jobs.items():
        fast = make("numba")
        fast()  # compile
        t_nb = best_of(fast, args.repeat)
        t_np = best_of(make("numpy"), args.repeat)
        print(f"{name:<20} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
