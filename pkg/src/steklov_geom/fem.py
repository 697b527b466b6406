"""P1 assembly of the Dirichlet energy and the boundary mass."""
from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp

from . import kernels
from .surface import MetricSurface, TriMesh


class AssemblyError(ValueError):
    pass


def _check_tensor(mesh: TriMesh):
    t = mesh.tensor
    det = t[:, 0, 0] * t[:, 1, 1] - t[:, 0, 1] * t[:, 1, 0]
    bad = np.nonzero(~((det > 0) & (t[:, 0, 0] > 0) & np.isfinite(det)))[0]
    if bad.size:
        raise AssemblyError(f"singular metric sample on triangle {int(bad[0])}")


def assemble_stiffness(mesh: TriMesh) -> sp.csr_matrix:
    """Stiffness matrix of ``u -> integral of |grad u|_g^2 dv_g``.

    Each element uses the chart gradients of the hat functions contracted
    with ``sqrt(det G) G^-1`` (already averaged over the quadrature points
    in ``mesh.tensor``), times the chart area.
    """
    _check_tensor(mesh)
    ke = kernels.element_stiffness(np.ascontiguousarray(mesh.local_coords), np.ascontiguousarray(mesh.tensor))
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_vertices
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    K.sort_indices()
    return K


def _component_mask(mesh: TriMesh, components) -> np.ndarray:
    if components is None:
        components = mesh.labels()
    components = list(components)
    if not components:
        raise AssemblyError("empty boundary component selection")
    present = set(mesh.labels())
    missing = [c for c in components if c not in present]
    if missing:
        raise AssemblyError(f"unknown boundary components {missing}; mesh has {sorted(present)}")
    return np.isin(mesh.boundary_labels, components)


def assemble_boundary_mass(mesh: TriMesh, components: Iterable[int] | None = None, lumped: bool = False) -> sp.csr_matrix:
    """Mass matrix of ``u -> integral of u^2 dS_g`` over the selected boundary circles.

    The consistent 1D P1 mass (``len/6 [[2, 1], [1, 2]]`` per edge) is the
    default; ``lumped=True`` uses ``len/2`` on the diagonal instead.
    """
    mask = _component_mask(mesh, components)
    edges = mesh.boundary_edges[mask]
    lens = mesh.boundary_lengths[mask]
    if np.any(~(lens > 0)):
        raise AssemblyError("degenerate boundary edge")
    n = mesh.n_vertices
    i, j = edges[:, 0], edges[:, 1]
    if lumped:
        rows = np.concatenate([i, j])
        vals = np.concatenate([lens / 2, lens / 2])
        B = sp.coo_matrix((vals, (rows, rows)), shape=(n, n))
    else:
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([i, j, j, i])
        vals = np.concatenate([lens / 3, lens / 3, lens / 6, lens / 6])
        B = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    B = B.tocsr()
    B.sum_duplicates()
    B.sort_indices()
    return B


def energy(K: sp.spmatrix, u: np.ndarray) -> float:
    return float(u @ (K @ u))


def dump_coo(M: sp.spmatrix, path) -> None:
    """Write ``row col value`` lines (0-based, full symmetric storage)."""
    C = sp.coo_matrix(M)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        for r, c, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")


# Dunavant degree-5 rule on the reference triangle (7 points)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
_W0, _W1, _W2 = 0.225, 0.132394152788506, 0.125939180544827
DUNAVANT5_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
        [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
    ]
)
DUNAVANT5_WEIGHTS = np.array([_W0, _W1, _W1, _W1, _W2, _W2, _W2])


def integrate_density(mesh: TriMesh, surface: MetricSurface, density: Callable) -> float:
    """Integrate ``density(s, t) dv_g`` over the mesh with the exact metric.

    Uses a 7-point degree-5 rule per chart triangle, so the only error is
    the polynomial approximation of ``density * sqrt(det G)``.
    """
    lc = mesh.local_coords
    pts = np.einsum("qk,ekd->eqd", DUNAVANT5_BARY, lc)
    g = surface.metric(pts[..., 0], pts[..., 1])
    vol = np.sqrt(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0])
    e = lc[:, 1:, :] - lc[:, :1, :]
    chart = 0.5 * np.abs(e[:, 0, 0] * e[:, 1, 1] - e[:, 1, 0] * e[:, 0, 1])
    vals = density(pts[..., 0], pts[..., 1]) * vol
    return float(np.sum(chart * (vals @ DUNAVANT5_WEIGHTS)))
