"""Level-set estimates of the isoperimetric constants h1 and h2.

A sweep walks the superlevel sets ``D(t) = {u > t}`` of a P1 function.
Each set is measured exactly under the per-triangle metric. A threshold
is admissible when ``D(t)`` is connected, meets the boundary, has at most
half the total area, and its complement is connected and meets the
boundary too.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import kernels
from .surface import TriMesh

MAX_THRESHOLDS = 400
_DEDUP_REL = 1e-10


class CheegerError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    t: float
    perimeter: float
    area: float
    trace: float
    components: int
    complement_components: int
    admissible: bool


@dataclass(frozen=True)
class LevelSetSweep:
    rows: tuple
    total_area: float
    flipped: bool = False

    def __len__(self):
        return len(self.rows)

    def admissible(self) -> list:
        return [r for r in self.rows if r.admissible]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,perimeter,area,trace,admissible\n")
        for r in self.rows:
            buf.write(f"{r.t!r},{r.perimeter!r},{r.area!r},{r.trace!r},{int(r.admissible)}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class CheegerEstimate:
    h1: float
    h2: float
    bound: float


def _vertex_graph(mesh: TriMesh) -> sp.csr_matrix:
    e = mesh.edges()
    n = mesh.n_vertices
    data = np.ones(2 * len(e))
    return sp.coo_matrix((data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n)).tocsr()


def _components(graph: sp.csr_matrix, mask: np.ndarray) -> tuple[int, np.ndarray]:
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return 0, np.empty(0, dtype=np.int64)
    sub = graph[idx][:, idx]
    count, labels = connected_components(sub, directed=False)
    return count, labels


def _boundary_trace(mesh: TriMesh, u: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    ua = u[mesh.boundary_edges[:, 0]][None, :]
    ub = u[mesh.boundary_edges[:, 1]][None, :]
    t = thresholds[:, None]
    lo = np.minimum(ua, ub)
    hi = np.maximum(ua, ub)
    span = np.where(hi > lo, hi - lo, 1.0)
    frac = np.clip((hi - t) / span, 0.0, 1.0)
    frac = np.where(hi > lo, frac, (lo > t).astype(float))
    return frac @ mesh.boundary_lengths


def select_thresholds(u: np.ndarray, max_count: int = MAX_THRESHOLDS, lower: float | None = 0.0) -> np.ndarray:
    """Midpoints between consecutive distinct vertex values, at most ``max_count`` of them."""
    vals = np.sort(np.asarray(u, dtype=float))
    span = vals[-1] - vals[0]
    if not span > 0:
        raise CheegerError("u is constant")
    keep = np.r_[True, np.diff(vals) > _DEDUP_REL * span]
    vals = vals[keep]
    mids = 0.5 * (vals[1:] + vals[:-1])
    if lower is not None:
        mids = mids[mids >= lower]
    if mids.size > max_count:
        pick = np.unique(np.round(np.linspace(0, mids.size - 1, max_count)).astype(np.int64))
        mids = mids[pick]
    return mids


def _triangle_values(mesh: TriMesh, u: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(u[mesh.triangles])


def level_set_sweep(mesh: TriMesh, u: np.ndarray, max_thresholds: int = MAX_THRESHOLDS) -> LevelSetSweep:
    """Measure the superlevel sets of ``u`` for thresholds ``t >= 0``.

    ``u`` is first negated if ``{u > 0}`` covers more than half the area.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_vertices,):
        raise CheegerError("u must have one value per vertex")
    if not np.ptp(u) > 0:
        raise CheegerError("u is constant")
    coords = np.ascontiguousarray(mesh.local_coords)
    metric = np.ascontiguousarray(mesh.metric)
    sqrt_det = np.ascontiguousarray(mesh.sqrt_det)
    total = mesh.total_area()

    pos_area, _ = kernels.levelset_measures(coords, metric, sqrt_det, _triangle_values(mesh, u), np.array([0.0]))
    flipped = bool(pos_area[0] > 0.5 * total * (1 + _DEDUP_REL))
    if flipped:
        u = -u
    vals = _triangle_values(mesh, u)
    thresholds = select_thresholds(u, max_thresholds)
    if thresholds.size == 0:
        return LevelSetSweep((), total, flipped)
    area, perim = kernels.levelset_measures(coords, metric, sqrt_det, vals, thresholds)
    trace = _boundary_trace(mesh, u, thresholds)

    graph = _vertex_graph(mesh)
    on_boundary = np.zeros(mesh.n_vertices, bool)
    on_boundary[mesh.boundary_vertices()] = True
    rows = []
    for t, a, p, tr in zip(thresholds, area, perim, trace):
        above = u > t
        n_in, _ = _components(graph, above)
        n_out, _ = _components(graph, ~above)
        out_touches = bool(np.any(on_boundary & ~above))
        ok = (a <= 0.5 * total) and tr > 0 and p > 0 and n_in == 1 and n_out == 1 and out_touches
        rows.append(SweepRow(float(t), float(p), float(a), float(tr), int(n_in), int(n_out), bool(ok)))
    return LevelSetSweep(tuple(rows), total, flipped)


def cheeger_estimate(sweep: LevelSetSweep) -> CheegerEstimate:
    """``h1 = min perimeter/area``, ``h2 = min perimeter/trace`` and ``h1 h2 / 4``.

    Examples
    --------
    >>> row = SweepRow(0.1, 1.0, 2.0, 0.5, 1, 1, True)
    >>> cheeger_estimate(LevelSetSweep((row,), 4.0))
    CheegerEstimate(h1=0.5, h2=2.0, bound=0.25)
    """
    good = sweep.admissible()
    if not good:
        raise CheegerError("no admissible thresholds in the sweep")
    h1 = min(r.perimeter / r.area for r in good)
    h2 = min(r.perimeter / r.trace for r in good if r.trace > 0)
    return CheegerEstimate(float(h1), float(h2), float(h1 * h2 / 4.0))


def max_principle_violations(mesh: TriMesh, u: np.ndarray, max_thresholds: int = MAX_THRESHOLDS) -> int:
    """Count thresholds where some component of ``{u > t}`` misses the boundary.

    Harmonic functions have no interior maxima, so every such component
    should reach the boundary; P1 solutions satisfy this only approximately.
    """
    u = np.asarray(u, dtype=float)
    graph = _vertex_graph(mesh)
    on_boundary = np.zeros(mesh.n_vertices, bool)
    on_boundary[mesh.boundary_vertices()] = True
    bad = 0
    for t in select_thresholds(u, max_thresholds, lower=None):
        above = np.nonzero(u > t)[0]
        count, labels = _components(graph, u > t)
        touched = np.zeros(count, bool)
        touched[labels[on_boundary[above]]] = True
        if not touched.all():
            bad += 1
    return bad


def check_max_principle(mesh: TriMesh, u: np.ndarray, strict: bool = True) -> bool:
    """True when no violation is found; warns instead of failing when ``strict`` is False."""
    bad = max_principle_violations(mesh, u)
    if bad and not strict:
        warnings.warn(f"discrete maximum principle violated at {bad} thresholds", RuntimeWarning)
    return bad == 0
