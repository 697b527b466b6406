"""Surface families, structured meshes and certified geometric brackets.

Every built-in family is a surface of revolution written in a chart
``(s, t)``: ``s`` runs over a periodic interval ``[0, P)`` and ``t`` is
meridian arclength. The metric is

    G(s, t) = scale**2 * diag((c(t) / P)**2, 1)

where ``c(t)`` is the circumference of the parallel circle at height
``t``. The two circles ``t = t0`` and ``t = t1`` are the boundary
components, labelled 0 and 1.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

DEFAULT_MAX_VERTICES = 200_000
MIN_BOUNDARY_VERTICES = 8
MAX_STRETCH = 20.0


class SurfaceError(ValueError):
    """Invalid surface description or mesh request."""


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatCylinder:
    R: float
    T: float


@dataclass(frozen=True)
class RevolutionProfile:
    """Radius ``r(s)`` of a surface of revolution against meridian arclength.

    ``profile`` is a list of ``(s, r)`` breakpoints, interpolated by a
    monotone C1 cubic (PCHIP), so runs of equal radii stay exactly flat.
    """

    profile: tuple


@dataclass(frozen=True)
class HyperbolicCollar:
    l: float
    half: bool = True


@dataclass(frozen=True)
class ThinNeckComposite:
    a: float
    L: float
    eps: float
    neck_length: float


@dataclass(frozen=True)
class HyperbolicNeck:
    """Two flat ends of circumference ``a`` joined by a curvature -1 neck.

    The neck is ``c(t) = l cosh(t - t_mid)``; it meets each flat end
    through a parabolic (positively curved) blend of width ``min(L, l)/4``.
    """

    a: float
    L: float
    l: float


SurfaceSpec = Union[FlatCylinder, RevolutionProfile, HyperbolicCollar, ThinNeckComposite, HyperbolicNeck]

_FAMILIES = {
    "FlatCylinder": FlatCylinder,
    "RevolutionProfile": RevolutionProfile,
    "HyperbolicCollar": HyperbolicCollar,
    "ThinNeckComposite": ThinNeckComposite,
    "HyperbolicNeck": HyperbolicNeck,
}

_JSON_FIELDS = {
    "FlatCylinder": {"R": "R", "T": "T"},
    "RevolutionProfile": {"profile": "profile"},
    "HyperbolicCollar": {"l": "l", "half": "half"},
    "ThinNeckComposite": {"a": "a", "L": "L", "eps": "eps", "neck_length": "neck_length"},
    "HyperbolicNeck": {"a": "a", "L": "L", "l": "l"},
}


def spec_from_dict(doc: dict) -> tuple[SurfaceSpec, float]:
    """Parse a JSON surface document. Returns ``(spec, scale)``."""
    if not isinstance(doc, dict) or "family" not in doc:
        raise SurfaceError("surface document needs a 'family' key")
    family = doc["family"]
    if family not in _FAMILIES:
        raise SurfaceError(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    fields = _JSON_FIELDS[family]
    missing = [k for k in fields if k not in doc and not (family == "HyperbolicCollar" and k == "half")]
    if missing:
        raise SurfaceError(f"{family} is missing {missing}")
    kwargs = {}
    for key, attr in fields.items():
        if key not in doc:
            continue
        value = doc[key]
        if key == "profile":
            value = tuple((float(s), float(r)) for s, r in value)
        elif key == "half":
            value = bool(value)
        else:
            value = float(value)
        kwargs[attr] = value
    scale = float(doc.get("scale", 1.0))
    spec = _FAMILIES[family](**kwargs)
    validate_spec(spec)
    if not scale > 0:
        raise SurfaceError("scale must be positive")
    return spec, scale


def spec_to_dict(spec: SurfaceSpec, scale: float = 1.0) -> dict:
    family = type(spec).__name__
    doc = {"family": family}
    for key, attr in _JSON_FIELDS[family].items():
        value = getattr(spec, attr)
        doc[key] = [list(p) for p in value] if key == "profile" else value
    if scale != 1.0:
        doc["scale"] = scale
    return doc


def validate_spec(spec: SurfaceSpec) -> None:
    def positive(**kw):
        for name, v in kw.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise SurfaceError(f"{type(spec).__name__}: {name} must be positive, got {v!r}")

    if isinstance(spec, FlatCylinder):
        positive(R=spec.R, T=spec.T)
    elif isinstance(spec, HyperbolicCollar):
        positive(l=spec.l)
    elif isinstance(spec, ThinNeckComposite):
        positive(a=spec.a, L=spec.L, eps=spec.eps, neck_length=spec.neck_length)
        if not spec.eps < spec.L:
            raise SurfaceError("ThinNeckComposite needs eps < L")
        if not spec.eps < spec.a:
            raise SurfaceError("ThinNeckComposite needs eps < a")
    elif isinstance(spec, HyperbolicNeck):
        positive(a=spec.a, L=spec.L, l=spec.l)
        if not spec.l < spec.a:
            raise SurfaceError("HyperbolicNeck needs l < a")
    elif isinstance(spec, RevolutionProfile):
        pts = np.asarray(spec.profile, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise SurfaceError("profile must be a list of at least two [s, r] pairs")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise SurfaceError("profile arclengths must be strictly increasing")
        if np.any(pts[:, 1] <= 0):
            raise SurfaceError("profile radius must stay positive")
    else:
        raise SurfaceError(f"unsupported spec {spec!r}")


# ---------------------------------------------------------------------------
# Circumference profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """A smooth stretch ``[ta, tb]`` of the profile."""

    ta: float
    tb: float
    kind: str          # "flat", "hyperbolic", "blend", "sampled"
    stretch: float = 1.0


def _hermite_step(c0, c1, w):
    def c(tau):
        x = tau / w
        return c0 + (c1 - c0) * (3 * x ** 2 - 2 * x ** 3)

    def d2(tau):
        x = tau / w
        return (c1 - c0) * (6 - 12 * x) / w ** 2

    return c, d2


class _Profile:
    """Circumference ``c(t)``, its second derivative, and the piece layout."""

    def __init__(self, pieces, value_fns, d2_fns):
        self.pieces = tuple(pieces)
        self._value = value_fns
        self._d2 = d2_fns
        self.t0 = self.pieces[0].ta
        self.t1 = self.pieces[-1].tb

    def _locate(self, t):
        edges = np.array([p.tb for p in self.pieces[:-1]])
        return np.searchsorted(edges, t, side="right")

    def _eval(self, fns, t):
        t = np.asarray(t, dtype=float)
        idx = self._locate(t)
        out = np.empty_like(t)
        for k, fn in enumerate(fns):
            m = idx == k
            if np.any(m):
                out[m] = fn(t[m])
        return out

    def c(self, t):
        return self._eval(self._value, t)

    def d2(self, t):
        return self._eval(self._d2, t)

    def piece_curvature(self, k: int, t):
        """``-c''/c`` using the formulas of piece ``k`` only (endpoints included)."""
        t = np.asarray(t, dtype=float)
        return -self._d2[k](t) / self._value[k](t)


def _flat(value):
    return (lambda t: np.full_like(np.asarray(t, dtype=float), value)), (lambda t: np.zeros_like(np.asarray(t, dtype=float)))


def _shifted(fn, origin):
    return lambda t: fn(np.asarray(t, dtype=float) - origin)


def _profile_for(spec: SurfaceSpec) -> tuple[_Profile, float, float]:
    """Return ``(profile, period P, cylindrical depth L)`` in unscaled units."""
    if isinstance(spec, FlatCylinder):
        a = 2 * math.pi * spec.R
        v, d2 = _flat(a)
        prof = _Profile([Piece(-spec.T, spec.T, "flat")], [v], [d2])
        return prof, a, spec.T

    if isinstance(spec, HyperbolicCollar):
        w = collar_half_width(spec.l)
        l = spec.l
        t0 = 0.0 if spec.half else -w
        prof = _Profile(
            [Piece(t0, w, "hyperbolic")],
            [lambda t: l * np.cosh(t)],
            [lambda t: l * np.cosh(t)],
        )
        return prof, l, 0.0

    if isinstance(spec, ThinNeckComposite):
        a, L, eps, ell = spec.a, spec.L, spec.eps, spec.neck_length
        wb = min(L, eps) / 4.0
        b1 = L + wb
        b2 = b1 + ell
        b3 = b2 + wb
        total = b3 + L
        down, down2 = _hermite_step(a, eps, wb)
        up, up2 = _hermite_step(eps, a, wb)
        fa, fa2 = _flat(a)
        fe, fe2 = _flat(eps)
        stretch = min(a / eps, MAX_STRETCH)
        pieces = [
            Piece(0.0, L, "flat"),
            Piece(L, b1, "blend"),
            Piece(b1, b2, "flat", stretch),
            Piece(b2, b3, "blend"),
            Piece(b3, total, "flat"),
        ]
        values = [fa, _shifted(down, L), fe, _shifted(up, b2), fa]
        d2s = [fa2, _shifted(down2, L), fe2, _shifted(up2, b2), fa2]
        return _Profile(pieces, values, d2s), a, L

    if isinstance(spec, HyperbolicNeck):
        a, L, l = spec.a, spec.L, spec.l
        wb = min(L, l) / 4.0
        W = optimize.brentq(lambda x: l * math.cosh(x) + 0.5 * wb * l * math.sinh(x) - a, 0.0, math.acosh(a / l) + 1.0, xtol=1e-15)
        slope = l * math.sinh(W)
        b1 = L + wb
        b2 = b1 + 2 * W
        b3 = b2 + wb
        total = b3 + L
        fa, fa2 = _flat(a)
        pieces = [
            Piece(0.0, L, "flat"),
            Piece(L, b1, "blend"),
            Piece(b1, b2, "hyperbolic"),
            Piece(b2, b3, "blend"),
            Piece(b3, total, "flat"),
        ]
        values = [
            fa,
            lambda t: a - slope * (np.asarray(t) - L) ** 2 / (2 * wb),
            lambda t: l * np.cosh(np.asarray(t) - b1 - W),
            lambda t: a - slope * (b3 - np.asarray(t)) ** 2 / (2 * wb),
            fa,
        ]
        d2s = [
            fa2,
            lambda t: np.full_like(np.asarray(t, dtype=float), -slope / wb),
            lambda t: l * np.cosh(np.asarray(t) - b1 - W),
            lambda t: np.full_like(np.asarray(t, dtype=float), -slope / wb),
            fa2,
        ]
        return _Profile(pieces, values, d2s), a, L

    if isinstance(spec, RevolutionProfile):
        pts = np.asarray(spec.profile, dtype=float)
        s, r = pts[:, 0], pts[:, 1]
        interp = PchipInterpolator(s, 2 * math.pi * r)
        second = interp.derivative(2)
        pieces = []
        for k in range(len(s) - 1):
            kind = "flat" if r[k] == r[k + 1] else "sampled"
            pieces.append(Piece(float(s[k]), float(s[k + 1]), kind))
        n = len(pieces)
        values = [interp] * n
        d2s = [(lambda t, k=k: np.zeros_like(np.asarray(t, dtype=float)) if pieces[k].kind == "flat" else second(t)) for k in range(n)]
        # depth of the flat run at each end
        lo = 0
        while lo + 1 < len(r) and r[lo + 1] == r[0]:
            lo += 1
        hi = len(r) - 1
        while hi - 1 >= 0 and r[hi - 1] == r[-1]:
            hi -= 1
        depth = min(s[lo] - s[0], s[-1] - s[hi])
        if lo >= hi:
            depth = 0.5 * (s[-1] - s[0])
        return _Profile(pieces, values, d2s), 2 * math.pi * r[0], float(depth)

    raise SurfaceError(f"unsupported spec {spec!r}")


def collar_half_width(l: float) -> float:
    """Half-width ``arcsinh(1 / sinh(l / 2))`` of the standard collar."""
    # local import keeps surface independent of the spectra module at import time
    from .spectra import collar_width

    return collar_width(l)


# ---------------------------------------------------------------------------
# MetricSurface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSurface:
    spec: SurfaceSpec
    profile: _Profile = field(repr=False)
    period: float
    depth: float
    scale: float = 1.0
    name: str = ""

    @property
    def t_range(self) -> tuple[float, float]:
        return self.profile.t0, self.profile.t1

    @property
    def b(self) -> int:
        return 2

    def circumference(self, t):
        return self.scale * self.profile.c(t)

    def metric(self, s, t):
        """First fundamental form at chart points, shape ``(..., 2, 2)``."""
        t = np.asarray(t, dtype=float)
        s = np.broadcast_to(np.asarray(s, dtype=float), t.shape)
        g = np.zeros(t.shape + (2, 2))
        g[..., 0, 0] = (self.scale * self.profile.c(t) / self.period) ** 2
        g[..., 1, 1] = self.scale ** 2
        del s
        return g

    def curvature(self, t):
        """Gaussian curvature ``-c''/c`` (rescaled)."""
        return -self.profile.d2(t) / self.profile.c(t) / self.scale ** 2

    @property
    def boundary_lengths(self) -> tuple[float, float]:
        t0, t1 = self.t_range
        return float(self.circumference(np.array(t0))), float(self.circumference(np.array(t1)))

    @property
    def L(self) -> float:
        return self.scale * self.depth

    def scaled(self, c: float) -> "MetricSurface":
        if not c > 0:
            raise SurfaceError("scale factor must be positive")
        return replace(self, scale=self.scale * c)

    def exact_area(self):
        spec = self.spec
        k = self.scale ** 2
        if isinstance(spec, FlatCylinder):
            return k * 2 * math.pi * spec.R * 2 * spec.T
        if isinstance(spec, HyperbolicCollar):
            t0, t1 = self.t_range
            return k * spec.l * (math.sinh(t1) - math.sinh(t0))
        return None


def build_surface(spec: SurfaceSpec, scale: float = 1.0, name: str = "") -> MetricSurface:
    validate_spec(spec)
    profile, period, depth = _profile_for(spec)
    surf = MetricSurface(spec=spec, profile=profile, period=period, depth=depth, scale=1.0, name=name)
    # sanity: declared boundary length against the metric
    t0, _ = surf.t_range
    g = surf.metric(np.array(0.0), np.array(t0))
    a_metric = math.sqrt(g[0, 0]) * period
    a_decl = float(profile.c(np.array(t0)))
    if abs(a_metric - a_decl) > 1e-12 * a_decl:
        raise SurfaceError("boundary length from metric disagrees with the declared length")
    tt = np.linspace(t0, surf.t_range[1], 257)
    if np.any(profile.c(tt) <= 0):
        raise SurfaceError("profile touches zero")
    return surf.scaled(scale) if scale != 1.0 else surf


# ---------------------------------------------------------------------------
# TriMesh
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray          # (n, 2) chart coordinates
    triangles: np.ndarray         # (nt, 3)
    local_coords: np.ndarray      # (nt, 3, 2) unwrapped chart coordinates per triangle
    metric: np.ndarray            # (nt, 2, 2) metric at the centroid
    tensor: np.ndarray            # (nt, 2, 2) quadrature average of sqrt(det G) G^-1
    sqrt_det: np.ndarray          # (nt,) quadrature average of sqrt(det G)
    boundary_edges: np.ndarray    # (ne, 2)
    boundary_labels: np.ndarray   # (ne,)
    boundary_lengths: np.ndarray  # (ne,) Riemannian lengths
    h: float
    t_range: tuple = (0.0, 1.0)
    name: str = ""

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        e = self.local_coords[:, 1:, :] - self.local_coords[:, :1, :]
        chart = 0.5 * np.abs(e[:, 0, 0] * e[:, 1, 1] - e[:, 1, 0] * e[:, 0, 1])
        return chart * self.sqrt_det

    def total_area(self) -> float:
        return float(self.areas().sum())

    def labels(self) -> tuple:
        return tuple(sorted(set(int(x) for x in self.boundary_labels)))

    def boundary_vertices(self, labels=None) -> np.ndarray:
        mask = np.ones(len(self.boundary_edges), bool) if labels is None else np.isin(self.boundary_labels, list(labels))
        return np.unique(self.boundary_edges[mask])

    def component_lengths(self) -> dict:
        return {lab: float(self.boundary_lengths[self.boundary_labels == lab].sum()) for lab in self.labels()}

    def scaled(self, c: float) -> "TriMesh":
        """Mesh of the metric ``c**2 G``."""
        return replace(
            self,
            metric=self.metric * c ** 2,
            sqrt_det=self.sqrt_det * c ** 2,
            boundary_lengths=self.boundary_lengths * c,
        )

    def edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def submesh(self, keep: np.ndarray, cut_label: int | None = None) -> "TriMesh":
        """Restrict to the triangles flagged in ``keep``.

        Boundary edges of the original mesh survive with their labels; edges
        newly exposed by the cut get ``cut_label`` (default: max label + 1).
        """
        keep = np.asarray(keep, bool)
        if cut_label is None:
            cut_label = int(self.boundary_labels.max()) + 1
        tri = self.triangles[keep]
        used = np.unique(tri)
        remap = -np.ones(self.n_vertices, dtype=np.int64)
        remap[used] = np.arange(len(used))

        # edge -> owning triangles, to find the cut
        all_e = np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        owner = np.tile(np.arange(self.n_triangles), 3)
        local = np.repeat(np.arange(3), self.n_triangles)
        key = np.sort(all_e, axis=1)
        order = np.lexsort((key[:, 1], key[:, 0]))
        key, owner, local, all_e = key[order], owner[order], local[order], all_e[order]
        same_next = np.all(key[1:] == key[:-1], axis=1)
        new_edges, new_len = [], []
        idx = np.nonzero(same_next)[0]
        for i in idx:
            t1, t2 = owner[i], owner[i + 1]
            if keep[t1] != keep[t2]:
                tk = t1 if keep[t1] else t2
                edge = all_e[i] if keep[t1] else all_e[i + 1]
                new_edges.append(edge)
                d = self.vertices[edge[1]] - self.vertices[edge[0]]
                lc = self.local_coords[tk]
                # use unwrapped coordinates of the owning triangle
                pos = [int(np.nonzero(self.triangles[tk] == v)[0][0]) for v in edge]
                d = lc[pos[1]] - lc[pos[0]]
                g = self.metric[tk]
                new_len.append(math.sqrt(d @ g @ d))
        bmask = np.all(remap[self.boundary_edges] >= 0, axis=1)
        # an original boundary edge survives only if its triangle does
        b_edges = [self.boundary_edges[bmask]]
        b_labels = [self.boundary_labels[bmask]]
        b_len = [self.boundary_lengths[bmask]]
        if new_edges:
            b_edges.append(np.array(new_edges, dtype=np.int64))
            b_labels.append(np.full(len(new_edges), cut_label))
            b_len.append(np.array(new_len))
        edges = np.concatenate(b_edges)
        return TriMesh(
            vertices=self.vertices[used],
            triangles=remap[tri],
            local_coords=self.local_coords[keep],
            metric=self.metric[keep],
            tensor=self.tensor[keep],
            sqrt_det=self.sqrt_det[keep],
            boundary_edges=remap[edges],
            boundary_labels=np.concatenate(b_labels).astype(np.int64),
            boundary_lengths=np.concatenate(b_len),
            h=self.h,
            t_range=self.t_range,
            name=self.name + "[sub]",
        )

    def boundary_strips(self, depth: float, cut_label: int | None = None) -> "TriMesh":
        """Union of the strips of chart depth ``depth`` along both boundary circles."""
        t0, t1 = self.t_range
        tc = self.local_coords[:, :, 1].mean(axis=1)
        keep = (tc < t0 + depth) | (tc > t1 - depth)
        return self.submesh(keep, cut_label)


def max_vertices() -> int:
    raw = os.environ.get("STEKLOV_MAX_VERTICES")
    return int(raw) if raw else DEFAULT_MAX_VERTICES


def _t_grid(surface: MetricSurface, h: float) -> np.ndarray:
    counts = []
    pieces = surface.profile.pieces
    for p in pieces:
        length = surface.scale * (p.tb - p.ta)
        counts.append(max(1, math.ceil(length / (h * p.stretch) - 1e-9)))
    while sum(counts) < MIN_BOUNDARY_VERTICES:
        # refine the piece with the coarsest rows first
        widths = [(p.tb - p.ta) / c for p, c in zip(pieces, counts)]
        counts[int(np.argmax(widths))] += 1
    rows = [np.array([pieces[0].ta])]
    for p, n in zip(pieces, counts):
        rows.append(np.linspace(p.ta, p.tb, n + 1)[1:])
    return np.concatenate(rows)


_MIDPOINTS = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


def triangulate(surface: MetricSurface, h: float, quadrature: str = "centroid", max_vertex_count: int | None = None) -> TriMesh:
    """Structured periodic grid in ``(s, t)``, each cell split along one diagonal.

    ``quadrature`` selects how the metric is sampled per triangle:
    ``"centroid"`` (one point) or ``"midpoint"`` (three edge midpoints).
    """
    if not h > 0:
        raise SurfaceError("h must be positive")
    if quadrature not in ("centroid", "midpoint"):
        raise SurfaceError(f"unknown quadrature {quadrature!r}")
    cap = max_vertices() if max_vertex_count is None else max_vertex_count
    a_max = max(surface.boundary_lengths)
    n_s = math.ceil(a_max / h - 1e-9)
    if n_s < MIN_BOUNDARY_VERTICES:
        raise SurfaceError(
            f"h={h} leaves {n_s} vertices on a boundary circle (need >= {MIN_BOUNDARY_VERTICES})"
        )
    t_rows = _t_grid(surface, h)
    n_t = len(t_rows) - 1
    if n_s * (n_t + 1) > cap:
        raise SurfaceError(f"mesh would have {n_s * (n_t + 1)} vertices, above the cap of {cap}")

    P = surface.period
    s_cols = np.arange(n_s) * (P / n_s)
    S, Tm = np.meshgrid(s_cols, t_rows)
    vertices = np.column_stack([S.ravel(), Tm.ravel()])

    i, j = np.meshgrid(np.arange(n_t), np.arange(n_s), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    jn = (j + 1) % n_s
    v00 = i * n_s + j
    v10 = i * n_s + jn
    v01 = (i + 1) * n_s + j
    v11 = (i + 1) * n_s + jn
    tri = np.concatenate([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])])

    s0 = s_cols[j]
    s1 = s0 + P / n_s
    ta = t_rows[i]
    tb = t_rows[i + 1]
    lc_a = np.stack([np.column_stack([s0, ta]), np.column_stack([s1, ta]), np.column_stack([s1, tb])], axis=1)
    lc_b = np.stack([np.column_stack([s0, ta]), np.column_stack([s1, tb]), np.column_stack([s0, tb])], axis=1)
    local = np.concatenate([lc_a, lc_b])

    centroid = local.mean(axis=1)
    metric = surface.metric(centroid[:, 0], centroid[:, 1])
    if quadrature == "centroid":
        samples = metric[:, None]
    else:
        pts = np.einsum("qk,ekd->eqd", _MIDPOINTS, local)
        samples = surface.metric(pts[..., 0], pts[..., 1])
    det = samples[..., 0, 0] * samples[..., 1, 1] - samples[..., 0, 1] * samples[..., 1, 0]
    bad = np.nonzero(~(det > 0))[0]
    if bad.size:
        raise SurfaceError(f"metric is singular or indefinite on triangle {int(bad[0])}")
    sq = np.sqrt(det)
    inv = np.empty_like(samples)
    inv[..., 0, 0] = samples[..., 1, 1] / det
    inv[..., 1, 1] = samples[..., 0, 0] / det
    inv[..., 0, 1] = -samples[..., 0, 1] / det
    inv[..., 1, 0] = -samples[..., 1, 0] / det
    tensor = (sq[..., None, None] * inv).mean(axis=1)
    sqrt_det = sq.mean(axis=1)

    jj = np.arange(n_s)
    bottom = np.column_stack([jj, (jj + 1) % n_s])
    top = bottom + n_t * n_s
    b_edges = np.concatenate([bottom, top])
    b_labels = np.concatenate([np.zeros(n_s, np.int64), np.ones(n_s, np.int64)])
    ds = P / n_s
    lens = []
    for t_val in (t_rows[0], t_rows[-1]):
        g = surface.metric(np.array(0.0), np.array(t_val))
        lens.append(np.full(n_s, math.sqrt(g[0, 0]) * ds))
    return TriMesh(
        vertices=vertices,
        triangles=tri.astype(np.int64),
        local_coords=local,
        metric=metric,
        tensor=tensor,
        sqrt_det=sqrt_det,
        boundary_edges=b_edges.astype(np.int64),
        boundary_labels=b_labels,
        boundary_lengths=np.concatenate(lens),
        h=h,
        t_range=surface.t_range,
        name=surface.name,
    )


def grid_shape(mesh: TriMesh) -> tuple[int, int]:
    """``(columns, rows)`` of a structured mesh."""
    n_s = int(np.sum(mesh.boundary_labels == 0))
    return n_s, mesh.n_vertices // n_s


# ---------------------------------------------------------------------------
# Geometric brackets
# ---------------------------------------------------------------------------

class Bracket(NamedTuple):
    lo: float
    hi: float

    def scaled(self, c: float) -> "Bracket":
        return Bracket(self.lo * c, self.hi * c)


@dataclass(frozen=True)
class GeometryData:
    b: int
    a: float
    L: float
    area: Bracket
    length_sep: Bracket
    diam_bd: Bracket
    inj_bd: Bracket
    kappa: float
    genus: int | None = 0

    def __post_init__(self):
        for name in ("area", "length_sep", "diam_bd", "inj_bd"):
            br = getattr(self, name)
            if br.lo > br.hi * (1 + 1e-12) + 1e-300:
                raise SurfaceError(f"{name} bracket has lo > hi: {br}")
        if self.b < 1:
            raise SurfaceError("b must be >= 1")
        if self.inj_bd.hi > self.L * (1 + 1e-12) + 1e-300:
            raise SurfaceError("inj bracket must not exceed the cylindrical depth L")
        if self.length_sep.hi > self.a * (1 + 1e-12):
            raise SurfaceError("length(M) bracket must not exceed the boundary length a")

    def scaled(self, c: float) -> "GeometryData":
        """All lengths times ``c`` (areas ``c**2``, curvature ``c**-2``)."""
        return replace(
            self,
            a=self.a * c,
            L=self.L * c,
            area=self.area.scaled(c * c),
            length_sep=self.length_sep.scaled(c),
            diam_bd=self.diam_bd.scaled(c),
            inj_bd=self.inj_bd.scaled(c),
            kappa=self.kappa / (c * c),
        )


_DENSE = 401


def _piece_samples(piece: Piece, n=_DENSE):
    return np.linspace(piece.ta, piece.tb, n)


def _area_bracket(surface: MetricSurface) -> Bracket:
    exact = surface.exact_area()
    if exact is not None:
        return Bracket(exact, exact)
    total = 0.0
    err = 0.0
    for p in surface.profile.pieces:
        val, e = integrate.quad(lambda t: float(surface.profile.c(np.array(t))), p.ta, p.tb, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
        err += e
    k = surface.scale ** 2
    pad = err + 4e-16 * abs(total)
    return Bracket(k * (total - pad), k * (total + pad))


def _min_interior_circumference(surface: MetricSurface, ta: float, tb: float) -> float:
    prof = surface.profile
    best = math.inf
    for p in prof.pieces:
        lo, hi = max(p.ta, ta), min(p.tb, tb)
        if lo > hi:
            continue
        tt = np.linspace(lo, hi, _DENSE)
        vals = prof.c(tt)
        k = int(np.argmin(vals))
        best = min(best, float(vals[k]))
        if p.kind in ("hyperbolic", "sampled") and 0 < k < len(tt) - 1:
            res = optimize.minimize_scalar(lambda t: float(prof.c(np.array(t))), bounds=(tt[k - 1], tt[k + 1]), method="bounded", options={"xatol": 1e-12})
            best = min(best, float(res.fun))
    return surface.scale * best


def _sup_positive_curvature(surface: MetricSurface, ta: float, tb: float) -> float:
    best = 0.0
    for idx, p in enumerate(surface.profile.pieces):
        lo, hi = max(p.ta, ta), min(p.tb, tb)
        if lo > hi:
            continue
        if p.kind == "flat":
            continue
        if p.kind == "hyperbolic":
            continue
        k = surface.profile.piece_curvature(idx, np.linspace(lo, hi, _DENSE)) / surface.scale ** 2
        best = max(best, float(k.max()))
    return best


def _kappa(surface: MetricSurface, margin: float = 0.1) -> float:
    worst = 0.0
    for idx, p in enumerate(surface.profile.pieces):
        if p.kind == "flat":
            k = 0.0
        elif p.kind == "hyperbolic":
            k = -1.0 / surface.scale ** 2
        else:
            sampled = float(surface.profile.piece_curvature(idx, _piece_samples(p)).min()) / surface.scale ** 2
            k = sampled - margin * abs(sampled) if sampled < 0 else sampled
        worst = min(worst, k)
    return worst


def _boundary_graph_diameter(surface: MetricSurface, mesh: TriMesh, sources_per_component: int = 32) -> float:
    """Upper estimate of ``max d(x, y)`` over boundary points via mesh-edge paths."""
    edges = mesh.edges()
    # unwrapped chart displacement: pick the periodic image closest in s
    P = surface.period
    d = mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]]
    d[:, 0] -= P * np.round(d[:, 0] / P)
    p0 = mesh.vertices[edges[:, 0]]
    pts = [p0, p0 + 0.5 * d, p0 + d]
    q = np.zeros(len(edges))
    for p in pts:
        g = surface.metric(p[:, 0], p[:, 1])
        q = np.maximum(q, np.einsum("ei,eij,ej->e", d, g, d))
    w = np.sqrt(q)
    n = mesh.n_vertices
    graph = coo_matrix((np.concatenate([w, w]), (np.concatenate([edges[:, 0], edges[:, 1]]), np.concatenate([edges[:, 1], edges[:, 0]]))), shape=(n, n)).tocsr()
    bverts = mesh.boundary_vertices()
    sources = []
    stride = 1
    for lab in mesh.labels():
        vs = mesh.boundary_vertices([lab])
        stride = max(stride, math.ceil(len(vs) / sources_per_component))
        sources.append(vs[::max(1, math.ceil(len(vs) / sources_per_component))])
    sources = np.concatenate(sources)
    dist = dijkstra(graph, indices=sources)
    far = float(dist[:, bverts].max())
    hb = float(mesh.boundary_lengths.max())
    return far + (0.5 * stride + 1.0) * hb


def geometric_data(surface: MetricSurface, mesh: TriMesh | None = None, *, inj_override: float | None = None, diam_mesh_h: float | None = None) -> GeometryData:
    """Certified brackets for the quantities entering the eigenvalue bounds."""
    if not isinstance(surface.spec, tuple(_FAMILIES.values())):
        raise SurfaceError("geometric brackets are only available for built-in families")
    t0, t1 = surface.t_range
    a = max(surface.boundary_lengths)
    L = surface.L
    area = _area_bracket(surface)

    eps_t = 1e-9 * (t1 - t0)
    sep = _min_interior_circumference(surface, t0 + eps_t, t1 - eps_t)
    sep = min(sep, a)
    length_sep = Bracket(sep, sep)

    if mesh is None:
        h = diam_mesh_h or min(a, max(t1 - t0, 1e-12) * surface.scale) / 16
        mesh = triangulate(surface, h)
    diam_lo = surface.scale * (t1 - t0)
    diam_hi = max(_boundary_graph_diameter(surface, mesh), diam_lo)
    diam_bd = Bracket(diam_lo, diam_hi)

    band_a, band_b = t0 + surface.depth, t1 - surface.depth
    if band_a > band_b:
        band_a = band_b = 0.5 * (t0 + t1)
    kplus = _sup_positive_curvature(surface, band_a, band_b)
    conj = math.pi / math.sqrt(kplus) if kplus > 0 else math.inf
    loop = 0.5 * _min_interior_circumference(surface, band_a, band_b)
    inj_lo = min(conj, loop, L)
    if inj_override is not None:
        inj_lo = min(inj_override, L)
    inj_bd = Bracket(inj_lo, L)

    return GeometryData(
        b=surface.b,
        a=a,
        L=L,
        area=area,
        length_sep=length_sep,
        diam_bd=diam_bd,
        inj_bd=inj_bd,
        kappa=_kappa(surface),
        genus=0,
    )
