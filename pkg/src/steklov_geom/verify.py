"""Verification suites run over the surface zoo.

Each check yields a ``CheckRecord`` with verdict ``pass``, ``fail`` or
``not-applicable``. Expensive artifacts (meshes, spectra, strips) are
cached per surface in a ``Workbench`` so suites can share them.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import __version__, zoo
from ._accel import backend
from .bounds import (
    bound_curvature,
    bound_length,
    curvature_constant,
    hyperbolic_constants,
    sandwich_bounds,
)
from .cheeger import cheeger_estimate, level_set_sweep, max_principle_violations
from .dtn_eigen import mixed_spectrum, steklov_spectrum
from .fem import assemble_stiffness, energy, integrate_density
from .separation import collar_mixed_mode, flat_cylinder_modes, flat_mixed_mode
from .spectra import (
    collar_depth,
    collar_mixed,
    collar_test_energy,
    collar_width,
    cylinder_mixed,
    cylinder_steklov,
    rho,
)
from .surface import (
    FlatCylinder,
    HyperbolicCollar,
    HyperbolicNeck,
    ThinNeckComposite,
    build_surface,
    geometric_data,
    triangulate,
)

SUITES = (
    "closed-forms",
    "constants",
    "fem-accuracy",
    "sandwich",
    "length-bound",
    "thin-neck",
    "curvature-bound",
    "cheeger",
    "homogeneity",
)

K_CHECK = 6
FEM_TOL = 0.02
CHEEGER_TOL = 0.05
ZERO_SLACK = 1e-10


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    surface: str
    h: float | None
    values: dict
    verdict: str
    runtime: float = 0.0

    def to_dict(self, timings: bool = False) -> dict:
        out = {"check_id": self.check_id, "surface": self.surface, "h": self.h, "values": self.values, "verdict": self.verdict}
        if timings:
            out["runtime"] = self.runtime
        return out


@dataclass
class VerificationReport:
    suites: tuple
    records: list = field(default_factory=list)
    version: str = __version__

    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "not-applicable": 0}
        for r in self.records:
            out[r.verdict] += 1
        out["total"] = len(self.records)
        return out

    @property
    def ok(self) -> bool:
        return self.summary()["fail"] == 0

    def to_dict(self, timings: bool = False) -> dict:
        recs = sorted(self.records, key=lambda r: r.check_id)
        return {
            "toolkit": "steklov-geom",
            "version": self.version,
            "suites": list(self.suites),
            "records": [r.to_dict(timings) for r in recs],
            "summary": self.summary(),
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=False) + "\n"


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _clean(x):
    """JSON-friendly floats (lists and dicts recurse)."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


# ---------------------------------------------------------------------------
# Cached per-surface data
# ---------------------------------------------------------------------------

class Analysis:
    """Mesh, spectra and geometry of one zoo surface at one mesh size."""

    def __init__(self, entry: zoo.ZooEntry, h_factor: float | None = None):
        self.entry = entry
        self.surface = entry.surface()
        self.h = entry.default_h(h_factor)

    @cached_property
    def mesh(self):
        return triangulate(self.surface, self.h)

    @cached_property
    def K(self):
        return assemble_stiffness(self.mesh)

    @cached_property
    def spectrum(self):
        return steklov_spectrum(self.mesh, K_CHECK, self.K)

    @cached_property
    def geometry(self):
        return geometric_data(self.surface, self.mesh)

    @cached_property
    def strips(self):
        return self.mesh.boundary_strips(self.entry.strip_depth(), cut_label=2)

    @cached_property
    def strip_K(self):
        return assemble_stiffness(self.strips)

    def mixed(self, kind: str):
        return mixed_spectrum(self.strips, (0, 1), (2,), kind, K_CHECK, self.strip_K)

    @cached_property
    def sweep(self):
        return level_set_sweep(self.mesh, self.spectrum.extensions[:, 1])


class Workbench:
    def __init__(self, h_factor: float | None = None, surfaces: list | None = None):
        self.h_factor = h_factor
        self._cache = {}
        self.names = surfaces if surfaces is not None else zoo.names()

    def __getitem__(self, name: str) -> Analysis:
        if name not in self._cache:
            self._cache[name] = Analysis(zoo.get(name), self.h_factor)
        return self._cache[name]

    def entries(self, predicate: Callable = lambda e: True):
        return [zoo.get(n) for n in self.names if predicate(zoo.get(n))]


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def suite_closed_forms(bench: Workbench):
    r = rho()
    yield CheckRecord("closed-forms/rho", "-", None, {"rho": r, "residual": r * math.tanh(r) - 1.0},
                      _verdict(abs(r - 1.19968) <= 1e-4 and abs(r * math.tanh(r) - 1.0) <= 1e-12))
    for n in (1, 2, 4):
        T = 2 * math.pi * n
        s1 = cylinder_steklov(1.0, T, 3)[1]
        target = 1.0 / (2 * math.pi * n)
        yield CheckRecord(f"closed-forms/cylinder-growing-n{n}", "-", None, {"sigma1": s1, "expected": target},
                          _verdict(s1 == target))
    worst = 0.0
    for R, T in ((1.0, 1.0), (1.0, 0.5), (2.0, 3.0)):
        cf = cylinder_steklov(R, T, 12)
        pairs = [(0.0, 1), (1.0 / T, 1)]
        for j in range(1, 8):
            lo, hi = flat_cylinder_modes(R, T, j)
            pairs += [(lo, 2), (hi, 2)]
        oracle = np.sort([v for v, m in pairs for _ in range(m)])[: len(cf)]
        worst = max(worst, max(_rel(x, y) for x, y in zip(cf.values[1:], oracle[1:])))
    yield CheckRecord("closed-forms/cylinder-vs-oracle", "-", None, {"max_rel_err": worst}, _verdict(worst <= 1e-10))

    worst = 0.0
    for a, L in ((2 * math.pi, 1.0), (1.0, 0.3), (3.0, 2.0)):
        for kind in "ND":
            cf = cylinder_mixed(a, L, kind, 10)
            for m in cf:
                o = flat_mixed_mode(a, L, m.j, kind)
                worst = max(worst, _rel(m.sigma, o) if m.sigma != 0 else abs(o))
    yield CheckRecord("closed-forms/mixed-cylinder-vs-oracle", "-", None, {"max_rel_err": worst}, _verdict(worst <= 1e-10))

    worst = 0.0
    for l in (2 * math.asinh(1.0), 1.0, 0.5):
        w = collar_width(l)
        for kind in "ND":
            cf = collar_mixed(l, kind, 8)
            for m in cf:
                o = collar_mixed_mode(l, w, m.j, kind)
                worst = max(worst, _rel(m.sigma, o) if m.sigma != 0 else abs(o))
    yield CheckRecord("closed-forms/mixed-collar-vs-oracle", "-", None, {"max_rel_err": worst}, _verdict(worst <= 1e-10))


def suite_constants(bench: Workbench):
    c = curvature_constant(-1.0, 2)
    yield CheckRecord("constants/C(-1,2)", "-", None, {"value": c, "expected": 1 / (64 * math.cosh(1.0))},
                      _verdict(abs(c - 1 / (64 * math.cosh(1.0))) <= 1e-12))
    for g, b in ((0, 4), (1, 2), (2, 3)):
        rep = hyperbolic_constants(g, b)
        n = 3 * (g + b) - 3
        L_ref = 4 * n * (math.log(8 * math.pi * (g + b - 1)) - math.log(n))
        ok = _rel(rep.L_gb, L_ref) <= 1e-12 and all(v > 0 for v in rep.betas.values()) and rep.C1 < rep.C2
        yield CheckRecord(f"constants/g{g}-b{b}", "-", None,
                          {"L_gb": rep.L_gb, "L_gb_ref": L_ref, "C1": rep.C1, "C2": rep.C2,
                           "min_beta": min(rep.betas.values())}, _verdict(ok))
    for l, h in ((1.0, 0.01), (2 * math.asinh(1.0), 0.01)):
        surf = build_surface(HyperbolicCollar(l, True))
        mesh = triangulate(surf, h)
        C = collar_depth(l)
        quad = integrate_density(mesh, surf, lambda s, t: 1.0 / (C * C * np.cosh(t) ** 2))
        formula = collar_test_energy(l)
        yield CheckRecord(f"constants/collar-energy-l{l:.6f}", "collar", h,
                          {"formula": formula, "quadrature": quad, "rel_err": _rel(quad, formula)},
                          _verdict(_rel(quad, formula) <= 1e-6))


def suite_fem_accuracy(bench: Workbench):
    surf = build_surface(FlatCylinder(1.0, 1.0), name="cyl-unit")
    exact = cylinder_steklov(1.0, 1.0, K_CHECK).values
    sig = {}
    for h in (0.02, 0.01):
        sig[h] = steklov_spectrum(triangulate(surf, h), K_CHECK).sigma
    err = {h: np.abs(sig[h][1:] - exact[1:]) / exact[1:] for h in sig}
    orders = []
    for e1, e2 in zip(err[0.02], err[0.01]):
        if e1 < 1e-10:
            continue  # modes reproduced exactly by P1 (linear in t)
        orders.append(math.log(e1 / e2, 2))
    ok = bool(np.all(err[0.02] <= 0.01)) and min(orders) >= 1.5
    yield CheckRecord("fem-accuracy/cyl-unit", "cyl-unit", 0.02,
                      {"sigma": sig[0.02][1:], "exact": exact[1:], "rel_err": err[0.02], "orders": orders}, _verdict(ok))


def suite_sandwich(bench: Workbench):
    for e in bench.entries():
        an = bench[e.name]
        s = an.spectrum.sigma
        n = an.mixed("N").sigma
        d = an.mixed("D").sigma
        ok = all(n[k] <= s[k] * (1 + FEM_TOL) + ZERO_SLACK * s[-1] and s[k] <= d[k] * (1 + FEM_TOL) for k in range(K_CHECK + 1))
        yield CheckRecord(f"sandwich/{e.name}", e.name, an.h, {"sigma": s, "sigma_N": n, "sigma_D": d}, _verdict(ok))
        # closed-form bands for flat-ended surfaces
        if an.surface.L > 0 and isinstance(e.spec, (FlatCylinder,)):
            viol = []
            for k in range(2 * an.geometry.b + 1):
                lo, hi = sandwich_bounds(an.geometry.a, an.geometry.L, an.geometry.b, k)
                # zero eigenvalues come out at round-off level, possibly negative
                slack = ZERO_SLACK * s[-1]
                if not (lo <= s[k] * (1 + FEM_TOL) + slack and s[k] * (1 + FEM_TOL) <= hi * 1.04):
                    viol.append(k)
            yield CheckRecord(f"sandwich/{e.name}/bands", e.name, an.h, {"violations": viol}, _verdict(not viol))


def suite_length_bound(bench: Workbench):
    for e in bench.entries():
        an = bench[e.name]
        g = an.geometry
        bl = bound_length(g)
        s1 = an.spectrum.sigma[1]
        yield CheckRecord(f"length-bound/{e.name}", e.name, an.h, {"bound": bl, "sigma1": s1},
                          _verdict(bl <= s1 * (1 + FEM_TOL)))
        if isinstance(e.spec, FlatCylinder) and e.name.startswith("cyl-n"):
            ratio = s1 / bl
            yield CheckRecord(f"length-bound/{e.name}/ratio", e.name, an.h, {"ratio": ratio},
                              _verdict(abs(ratio - 4.0) <= 0.08))


def neck_test_function(mesh, spec: ThinNeckComposite) -> np.ndarray:
    """``-1`` before the neck, ``+1`` after it, linear along it (``2 eps t`` when the length is ``1/eps``)."""
    wb = min(spec.L, spec.eps) / 4.0
    mid = spec.L + wb + 0.5 * spec.neck_length
    return np.clip(2.0 * (mesh.vertices[:, 1] - mid) / spec.neck_length, -1.0, 1.0)


def suite_thin_neck(bench: Workbench):
    for e in bench.entries(lambda z: isinstance(z.spec, ThinNeckComposite)):
        an = bench[e.name]
        eps = e.spec.eps
        s1 = an.spectrum.sigma[1]
        bl = bound_length(an.geometry)
        f = neck_test_function(an.mesh, e.spec)
        E = energy(an.K, f)
        target = 4 * eps / e.spec.neck_length
        ok = s1 <= 2 * eps * eps * 1.05 and s1 * (1 + FEM_TOL) >= bl and abs(E - target) <= 0.01 * target
        yield CheckRecord(f"thin-neck/{e.name}", e.name, an.h,
                          {"sigma1": s1, "two_eps_sq": 2 * eps * eps, "bound_length": bl, "energy": E, "energy_expected": target},
                          _verdict(ok))


def suite_curvature_bound(bench: Workbench):
    c = curvature_constant(-1.0, 2)
    yield CheckRecord("curvature-bound/C(-1,2)", "-", None, {"value": c}, _verdict(abs(c - 1 / (64 * math.cosh(1.0))) <= 1e-12))
    for e in bench.entries(lambda z: isinstance(z.spec, HyperbolicNeck)):
        an = bench[e.name]
        cb = bound_curvature(an.geometry)
        s1 = an.spectrum.sigma[1]
        vals = {"sharp": cb.sharp, "simplified": cb.simplified, "sigma1": s1, "reason": cb.reason}
        if not (cb.sharp_applicable and cb.simplified_applicable):
            yield CheckRecord(f"curvature-bound/{e.name}", e.name, an.h, vals, "not-applicable")
            continue
        ok = cb.sharp <= s1 * (1 + FEM_TOL) and cb.simplified <= s1 * (1 + FEM_TOL) and cb.sharp >= cb.simplified
        yield CheckRecord(f"curvature-bound/{e.name}", e.name, an.h, vals, _verdict(ok))


def suite_cheeger(bench: Workbench):
    for e in bench.entries():
        an = bench[e.name]
        est = cheeger_estimate(an.sweep)
        s1 = an.spectrum.sigma[1]
        mp = max_principle_violations(an.mesh, an.spectrum.extensions[:, 1])
        yield CheckRecord(f"cheeger/{e.name}", e.name, an.h,
                          {"h1": est.h1, "h2": est.h2, "bound": est.bound, "sigma1": s1, "max_principle_violations": mp},
                          _verdict(est.bound <= s1 * (1 + CHEEGER_TOL)))
        if isinstance(e.spec, FlatCylinder):
            g = an.geometry
            m = min(g.length_sep.lo, g.L)
            h1_lo = 2 * m / g.area.hi
            h2_lo = m / ((g.b - 1) * g.a)
            ok = est.h1 >= h1_lo * 0.9 and est.h2 >= h2_lo * 0.9
            yield CheckRecord(f"cheeger/{e.name}/analytic-h", e.name, an.h,
                              {"h1": est.h1, "h1_lower": h1_lo, "h2": est.h2, "h2_lower": h2_lo}, _verdict(ok))


HOMOGENEITY_TOL = 1e-8


def scaled_lower_bounds(an: Analysis, c: float) -> dict:
    """Every emitted lower bound for the metric scaled by ``c**2``."""
    g = an.geometry.scaled(c)
    mesh = an.mesh.scaled(c)
    out = {"length": bound_length(g)}
    if g.kappa < 0:
        cb = bound_curvature(g)
        if cb.sharp_applicable:
            out["curvature-sharp"] = cb.sharp
        if cb.simplified_applicable:
            out["curvature-simplified"] = cb.simplified
    out["cheeger"] = cheeger_estimate(level_set_sweep(mesh, an.spectrum.extensions[:, 1])).bound
    if g.L > 0:
        for k in range(1, K_CHECK + 1):
            out[f"sandwich-lower-{k}"] = sandwich_bounds(g.a, g.L, g.b, k)[0]
    return out


def suite_homogeneity(bench: Workbench, factors=(0.5, 3.0)):
    for e in bench.entries():
        an = bench[e.name]
        base_sigma = an.spectrum.sigma
        base = scaled_lower_bounds(an, 1.0)
        for c in factors:
            mesh = an.mesh.scaled(c)
            sig = steklov_spectrum(mesh, K_CHECK).sigma
            eig_err = float(np.max(np.abs(sig[1:] * c - base_sigma[1:]) / base_sigma[1:]))
            scaled = scaled_lower_bounds(an, c)
            bound_err = {}
            for name, v in scaled.items():
                if name not in base:
                    continue
                ref = base[name]
                bound_err[name] = abs(v * c - ref) / ref if ref > 0 else abs(v)
            bad = sorted(n for n, v in bound_err.items() if v > HOMOGENEITY_TOL)
            ok = eig_err <= HOMOGENEITY_TOL and not bad
            yield CheckRecord(f"homogeneity/{e.name}/c={c:g}", e.name, an.h,
                              {"eigen_rel_err": eig_err, "bound_rel_err": bound_err, "non_homogeneous": bad},
                              _verdict(ok))


RUNNERS = {
    "closed-forms": suite_closed_forms,
    "constants": suite_constants,
    "fem-accuracy": suite_fem_accuracy,
    "sandwich": suite_sandwich,
    "length-bound": suite_length_bound,
    "thin-neck": suite_thin_neck,
    "curvature-bound": suite_curvature_bound,
    "cheeger": suite_cheeger,
    "homogeneity": suite_homogeneity,
}


def resolve_suites(name: str) -> tuple:
    if name == "all":
        return SUITES
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return (name,)


def run(suite: str = "all", h_factor: float | None = None, bench: Workbench | None = None,
        on_record: Callable | None = None) -> VerificationReport:
    """Run one suite (or ``"all"``) and collect the records.

    A check that raises becomes a ``fail`` record carrying the error text.
    """
    suites = resolve_suites(suite)
    bench = bench or Workbench(h_factor)
    report = VerificationReport(suites)
    for name in suites:
        gen = RUNNERS[name](bench)
        while True:
            t0 = time.perf_counter()
            try:
                rec = next(gen)
            except StopIteration:
                break
            except Exception as exc:  # keep going: partial reports are still written
                rec = CheckRecord(f"{name}/error", "-", None, {"error": f"{type(exc).__name__}: {exc}"}, "fail")
                report.records.append(rec)
                if on_record:
                    on_record(rec)
                break
            rec = CheckRecord(rec.check_id, rec.surface, rec.h, _clean(rec.values), rec.verdict,
                              time.perf_counter() - t0)
            report.records.append(rec)
            if on_record:
                on_record(rec)
    return report


def describe_backend() -> str:
    return backend()
