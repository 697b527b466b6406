"""Explicit eigenvalue bounds, hyperbolic constants, and bound reports.

Bracket policy: quantities in the numerator of a lower bound use the low
end of their bracket, quantities in the denominator use the high end.
Hypothesis failures give the verdict ``"not-applicable"``, never
``"violated"``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .spectra import collar_depth, collar_width
from .surface import Bracket, GeometryData

ASINH1 = math.asinh(1.0)
DEFAULT_TOL = 0.02


class BoundsError(ValueError):
    pass


def _safe(fn, *args):
    try:
        return fn(*args)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# Cylindrical boundary
# ---------------------------------------------------------------------------

def bound_length(geom: GeometryData, areaA: Bracket | None = None) -> float:
    """Lower bound ``min(length, L)**2 / (2 (b - 1) a |A|)`` for sigma_1."""
    if geom.b < 2:
        raise BoundsError("the length bound needs at least two boundary components")
    area = areaA.hi if areaA is not None else geom.area.hi
    m = min(geom.length_sep.lo, geom.L)
    return m * m / (2.0 * (geom.b - 1) * geom.a * area)


def curvature_constant(kappa: float, b: int) -> float:
    """``1 / (16 b**2 cosh(sqrt(-kappa)))``, zero once ``cosh`` overflows."""
    if not kappa < 0:
        raise BoundsError("curvature lower bound must be negative")
    c = _safe(math.cosh, math.sqrt(-kappa))
    return 0.0 if math.isinf(c) else 1.0 / (16.0 * b * b * c)


@dataclass(frozen=True)
class CurvatureBound:
    sharp: float
    simplified: float
    sharp_applicable: bool
    simplified_applicable: bool
    reason: str = ""


def bound_curvature(geom: GeometryData) -> CurvatureBound:
    """Curvature-based lower bounds for sigma_1.

    ``sharp`` keeps the full tube-volume estimate; ``simplified`` replaces
    it with ``C(kappa, b) inj / (a diam)``, valid when ``L <= 1`` and
    ``a <= diam``.
    """
    if not geom.kappa < 0:
        raise BoundsError("bound_curvature expects kappa < 0")
    b, a = geom.b, geom.a
    if b < 2:
        raise BoundsError("the curvature bound needs at least two boundary components")
    inj = geom.inj_bd.lo
    diam = geom.diam_bd.hi
    r = math.sqrt(-geom.kappa)
    tube = _safe(math.sinh, r * inj)
    if math.isinf(tube) or inj <= 0:
        sharp = 0.0
    else:
        sharp = inj * inj / (8.0 * (b - 1) * a * (a * b * inj + 2.0 * (b - 1) * diam * tube / r))
    simplified = curvature_constant(geom.kappa, b) * inj / (a * diam)
    reasons = []
    sharp_ok = geom.L <= 1.0
    if not sharp_ok:
        reasons.append("L > 1")
    simple_ok = sharp_ok and a <= geom.diam_bd.lo
    if a > geom.diam_bd.lo:
        reasons.append("a > diam")
    return CurvatureBound(sharp, simplified, sharp_ok, simple_ok, "; ".join(reasons))


def sandwich_bounds(a: float, L: float | None = None, b: int = 2, k: int = 1, collar: bool = False) -> tuple[float, float]:
    """Interval containing sigma_k for ``b`` cylindrical (or collar) ends.

    For ``k < b`` it is ``(0, 1/L*)``; for ``(2j-1) b <= k < (2j+1) b`` it is
    the band ``(w tanh(w L*), w coth(w L*))`` with ``w = 2 pi j / a``. For a
    collar ``L* = arctan(1/sinh(a/2))``.
    """
    if k < 0:
        raise BoundsError("k must be non-negative")
    depth = collar_depth(a) if collar else L
    if depth is None or not depth > 0:
        raise BoundsError("a positive depth L is required unless collar=True")
    if k < b:
        return 0.0, 1.0 / depth
    j = (k // b + 1) // 2
    w = 2.0 * math.pi * j / a
    x = w * depth
    return w * math.tanh(x), w / math.tanh(x)


# ---------------------------------------------------------------------------
# Hyperbolic surfaces
# ---------------------------------------------------------------------------

BETA_NAMES = tuple(f"beta{i}" for i in range(1, 14))


@dataclass(frozen=True)
class ConstantsReport:
    g: int
    b: int
    L_gb: float
    betas: dict
    C1: float
    C2: float

    def to_dict(self) -> dict:
        return {"g": self.g, "b": self.b, "L_gb": self.L_gb, **self.betas, "C1": self.C1, "C2": self.C2}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value"])
        for k, v in self.to_dict().items():
            w.writerow([k, repr(v)])
        return buf.getvalue()


def check_signature(g: int, b: int) -> None:
    if not (isinstance(g, int) and isinstance(b, int)):
        raise BoundsError("g and b must be integers")
    if g < 0:
        raise BoundsError("genus must be non-negative")
    if b < 2:
        raise BoundsError("need b >= 2 boundary components")
    if g == 0 and b <= 3:
        raise BoundsError("signature excluded: need g != 0 or b > 3")


def bers_length(g: int, b: int) -> float:
    """``4 (3(g+b) - 3) log(8 pi (g+b-1) / (3(g+b) - 3))``."""
    k = 3 * (g + b) - 3
    return 4.0 * k * math.log(8.0 * math.pi * (g + b - 1) / k)


def hyperbolic_constants(g: int, b: int) -> ConstantsReport:
    check_signature(g, b)
    n_curves = 3 * g - 3 + b
    area = 2.0 * math.pi * (2 * g - 2 + b)
    L_gb = bers_length(g, b)
    beta = {}
    beta["beta1"] = n_curves * L_gb
    beta["beta2"] = 1.0 / math.atan(1.0 / math.sinh(0.5))
    beta["beta3"] = (math.pi / ASINH1) * math.tanh(math.pi / (ASINH1 * math.atan(1.0)))
    beta["beta4"] = ASINH1 / area
    beta["beta5"] = collar_width(L_gb)
    beta["beta6"] = beta["beta5"] / area
    beta["beta7"] = n_curves * area
    b1 = beta["beta1"]
    beta["beta8"] = min(1.0 / b1, beta["beta4"] / b1, beta["beta6"] / b1, 1.0 / beta["beta7"])
    beta["beta9"] = beta["beta5"] / (2.0 * ASINH1 * b)
    beta["beta10"] = 1.0 / (n_curves * 2.0 * ASINH1 * b)
    beta["beta11"] = min(1.0 / b1, 1.0 / (2 * b * b1), beta["beta9"] / b1, beta["beta10"])
    beta["beta12"] = beta["beta8"] * beta["beta11"] / 4.0
    beta["beta13"] = min(beta["beta3"] / b1 ** 2, beta["beta12"])
    C1 = beta["beta13"]
    C2 = max(8.0 * ASINH1 / math.pi, beta["beta2"])
    return ConstantsReport(g, b, L_gb, beta, C1, C2)


@dataclass(frozen=True)
class HyperbolicBound:
    lower: float
    upper: float
    applicable: bool
    reason: str = ""


def bound_hyperbolic(g: int, b: int, a: float, n: int, length_n: float) -> HyperbolicBound:
    """``(C1 len**2, min(C2 len / a, 1/arctan(1/sinh(a/2))))``."""
    consts = hyperbolic_constants(g, b)
    reasons = []
    if a > 2 * ASINH1:
        reasons.append("a > 2 asinh(1)")
    if not 1 <= n < b:
        reasons.append("n outside [1, b)")
    if length_n < 0:
        raise BoundsError("length_n must be non-negative")
    lower = consts.C1 * length_n ** 2
    upper = min(consts.C2 * length_n / a, 1.0 / collar_depth(a))
    return HyperbolicBound(lower, upper, not reasons, "; ".join(reasons))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

VERDICTS = ("satisfied", "violated", "not-applicable")


@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str          # "lower" | "upper"
    value: float
    index: int
    sigma: float
    verdict: str
    margin: float

    @property
    def satisfied(self) -> bool:
        return self.verdict == "satisfied"


def judge(name: str, kind: str, value: float, index: int, sigma: float, tol: float = DEFAULT_TOL,
          applicable: bool = True, atol: float = 0.0) -> BoundEntry:
    """Compare one bound against a computed eigenvalue.

    A lower bound holds when ``value <= sigma (1 + tol) + atol``; an upper
    bound when ``value >= sigma (1 - tol) - atol``. ``atol`` absorbs
    round-off in eigenvalues that are zero in exact arithmetic.
    """
    if kind not in ("lower", "upper"):
        raise BoundsError("kind must be 'lower' or 'upper'")
    scale = abs(sigma) if sigma != 0 else 1.0
    if kind == "lower":
        margin = (sigma - value) / scale
        ok = value <= sigma * (1 + tol) + atol
    else:
        margin = (value - sigma) / scale
        ok = value >= sigma * (1 - tol) - atol
    verdict = "not-applicable" if not applicable else ("satisfied" if ok else "violated")
    return BoundEntry(name, kind, float(value), int(index), float(sigma), verdict, float(margin))


@dataclass(frozen=True)
class BoundReport:
    entries: tuple
    tol: float = DEFAULT_TOL

    def counts(self) -> dict:
        out = {v: 0 for v in VERDICTS}
        for e in self.entries:
            out[e.verdict] += 1
        return out

    def to_dict(self) -> dict:
        return {"tol": self.tol, "entries": [asdict(e) for e in self.entries], "counts": self.counts()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "kind", "value", "index", "sigma", "verdict", "margin"])
        for e in self.entries:
            w.writerow([e.name, e.kind, repr(e.value), e.index, repr(e.sigma), e.verdict, repr(e.margin)])
        return buf.getvalue()


def bound_report(geom: GeometryData, sigma, tol: float = DEFAULT_TOL, collar: bool = False) -> BoundReport:
    """Evaluate every applicable bound against computed ``sigma[0..]``."""
    entries = []
    s1 = float(sigma[1])
    atol = 1e-10 * float(max(abs(x) for x in sigma))
    if geom.b >= 2:
        entries.append(judge("length", "lower", bound_length(geom), 1, s1, tol))
    if geom.kappa < 0 and geom.b >= 2:
        cb = bound_curvature(geom)
        entries.append(judge("curvature-sharp", "lower", cb.sharp, 1, s1, tol, cb.sharp_applicable))
        entries.append(judge("curvature-simplified", "lower", cb.simplified, 1, s1, tol, cb.simplified_applicable))
    if geom.L > 0 or collar:
        for k in range(len(sigma)):
            lo, hi = sandwich_bounds(geom.a, geom.L if not collar else None, geom.b, k, collar)
            entries.append(judge(f"sandwich-lower-{k}", "lower", lo, k, float(sigma[k]), tol, atol=atol))
            entries.append(judge(f"sandwich-upper-{k}", "upper", hi, k, float(sigma[k]), 2 * tol, atol=atol))
    return BoundReport(tuple(entries), tol)
