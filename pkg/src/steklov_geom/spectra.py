"""Closed-form spectra of flat cylinders and hyperbolic collars.

Eigenvalues come with mode labels so that ties sort deterministically:
``const < linear < tanh < coth``, then by angular frequency ``j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.optimize import brentq

MODE_ORDER = {"const": 0, "linear": 1, "tanh": 2, "coth": 3}


@dataclass(frozen=True)
class Mode:
    sigma: float
    j: int
    kind: str


@dataclass(frozen=True)
class ClosedFormSpectrum:
    """Ascending eigenvalues ``sigma_0 <= sigma_1 <= ...`` with mode labels."""

    modes: tuple

    @property
    def values(self) -> np.ndarray:
        return np.array([m.sigma for m in self.modes])

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, k):
        return self.modes[k].sigma

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.modes)

    def to_csv(self) -> str:
        lines = ["k,sigma,j,mode"]
        for k, m in enumerate(self.modes):
            lines.append(f"{k},{m.sigma!r},{m.j},{m.kind}")
        return "\n".join(lines) + "\n"


def _sorted_spectrum(modes, k: int) -> ClosedFormSpectrum:
    modes = sorted(modes, key=lambda m: (m.sigma, MODE_ORDER[m.kind], m.j))
    return ClosedFormSpectrum(tuple(modes[: k + 1]))


def _check_positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be a positive finite number, got {v!r}")


def _check_count(k):
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def cylinder_steklov(R: float, T: float, k: int) -> ClosedFormSpectrum:
    """Steklov spectrum of the flat cylinder ``S^1_R x [-T, T]``, indices ``0..k``.

    Each angular frequency ``j >= 1`` contributes an even (tanh) and an odd
    (coth) pair of eigenvalues, each of multiplicity two.
    """
    _check_positive(R=R, T=T)
    _check_count(k)
    modes = [Mode(0.0, 0, "const"), Mode(1.0 / T, 0, "linear")]
    # frequencies past this point exceed every value already collected
    jmax = k // 2 + 2
    for j in range(1, jmax + 1):
        w = j / R
        lo = w * math.tanh(w * T)
        hi = w * _coth(w * T)
        modes += [Mode(lo, j, "tanh")] * 2 + [Mode(hi, j, "coth")] * 2
    return _sorted_spectrum(modes, k)


def cylinder_mixed(a: float, L: float, kind: str, k: int) -> ClosedFormSpectrum:
    """Mixed spectrum on the flat strip ``(circle of length a) x [0, L]``.

    Steklov condition on one circle; on the other a Neumann (``kind="N"``)
    or Dirichlet (``kind="D"``) condition.
    """
    _check_positive(a=a, L=L)
    _check_count(k)
    kind = kind.upper()
    if kind not in ("N", "D"):
        raise ValueError("kind must be 'N' or 'D'")
    if kind == "N":
        modes = [Mode(0.0, 0, "const")]
    else:
        modes = [Mode(1.0 / L, 0, "linear")]
    for j in range(1, k // 2 + 2):
        w = 2 * math.pi * j / a
        if kind == "N":
            modes += [Mode(w * math.tanh(w * L), j, "tanh")] * 2
        else:
            modes += [Mode(w * _coth(w * L), j, "coth")] * 2
    return _sorted_spectrum(modes, k)


def rho(tol: float = 1e-14) -> float:
    """Positive root of ``x tanh(x) = 1`` (about 1.19968)."""
    return brentq(lambda x: x * math.tanh(x) - 1.0, 1.0, 1.5, xtol=tol, rtol=4 * np.finfo(float).eps)


def collar_width(l: float) -> float:
    """Half-width ``arcsinh(1 / sinh(l / 2))`` of the collar around a geodesic of length ``l``.

    Switches to asymptotic forms for ``l > 50`` (where ``sinh`` overflows
    long before the result underflows) and ``l < 1e-6``.
    """
    _check_positive(l=l)
    if l > 50.0:
        q = math.exp(-l)
        x = 2.0 * math.exp(-0.5 * l) / (1.0 - q)
        return x - x ** 3 / 6.0
    if l < 1e-6:
        return math.log(4.0 / l) + l * l / 48.0
    return math.asinh(1.0 / math.sinh(0.5 * l))


def collar_depth(a: float) -> float:
    """Flat depth ``arctan(1 / sinh(a / 2))`` conformally equivalent to a half collar."""
    _check_positive(a=a)
    if a > 50.0:
        # 1/sinh(a/2) is tiny, arctan(x) ~ x
        q = math.exp(-a)
        return 2.0 * math.exp(-0.5 * a) / (1.0 - q)
    return math.atan(1.0 / math.sinh(0.5 * a))


def collar_mixed(a: float, kind: str, k: int) -> ClosedFormSpectrum:
    """Mixed spectrum of the half collar with Steklov condition on the geodesic side."""
    return cylinder_mixed(a, collar_depth(a), kind, k)


def collar_test_energy(l: float) -> float:
    """Dirichlet energy ``l / arctan(1 / sinh(l / 2))`` of the collar test function.

    The test function is ``arctan(sinh t) / arctan(1 / sinh(l / 2))`` on the
    half collar ``t in [0, w(l)]``.
    """
    return l / collar_depth(l)
