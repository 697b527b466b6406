"""Separation of variables for rotationally symmetric strips.

An independent route to the closed-form spectra: for each angular
frequency the Steklov problem reduces to a linear ODE in the meridian
variable, which is integrated numerically here (matrix exponential for
constant coefficients, an adaptive Runge-Kutta solver otherwise).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm


def _flat_propagator(omega: float, length: float) -> np.ndarray:
    """Transfer matrix of ``f'' = omega**2 f`` across ``length``: ``(f, f') -> (f, f')``."""
    return expm(np.array([[0.0, 1.0], [omega * omega, 0.0]]) * length)


def flat_mixed_mode(a: float, L: float, j: int, kind: str) -> float:
    """Eigenvalue of frequency ``j`` on a flat strip, Steklov at ``t=0``."""
    omega = 2.0 * math.pi * j / a
    end = np.array([1.0, 0.0]) if kind.upper() == "N" else np.array([0.0, 1.0])
    f0, df0 = _flat_propagator(omega, -L) @ end
    return -df0 / f0


def flat_cylinder_modes(R: float, T: float, j: int) -> tuple[float, float]:
    """Both eigenvalues of frequency ``j`` on ``S^1_R x [-T, T]`` (2x2 DtN block)."""
    omega = j / R
    (A, B), (C, D) = _flat_propagator(omega, 2.0 * T)
    dtn = np.array([[A / B, -1.0 / B], [C - D * A / B, D / B]])
    dtn = 0.5 * (dtn + dtn.T)
    lo, hi = np.linalg.eigvalsh(dtn)
    return float(lo), float(hi)


def collar_mixed_mode(l: float, width: float, j: int, kind: str, rtol: float = 1e-13) -> float:
    """Eigenvalue of frequency ``j`` on the half collar ``t in [0, width]``.

    The circumference is ``c(t) = l cosh t``; with ``p = c f'`` the mode
    equation is ``f' = p / c``, ``p' = (2 pi j)**2 f / c``. Steklov at
    ``t = 0`` gives ``sigma = -f'(0) / f(0)``.
    """
    k2 = (2.0 * math.pi * j) ** 2

    def rhs(t, y):
        c = l * math.cosh(t)
        return [y[1] / c, k2 * y[0] / c]

    end = [1.0, 0.0] if kind.upper() == "N" else [0.0, 1.0]
    sol = solve_ivp(rhs, (width, 0.0), end, method="DOP853", rtol=rtol, atol=1e-15)
    f0, p0 = sol.y[:, -1]
    return -(p0 / l) / f0


def spectrum_from_modes(pairs, k: int) -> np.ndarray:
    """Sort ``(value, multiplicity)`` pairs and keep indices ``0..k``."""
    vals = []
    for v, mult in pairs:
        vals += [v] * mult
    return np.sort(np.array(vals))[: k + 1]
