"""Smooth cutoff and bump profiles shared across the package.

Two families are provided:

* ``cutoff`` / ``cutoff_prime``: the piecewise-quintic plateau function used
  for frequency-splitting and time windows.  It equals 1 on [-1, 1], vanishes
  outside [-2, 2], and is C^2 at the junctions.  ``plateau`` rescales it to an
  arbitrary pair of radii.
* ``bump`` / ``bump_prime``: the classical C-infinity bump
  exp(1 - 1/(1 - s^2)) on (-1, 1), used for test functions, and
  ``smoothstep_inf``, the C-infinity step built from exp(-1/u), used to
  truncate initial data so that every derivative vanishes at the junctions.

All functions are vectorized over numpy arrays and return exact 0.0 outside
their support, which several support-confinement checks rely on.
"""

import numpy as np


def _quintic(u):
    # 6u^5 - 15u^4 + 10u^3: rises 0 -> 1 on [0, 1] with q' = q'' = 0 at ends
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def _quintic_prime(u):
    return 30.0 * u * u * (1.0 - u) * (1.0 - u)


def cutoff(s):
    """Quintic plateau: 1 on [-1, 1], 0 outside [-2, 2], monotone between."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    u = np.clip(2.0 - a, 0.0, 1.0)
    out = np.where(a <= 1.0, 1.0, _quintic(u))
    return np.where(a >= 2.0, 0.0, out)


def cutoff_prime(s):
    """Derivative of ``cutoff`` (closed form)."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inside = (a > 1.0) & (a < 2.0)
    u = np.clip(2.0 - a, 0.0, 1.0)
    d = np.where(inside, -_quintic_prime(u) * np.sign(s), 0.0)
    return d


def plateau(s, inner, outer):
    """Rescaled cutoff: 1 for |s| <= inner, 0 for |s| >= outer."""
    if not outer > inner > 0.0:
        raise ValueError("plateau requires 0 < inner < outer")
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    u = np.clip((outer - a) / (outer - inner), 0.0, 1.0)
    out = np.where(a <= inner, 1.0, _quintic(u))
    return np.where(a >= outer, 0.0, out)


def plateau_prime(s, inner, outer):
    if not outer > inner > 0.0:
        raise ValueError("plateau requires 0 < inner < outer")
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inside = (a > inner) & (a < outer)
    u = np.clip((outer - a) / (outer - inner), 0.0, 1.0)
    return np.where(inside, -_quintic_prime(u) / (outer - inner) * np.sign(s), 0.0)


def _septic(u):
    # 35u^4 - 84u^5 + 70u^6 - 20u^7: C^3 step on [0, 1]
    return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)))


def plateau3(s, inner, outer):
    """C^3 plateau (septic transition): 1 for |s| <= inner, 0 for |s| >= outer."""
    if not outer > inner > 0.0:
        raise ValueError("plateau3 requires 0 < inner < outer")
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    u = np.clip((outer - a) / (outer - inner), 0.0, 1.0)
    out = np.where(a <= inner, 1.0, _septic(u))
    return np.where(a >= outer, 0.0, out)


def bump(s):
    """C-infinity bump exp(1 - 1/(1 - s^2)) on (-1, 1), 0 elsewhere; bump(0) = 1."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    t = np.where(inside, s, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return np.where(inside, val, 0.0)


def bump_prime(s):
    """Derivative of ``bump``: -2s/(1-s^2)^2 * bump(s)."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    t = np.where(inside, s, 0.0)
    one = 1.0 - t * t
    with np.errstate(divide="ignore", over="ignore"):
        val = -2.0 * t / (one * one) * np.exp(1.0 - 1.0 / one)
    return np.where(inside, val, 0.0)


def smoothstep_inf(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, e^{-1/u} partition between."""
    u = np.asarray(u, dtype=float)
    lo = u <= 0.0
    hi = u >= 1.0
    t = np.clip(u, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.exp(-1.0 / t)
        b = np.exp(-1.0 / (1.0 - t))
        val = a / (a + b)
    return np.where(lo, 0.0, np.where(hi, 1.0, val))


def smoothstep_inf_prime(u):
    """Closed-form derivative of ``smoothstep_inf``."""
    u = np.asarray(u, dtype=float)
    interior = (u > 0.0) & (u < 1.0)
    t = np.clip(u, 1e-8, 1.0 - 1e-8)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.exp(-1.0 / t)
        b = np.exp(-1.0 / (1.0 - t))
        da = a / (t * t)
        db = -b / ((1.0 - t) * (1.0 - t))
        val = (da * b - a * db) / ((a + b) * (a + b))
    return np.where(interior, np.nan_to_num(val), 0.0)


def radial_taper(r, inner, outer):
    """C-infinity taper in a radius: 1 for r <= inner, 0 for r >= outer."""
    if not outer > inner > 0.0:
        raise ValueError("radial_taper requires 0 < inner < outer")
    r = np.asarray(r, dtype=float)
    return smoothstep_inf((outer - r) / (outer - inner))
