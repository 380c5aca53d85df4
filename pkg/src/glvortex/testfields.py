"""Reproducible test fields: cubic B-spline bumps and smooth cutoffs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .errors import DomainError


@dataclass(frozen=True)
class SampledField:
    """Sampled real fields (nodes, m) with exact derivatives and the coefficients used."""

    values: np.ndarray
    derivs: np.ndarray
    coefficients: np.ndarray
    support: tuple


def bspline_bump(r, lo: float, hi: float, coefficients):
    """Clamped-to-zero cubic spline on [lo, hi] with the given interior coefficients.

    The first and last two coefficients are forced to zero so the field and its first
    derivative vanish at both ends of the support.
    """
    c = np.asarray(coefficients, dtype=float)
    n = c.size + 4
    inner = np.linspace(lo, hi, n - 2)
    knots = np.concatenate([[lo] * 3, inner, [hi] * 3])
    full = np.concatenate([[0.0, 0.0], c, [0.0, 0.0]])
    spl = BSpline(knots, full, 3, extrapolate=False)
    r = np.asarray(r, dtype=float)
    v = np.nan_to_num(spl(r))
    dv = np.nan_to_num(spl.derivative()(r))
    outside = (r < lo) | (r > hi)
    v[outside] = 0.0
    dv[outside] = 0.0
    return v, dv


def random_bumps(grid, m: int, rng, lo_frac: float = 0.1, hi_frac: float = 0.9, ncoef: int = 8) -> SampledField:
    """``m`` independent random bumps supported in [lo_frac, hi_frac] * Rmax."""
    if not 0 < lo_frac < hi_frac <= 1:
        raise DomainError("need 0 < lo_frac < hi_frac <= 1")
    r = grid.nodes
    lo, hi = lo_frac * grid.Rmax, hi_frac * grid.Rmax
    coef = rng.standard_normal((m, ncoef))
    vals, ders = zip(*(bspline_bump(r, lo, hi, c) for c in coef))
    return SampledField(np.column_stack(vals), np.column_stack(ders), coef, (lo, hi))


def smoothstep(x):
    """C^2 quintic ramp from 0 (x <= 0) to 1 (x >= 1) and its derivative."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**3 * (10 - 15 * x + 6 * x**2), 30 * x**2 * (1 - x) ** 2


def cutoff(r, r0: float, r1: float, r2: float, r3: float):
    """Smooth window: 0 below r0, rising to 1 on [r0, r1], 1 up to r2, 0 beyond r3."""
    if not r0 < r1 <= r2 < r3:
        raise DomainError("cutoff needs r0 < r1 <= r2 < r3")
    r = np.asarray(r, dtype=float)
    up, dup = smoothstep((r - r0) / (r1 - r0))
    down, ddown = smoothstep((r3 - r) / (r3 - r2))
    return up * down, dup / (r1 - r0) * down - up * ddown / (r3 - r2)


def outer_cutoff(r, r2: float, r3: float):
    """Smooth window equal to 1 up to r2 and 0 beyond r3."""
    r = np.asarray(r, dtype=float)
    down, ddown = smoothstep((r3 - r) / (r3 - r2))
    return down, -ddown / (r3 - r2)
