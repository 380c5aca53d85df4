"""Independent reference computations used to validate the discrete solvers.

Nothing here shares code with the finite-difference machinery: the scalar vortex comes
from ODE shooting with an adaptive integrator, and quadratic forms are evaluated on a
2D polar tensor grid with FFT-free trapezoid sums in the angle.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp


def _shoot(a, n, rho_max):
    """Integrate f'' + f'/rho - n^2 f/rho^2 + (1 - f^2) f = 0 from the origin series."""
    rho0 = 1e-3
    c = -1.0 / (4 * (n + 1))
    f0 = a * rho0**n * (1 + c * rho0**2)
    df0 = a * (n * rho0 ** (n - 1) + (n + 2) * c * rho0 ** (n + 1))

    def rhs(rho, y):
        f, g = y
        return [g, -g / rho + n * n * f / rho**2 - (1 - f * f) * f]

    def escape_high(rho, y):
        return y[0] - 1.2

    def escape_low(rho, y):
        return y[1]

    escape_high.terminal = True
    escape_low.terminal = True
    sol = solve_ivp(
        rhs, (rho0, rho_max), [f0, df0], method="DOP853", rtol=1e-13, atol=1e-15,
        events=(escape_high, escape_low), dense_output=True,
    )
    return sol


def scalar_vortex(n: int = 1, A: float = 1.0, t: float = 1.0, rho_max: float = 30.0):
    """Return (U, r_valid) for the scalar degree-n vortex by bisection on the origin slope.

    U(r) = t f(sqrt(A) t r), where f is the unit scalar vortex.  The shot is accurate
    only on a bounded interval; ``r_valid`` is the largest radius at which the two
    bracketing shots still agree to 1e-9.
    """
    if n < 1:
        raise ValueError("shooting oracle needs a positive degree")
    lo, hi = 0.1, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        sol = _shoot(mid, n, rho_max)
        if sol.t_events[0].size or sol.t_events[1].size:
            overshoot = sol.t_events[0].size > 0
        else:
            overshoot = sol.y[0, -1] > 1.0
        if overshoot:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-16 * hi:
            break
    s_lo, s_hi = _shoot(lo, n, rho_max), _shoot(hi, n, rho_max)
    end = min(s_lo.t[-1], s_hi.t[-1])
    probe = np.linspace(1e-3, end, 4000)
    gap = np.abs(s_lo.sol(probe)[0] - s_hi.sol(probe)[0])
    bad = np.nonzero(gap > 1e-9)[0]
    rho_valid = probe[bad[0] - 1] if bad.size else end
    scale = math.sqrt(A) * t

    def U(r):
        rho = np.asarray(r, dtype=float) * scale
        out = np.empty_like(rho)
        small = rho < 1e-3
        c = -1.0 / (4 * (n + 1))
        out[small] = lo * rho[small] ** n * (1 + c * rho[small] ** 2)
        out[~small] = s_lo.sol(rho[~small])[0]
        return t * out

    U.origin_slope = lo
    return U, rho_valid / scale


def polar_quadratic(form_density, R: float, nr: int = 2000, ntheta: int = 64):
    """Integrate a density f(r, theta) over the disk of radius R in polar coordinates.

    Uses Gauss-Legendre in r and the periodic trapezoid rule in theta, which is
    spectrally accurate for trigonometric polynomials of degree below ``ntheta``.
    """
    x, wx = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * R * (x + 1)
    wr = 0.5 * R * wx
    theta = 2 * np.pi * np.arange(ntheta) / ntheta
    rr, th = np.meshgrid(r, theta, indexing="ij")
    vals = form_density(rr, th)
    return float(np.sum(vals * (wr * r)[:, None]) * (2 * np.pi / ntheta))


# --------------------------------------------------------------------------- form integrands
#
# Each integrand is written straight from the defining integral in complex arithmetic.
# ``grad`` receives derivative samples and the squared amplitudes to weight them with;
# ``zero`` receives field samples.  Both return densities against r dr.


class Amplitudes:
    """Profile samples (U+, U-) and the coupling constants at a set of radii."""

    def __init__(self, params, Up, Um, r):
        self.p = params
        self.Up = np.asarray(Up, dtype=float)
        self.Um = np.asarray(Um, dtype=float)
        self.r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            self.inv_r2 = np.where(self.r > 0, 1.0 / np.where(self.r > 0, self.r, 1.0) ** 2, 0.0)
        self.Pp, self.Pm = params.potentials(self.Up, self.Um)


def _abs2(z):
    return np.real(z * np.conj(z))


def B0_grad(d, amp):
    return _abs2(d["p"]) + _abs2(d["m"])


def B0_zero(v, amp):
    p = amp.p
    return (
        amp.inv_r2 * (_abs2(v["p"]) + _abs2(v["m"]))
        + 2 * (p.Aplus * amp.Up**2 * np.real(v["p"]) ** 2 + p.Aminus * amp.Um**2 * np.real(v["m"]) ** 2)
        + 4 * p.B * amp.Up * amp.Um * np.real(v["p"]) * np.real(v["m"])
        + amp.Pp * _abs2(v["p"])
        + amp.Pm * _abs2(v["m"])
    )


def Bk_grad(d, amp):
    return _abs2(d["ap"]) + _abs2(d["bp"]) + _abs2(d["am"]) + _abs2(d["bm"])


def Bk_zero(v, amp, k):
    p = amp.p
    ap, bp, am, bm = v["ap"], v["bp"], v["am"], v["bm"]
    cent = amp.inv_r2 * ((1 + k) ** 2 * (_abs2(ap) + _abs2(am)) + (1 - k) ** 2 * (_abs2(bp) + _abs2(bm)))
    return (
        cent
        + p.Aplus * amp.Up**2 * _abs2(ap + np.conj(bp))
        + p.Aminus * amp.Um**2 * _abs2(am + np.conj(bm))
        + 2 * p.B * amp.Up * amp.Um
        * (np.real((ap + np.conj(bp)) * np.conj(am)) + np.real((bp + np.conj(ap)) * np.conj(bm)))
        + amp.Pp * (_abs2(ap) + _abs2(bp))
        + amp.Pm * (_abs2(am) + _abs2(bm))
    )


def D_grad(d, amp):
    return d["p2p"] ** 2 + d["p0p"] ** 2 + d["p2m"] ** 2 + d["p0m"] ** 2


def D_zero(v, amp):
    p = amp.p
    Dp = v["p0p"] - v["p2p"]
    Dm = v["p0m"] - v["p2m"]
    return (
        4 * amp.inv_r2 * (v["p2p"] ** 2 + v["p2m"] ** 2)
        + p.Aplus * amp.Up**2 * Dp**2
        + p.Aminus * amp.Um**2 * Dm**2
        + 2 * p.B * amp.Up * amp.Um * (Dp * (-v["p2m"]) + Dp * v["p0m"])
        + amp.Pp * (v["p2p"] ** 2 + v["p0p"] ** 2)
        + amp.Pm * (v["p2m"] ** 2 + v["p0m"] ** 2)
    )


def F_density(v, d, amp):
    """Integrand of F(C+, C-, D+, D-) against r dr."""
    p = amp.p
    Cp, Cm, Dp, Dm = v["Cp"], v["Cm"], v["Dp"], v["Dm"]
    return (
        0.5 * (d["Cp"] ** 2 + d["Dp"] ** 2 + 2 * amp.inv_r2 * (Cp - Dp) ** 2)
        + 0.5 * (d["Cm"] ** 2 + d["Dm"] ** 2 + 2 * amp.inv_r2 * (Cm - Dm) ** 2)
        + p.Aplus * amp.Up**2 * Dp**2
        + p.Aminus * amp.Um**2 * Dm**2
        + 0.5 * amp.Pp * (Cp**2 + Dp**2)
        + 0.5 * amp.Pm * (Cm**2 + Dm**2)
        + 2 * p.B * amp.Up * amp.Um * Dp * Dm
    )


def M_grad(d, amp, Up2, Um2):
    return Up2 * (d["V1p"] ** 2 + d["V2p"] ** 2) + Um2 * (d["V1m"] ** 2 + d["V2m"] ** 2)


def M_zero(v, amp, j, ell):
    p = amp.p
    off = (-1) ** (ell + 1) * 2 * j
    quad_p = j**2 * (v["V1p"] ** 2 + v["V2p"] ** 2) + 2 * off * v["V1p"] * v["V2p"]
    quad_m = j**2 * (v["V1m"] ** 2 + v["V2m"] ** 2) + 2 * off * v["V1m"] * v["V2m"]
    return (
        amp.inv_r2 * (amp.Up**2 * quad_p + amp.Um**2 * quad_m)
        + 2 * p.Aplus * amp.Up**4 * v["V2p"] ** 2
        + 2 * p.Aminus * amp.Um**4 * v["V2m"] ** 2
        + 4 * p.B * amp.Up**2 * amp.Um**2 * v["V2p"] * v["V2m"]
    )


def _unpack(kind, F):
    """Complex or real named fields from the column layout used by the mode forms."""
    F = np.asarray(F, dtype=float)
    if kind == "B0":
        return {"p": F[..., 0] + 1j * F[..., 2], "m": F[..., 1] + 1j * F[..., 3]}
    if kind == "Bk":
        return {
            "ap": F[..., 0] + 1j * F[..., 4], "am": F[..., 1] + 1j * F[..., 5],
            "bp": F[..., 2] + 1j * F[..., 6], "bm": F[..., 3] + 1j * F[..., 7],
        }
    if kind == "D":
        return {"p2p": F[..., 0], "p2m": F[..., 1], "p0p": F[..., 2], "p0m": F[..., 3]}
    if kind == "Mform":
        return {"V1p": F[..., 0], "V2p": F[..., 1], "V1m": F[..., 2], "V2m": F[..., 3]}
    raise ValueError(f"unknown form kind {kind!r}")


def discrete_form_value(form, profile, fields) -> float:
    """Evaluate a mode form by summing its integrand with the discrete calculus.

    Gradients are edge differences weighted by ``r_mid h``; squared-amplitude gradient
    weights use ``U_i U_{i+1}``; zeroth-order terms use the lumped r-weights.  Entries
    constrained by boundary conditions are zeroed first.
    """
    g = profile.grid
    r = g.nodes
    h = np.diff(r)
    rm = 0.5 * (r[:-1] + r[1:])
    cell = np.zeros_like(r)
    cell[:-1] += h / 2
    cell[1:] += h / 2
    w = r * cell
    F = np.where(form.free, np.asarray(fields, dtype=float), 0.0)
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    amp = Amplitudes(profile.params, Up, Um, r)
    vals = _unpack(form.kind, F)
    ders = _unpack(form.kind, np.diff(F, axis=0) / h[:, None])
    if form.kind == "B0":
        grad, zero = B0_grad(ders, None), B0_zero(vals, amp)
    elif form.kind == "Bk":
        grad, zero = Bk_grad(ders, None), Bk_zero(vals, amp, form.k_or_j)
    elif form.kind == "D":
        grad, zero = D_grad(ders, None), D_zero(vals, amp)
    else:
        grad = M_grad(ders, None, Up[:-1] * Up[1:], Um[:-1] * Um[1:])
        zero = M_zero(vals, amp, form.k_or_j, form.ell)
    return float(np.sum(grad * rm * h) + np.sum(zero * w))


# --------------------------------------------------------------------------- continuum quadrature


class ContinuumProfile:
    """Cubic-spline interpolant of a discrete profile for off-grid quadrature."""

    def __init__(self, profile):
        from scipy.interpolate import CubicSpline

        r = profile.grid.nodes
        self.params = profile.params
        self.Rmax = profile.grid.Rmax
        self._p = CubicSpline(r, profile.Uplus)
        self._m = CubicSpline(r, profile.Uminus)

    def amplitudes(self, r):
        return Amplitudes(self.params, self._p(r), self._m(r), r)


def gauss_radial(R: float, n: int = 4000):
    x, wx = np.polynomial.legendre.leggauss(n)
    return 0.5 * R * (x + 1), 0.5 * R * wx


def full_form_polar(cprof, modes_p, modes_m, R: float, nr: int = 3000, ntheta: int = 32) -> float:
    """Second-variation form of the vortex evaluated on a 2D polar tensor grid.

    ``modes_p`` / ``modes_m`` map an angular index m to a callable r -> (value, dvalue)
    of complex radial coefficients; the field is sum_m f_m(r) e^{i m theta}.
    """
    r, wr = gauss_radial(R, nr)
    theta = 2 * np.pi * np.arange(ntheta) / ntheta
    amp = cprof.amplitudes(r)
    p = cprof.params

    def synth(modes):
        f = np.zeros((r.size, ntheta), complex)
        fr = np.zeros_like(f)
        ft = np.zeros_like(f)
        for m, fn in modes.items():
            v, dv = fn(r)
            e = np.exp(1j * m * theta)[None, :]
            f += v[:, None] * e
            fr += dv[:, None] * e
            ft += 1j * m * v[:, None] * e
        return f, fr, ft

    fp, frp, ftp = synth(modes_p)
    fm, frm, ftm = synth(modes_m)
    e1 = np.exp(1j * theta)[None, :]
    wp = amp.Up[:, None] * e1
    wm = amp.Um[:, None] * e1
    inv_r2 = amp.inv_r2[:, None]
    dens = (
        _abs2(frp) + _abs2(frm) + inv_r2 * (_abs2(ftp) + _abs2(ftm))
        + amp.Pp[:, None] * _abs2(fp) + amp.Pm[:, None] * _abs2(fm)
        + 2 * p.Aplus * np.real(np.conj(wp) * fp) ** 2
        + 2 * p.Aminus * np.real(np.conj(wm) * fm) ** 2
        + 4 * p.B * np.real(fp * np.conj(wp)) * np.real(fm * np.conj(wm))
    )
    return float(np.sum(dens * (wr * r)[:, None]) * (2 * np.pi / ntheta))


def mode_forms_radial(cprof, phi1, pair, R: float, nr: int = 3000) -> dict:
    """B0(phi1) and B1(phi2, phi0) by radial Gauss quadrature.

    ``phi1`` = (plus, minus) callables for the e^{i theta} coefficient; ``pair`` =
    ((phi2+, phi2-), (phi0+, phi0-)) callables for the e^{2 i theta} and constant ones.
    """
    r, wr = gauss_radial(R, nr)
    amp = cprof.amplitudes(r)
    (v1p, d1p), (v1m, d1m) = phi1[0](r), phi1[1](r)
    b0 = B0_grad({"p": d1p, "m": d1m}, amp) + B0_zero({"p": v1p, "m": v1m}, amp)
    (a_p, da_p), (a_m, da_m) = pair[0][0](r), pair[0][1](r)
    (b_p, db_p), (b_m, db_m) = pair[1][0](r), pair[1][1](r)
    b1 = Bk_grad({"ap": da_p, "am": da_m, "bp": db_p, "bm": db_m}, amp) + Bk_zero(
        {"ap": a_p, "am": a_m, "bp": b_p, "bm": b_m}, amp, 1
    )
    return {"B0": float(np.sum(b0 * wr * r)), "B1": float(np.sum(b1 * wr * r))}
