"""Mode-by-mode solution of the linearized equation L(psi) = h.

Both psi and h are stored through their radial coefficients in the basis

    mode 0:        e^{i theta} [ f1 + i f2 ]
    mode (j, 1):   e^{i theta} [ f1 sin(j theta) + i f2 cos(j theta) ]
    mode (j, 2):   e^{i theta} [ f1 cos(j theta) + i f2 sin(j theta) ]

one pair (f1, f2) per component, laid out as columns (f1+, f2+, f1-, f2-).  Mode 0 is
keyed (0, 0).  Each mode is solved with the discrete form of the matching angular
sector, so the energy identity B(psi, psi) = <h, psi> holds to rounding:

- mode 0 in phase variables psi = i w chi, with chi_1 from the cumulative
  (variation of parameters) formula and chi_2 from a banded solve;
- mode 1 through the D form, constrained orthogonal to the translation direction
  by bordering (two banded solves and one multiplier);
- modes j >= 2 through the phase-transformed form, which is coercive.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, OrthogonalityError, SingularOperatorError
from .numerics import RadialGrid, banded_solve, edge_stiffness, quadrature_rule
from .profile import VortexProfile
from .spectrum import ModeForm, _assemble_M, _require_11, assemble_B0, assemble_D, build_kernel_basis

GATE = 1e-6
COEFF_KEYS = ("h11p", "h12p", "h11m", "h12m")


# --------------------------------------------------------------------------- data


@dataclass
class RhsData:
    """Right-hand side as a finite set of mode coefficient arrays of shape (nodes, 4)."""

    sigma: float
    modes: dict
    grid: RadialGrid | None = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        clean = {}
        for (j, ell), arr in self.modes.items():
            _check_key(j, ell)
            a = np.asarray(arr, dtype=float)
            if a.ndim != 2 or a.shape[1] != 4:
                raise DomainError(f"mode ({j}, {ell}) coefficients must have shape (nodes, 4)")
            if not np.all(np.isfinite(a)):
                raise DomainError(f"mode ({j}, {ell}) coefficients are not finite")
            clean[(int(j), int(ell))] = a
        self.modes = clean

    def scaled(self, alpha: float) -> "RhsData":
        return RhsData(self.sigma, {k: alpha * v for k, v in self.modes.items()}, self.grid)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "grid": self.grid.metadata() if self.grid is not None else None,
            "modes": [
                {"j": j, "ell": ell, "coeffs": {k: [float(x) for x in arr[:, c]] for c, k in enumerate(COEFF_KEYS)}}
                for (j, ell), arr in sorted(self.modes.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, grid: RadialGrid | None = None) -> "RhsData":
        modes = {}
        for m in d["modes"]:
            modes[(m["j"], m["ell"])] = np.column_stack([np.asarray(m["coeffs"][k], dtype=float) for k in COEFF_KEYS])
        return cls(float(d.get("sigma", 1.0)), modes, grid)


def _check_key(j, ell):
    if int(j) != j or j < 0:
        raise DomainError(f"mode index j must be a nonnegative integer, got {j}")
    if j == 0 and ell != 0:
        raise DomainError("mode 0 is keyed (0, 0)")
    if j > 0 and ell not in (1, 2):
        raise DomainError(f"ell must be 1 or 2 for j >= 1, got {ell}")


def write_rhs_json(h: RhsData, path) -> None:
    with open(path, "w") as fh:
        json.dump(h.to_dict(), fh)


def read_rhs_json(path, grid: RadialGrid | None = None) -> RhsData:
    with open(path) as fh:
        return RhsData.from_dict(json.load(fh), grid)


def project_separable(grid: RadialGrid, radial_plus, radial_minus, angular: dict, sigma: float = 1.0,
                      jmax: int | None = None) -> RhsData:
    """Mode coefficients of h±(r, theta) = radial±(r) * sum_m c_m e^{i m theta}.

    ``angular`` maps integer frequencies m to complex weights.  The projection uses a
    discrete Fourier transform in theta with enough points to be exact.
    """
    freqs = [int(m) for m in angular]
    top = max(abs(m - 1) for m in freqs)
    jmax = top if jmax is None else jmax
    nth = 4 * (top + 2)
    theta = 2 * np.pi * np.arange(nth) / nth
    ang = sum(complex(c) * np.exp(1j * m * theta) for m, c in angular.items())
    g_ang = ang * np.exp(-1j * theta)
    re, im = g_ang.real, g_ang.imag
    coef = {}
    for j in range(jmax + 1):
        cj, sj = np.cos(j * theta), np.sin(j * theta)
        norm = 1.0 / nth if j == 0 else 2.0 / nth
        coef[j] = tuple(norm * float(np.sum(x * y)) for x, y in ((re, cj), (re, sj), (im, cj), (im, sj)))
    r = grid.nodes
    fp = np.asarray(radial_plus(r), dtype=complex)
    fm = np.asarray(radial_minus(r), dtype=complex)

    modes = {}
    for j, (rc, rs, ic, is_) in coef.items():
        if j == 0:
            cols = []
            for F in (fp, fm):
                z = F * (rc + 1j * ic)
                cols += [z.real, z.imag]
            arr = np.column_stack(cols)
            if np.any(arr):
                modes[(0, 0)] = arr
            continue
        # g = F (Re g_ang + i Im g_ang); the real part of g multiplies sin (ell=1) or cos (ell=2)
        for ell in (1, 2):
            cols = []
            for F in (fp, fm):
                # Re(F g) = Fr Re g - Fi Im g ; Im(F g) = Fr Im g + Fi Re g
                if ell == 1:
                    c1 = F.real * rs - F.imag * is_
                    c2 = F.real * ic + F.imag * rc
                else:
                    c1 = F.real * rc - F.imag * ic
                    c2 = F.real * is_ + F.imag * rs
                cols += [c1, c2]
            arr = np.column_stack(cols)
            if np.any(arr):
                modes[(j, ell)] = arr
    return RhsData(sigma, modes, grid)


@dataclass
class Mode0Solution:
    chi1plus: np.ndarray
    chi1minus: np.ndarray
    chi2plus: np.ndarray
    chi2minus: np.ndarray
    psi: np.ndarray
    chi1_residual: float
    chi1_direct_gap: float
    provenance: dict = field(default_factory=lambda: {"chi1": "closed-form", "chi2": "banded-solve"})


@dataclass
class ModeSolution:
    j: int
    ell: int
    psi: np.ndarray
    Hnorm_contribution: float
    energy: float
    pairing: float
    multiplier: float = 0.0

    @property
    def energy_gap(self) -> float:
        return abs(self.energy - self.pairing) / max(abs(self.pairing), 1e-300)


@dataclass
class FredholmReport:
    orthogonality: dict
    gate: float
    modes: list
    Hnorm_psi: float
    weighted_hnorm: float
    ratio: float
    sigma: float

    def as_dict(self) -> dict:
        return {
            "orthogonality": self.orthogonality,
            "gate": self.gate,
            "modes": self.modes,
            "Hnorm_psi": self.Hnorm_psi,
            "weighted_hnorm": self.weighted_hnorm,
            "ratio": self.ratio,
            "sigma": self.sigma,
        }


# --------------------------------------------------------------------------- mode transforms

# mode 1 coefficients (a, b) -> D-form fields (phi2, phi0); T^{-1} = 2 T^T
_T = {
    1: np.array([[-0.5, 0.5], [0.5, 0.5]]),
    2: np.array([[-0.5, -0.5], [0.5, -0.5]]),
}


def _to_D(x: np.ndarray, ell: int) -> np.ndarray:
    """(a+, b+, a-, b-) columns -> (phi2+, phi2-, phi0+, phi0-)."""
    T = _T[ell]
    yp = x[:, [0, 1]] @ T.T
    ym = x[:, [2, 3]] @ T.T
    return np.column_stack([yp[:, 0], ym[:, 0], yp[:, 1], ym[:, 1]])


def _from_D(y: np.ndarray, ell: int) -> np.ndarray:
    """Inverse of :func:`_to_D`."""
    Tinv = 2 * _T[ell].T
    xp = np.column_stack([y[:, 0], y[:, 2]]) @ Tinv.T
    xm = np.column_stack([y[:, 1], y[:, 3]]) @ Tinv.T
    return np.column_stack([xp[:, 0], xp[:, 1], xm[:, 0], xm[:, 1]])


def _D_load(f: np.ndarray, ell: int) -> np.ndarray:
    """Load vector in D variables for the pairing f . x with x = 2 T^T y."""
    T = _T[ell]
    gp = f[:, [0, 1]] @ T.T
    gm = f[:, [2, 3]] @ T.T
    return np.column_stack([gp[:, 0], gm[:, 0], gp[:, 1], gm[:, 1]])


def _phase_to_psi(V: np.ndarray, Up, Um) -> np.ndarray:
    """(V1+, V2+, V1-, V2-) -> psi coefficients (f1+, f2+, f1-, f2-) with psi = i w V."""
    return np.column_stack([-Up * V[:, 1], Up * V[:, 0], -Um * V[:, 3], Um * V[:, 2]])


def _psi_to_phase(psi: np.ndarray, Up, Um) -> np.ndarray:
    out = np.zeros_like(psi)
    sp_, sm_ = Up > 0, Um > 0
    out[sp_, 0] = psi[sp_, 1] / Up[sp_]
    out[sp_, 1] = -psi[sp_, 0] / Up[sp_]
    out[sm_, 2] = psi[sm_, 3] / Um[sm_]
    out[sm_, 3] = -psi[sm_, 2] / Um[sm_]
    return out


def _phase_load(f: np.ndarray, Up, Um) -> np.ndarray:
    """Load in phase variables for the pairing f . psi with psi = i w V."""
    return np.column_stack([Up * f[:, 1], -Up * f[:, 0], Um * f[:, 3], -Um * f[:, 2]])


def _b0_order(x):
    # (f1+, f2+, f1-, f2-) <-> (Re+, Re-, Im+, Im-)
    return x[:, [0, 2, 1, 3]]


def _translation_direction(profile: VortexProfile, ell: int) -> np.ndarray:
    """Mode-1 coefficients of the translation derivative paired with parity ``ell``."""
    kb = build_kernel_basis(profile)
    s = 1.0 if ell == 1 else -1.0
    return np.column_stack([kb.zetaplus, s * kb.etaplus, kb.zetaminus, s * kb.etaminus])


# --------------------------------------------------------------------------- forward operator


def mode_weight(j: int) -> float:
    """Angular integral of a product of two same-mode basis functions (2 pi or pi)."""
    return 2 * math.pi if j == 0 else math.pi


def _form_for(profile, j, ell):
    if j == 0:
        return assemble_B0(profile)
    if j == 1:
        return assemble_D(profile)
    return _assemble_M(profile, j, ell)


def apply_L_mode(profile: VortexProfile, j: int, ell: int, psi, form: ModeForm | None = None) -> np.ndarray:
    """Radial coefficients of L(psi) for a single mode (strong form of the discrete operator).

    Entries where the lumped weight vanishes (and, for j >= 2, where U vanishes) are 0.
    """
    _check_key(j, ell)
    psi = np.asarray(psi, dtype=float)
    form = form or _form_for(profile, j, ell)
    w = quadrature_rule(profile.grid).weights
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    pos = w > 0

    def strong(fields):
        Kv = form.expand(form.K.matvec(form.restrict(fields)))
        out = np.zeros_like(Kv)
        out[pos] = Kv[pos] / w[pos, None]
        return out

    if j == 0:
        g = strong(_b0_order(psi))
        return _b0_order(g)
    if j == 1:
        gy = strong(_to_D(psi, ell))
        # pairing 2 y.K_D.T x~ -> load 2 T^T (K_D y)
        T2 = 2 * _T[ell].T
        gp = np.column_stack([gy[:, 0], gy[:, 2]]) @ T2.T
        gm = np.column_stack([gy[:, 1], gy[:, 3]]) @ T2.T
        return np.column_stack([gp[:, 0], gp[:, 1], gm[:, 0], gm[:, 1]])
    gV = strong(_psi_to_phase(psi, Up, Um))
    out = np.zeros_like(gV)
    sp_, sm_ = Up > 0, Um > 0
    out[sp_, 1] = gV[sp_, 0] / Up[sp_]
    out[sp_, 0] = -gV[sp_, 1] / Up[sp_]
    out[sm_, 3] = gV[sm_, 2] / Um[sm_]
    out[sm_, 2] = -gV[sm_, 3] / Um[sm_]
    return out


# --------------------------------------------------------------------------- norms and pairings


def pairing(profile: VortexProfile, j: int, a, b) -> float:
    """<a, b> of two single-mode fields given by coefficient arrays."""
    w = quadrature_rule(profile.grid).weights
    return mode_weight(j) * float(np.sum(w[:, None] * np.asarray(a) * np.asarray(b)))


def weighted_norm2(profile: VortexProfile, j: int, h, sigma: float) -> float:
    """int |h|^2 (1 + r^{2+sigma}) over the plane for one mode."""
    r = profile.grid.nodes
    w = quadrature_rule(profile.grid).weights * (1 + r ** (2 + sigma))
    return mode_weight(j) * float(np.sum(w[:, None] * np.asarray(h) ** 2))


def H_norm2(profile: VortexProfile, j: int, ell: int, psi) -> float:
    """Natural norm squared of one mode: Dirichlet energy plus the (t^2 - U^2) weighted mass."""
    g = profile.grid
    w = quadrature_rule(g).weights
    k = edge_stiffness(g)
    r = g.nodes
    inv_r2 = np.zeros_like(r)
    inv_r2[1:] = 1.0 / r[1:] ** 2
    rho_p, rho_m = _mass_density(profile)
    psi = np.asarray(psi, dtype=float)
    total = 0.0
    for (c1, c2), rho in (((0, 1), rho_p), ((2, 3), rho_m)):
        a, b = psi[:, c1], psi[:, c2]
        grad = float(k @ (np.diff(a) ** 2 + np.diff(b) ** 2))
        if j == 0:
            cent = a**2 + b**2
            total += 2 * math.pi * (grad + float(w @ ((cent * inv_r2) + rho * (a**2 + b**2))))
            continue
        hi, lo = (b - a, a + b) if ell == 1 else (a + b, a - b)
        cent = ((1 + j) ** 2 * hi**2 + (1 - j) ** 2 * lo**2) / 4
        total += math.pi * (grad + float(w @ (cent * inv_r2 + rho * (a**2 + b**2))))
    return total


def check_orthogonality(h: RhsData, profile: VortexProfile, basis=None) -> dict:
    """|<h, i w>|, |<h, dw/dx1>|, |<h, dw/dx2>| from the mode-0 and mode-1 coefficients."""
    _require_11(profile)
    w = quadrature_rule(profile.grid).weights
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    out = {"iw": 0.0, "dx1": 0.0, "dx2": 0.0}
    h0 = h.modes.get((0, 0))
    if h0 is not None:
        out["iw"] = abs(2 * math.pi * float(w @ (h0[:, 1] * Up + h0[:, 3] * Um)))
    for ell, name in ((2, "dx1"), (1, "dx2")):
        h1 = h.modes.get((1, ell))
        if h1 is not None:
            Z = _translation_direction(profile, ell)
            out[name] = abs(math.pi * float(np.sum(w[:, None] * h1 * Z)))
    return out


def _gate_value(h: RhsData, profile) -> float:
    total = sum(weighted_norm2(profile, j, arr, h.sigma) for (j, _), arr in h.modes.items())
    return GATE * math.sqrt(total)


# --------------------------------------------------------------------------- mode solvers


def _solve_free(form: ModeForm, load_fields: np.ndarray) -> np.ndarray:
    return form.expand(banded_solve(form.K, form.restrict(load_fields)))


def solve_mode0(profile: VortexProfile, h0, sigma: float = 1.0, gate: float | None = None) -> Mode0Solution:
    """Mode 0 through psi = i w chi: chi_1 by cumulative quadrature, chi_2 by a banded solve."""
    _require_11(profile)
    h0 = np.asarray(h0, dtype=float)
    g = profile.grid
    w = quadrature_rule(g).weights
    k = edge_stiffness(g)
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    if gate is not None:
        iw = abs(2 * math.pi * float(w @ (h0[:, 1] * Up + h0[:, 3] * Um)))
        if iw > gate:
            raise OrthogonalityError("iw", iw, gate)
    load = _phase_load(w[:, None] * h0, Up, Um)  # columns (chi1+, chi2+, chi1-, chi2-)
    chi1 = []
    for U, col in ((Up, 0), (Um, 2)):
        # flux through edge i+1/2 balances the load on nodes 0..i; chi(Rmax) = 0
        flux = -np.cumsum(load[:-1, col])
        kap = k * U[:-1] * U[1:]
        step = np.zeros_like(flux)
        nz = kap > 0
        step[nz] = flux[nz] / kap[nz]
        c = np.zeros(g.size)
        c[:-1] = -np.cumsum(step[::-1])[::-1]
        c[0] = c[1]
        chi1.append(c)
    M0 = _assemble_M(profile, 0, 1)
    V = _solve_free(M0, load)
    V[0] = V[1]
    res = []
    for c, U, col in ((chi1[0], Up, 0), (chi1[1], Um, 2)):
        flux = k * U[:-1] * U[1:] * np.diff(c)
        r_i = -(flux[1:] - flux[:-1]) - load[1:-1, col]
        res.append(float(np.abs(r_i).max()))
    gap = max(float(np.abs(V[:, 0] - chi1[0]).max()), float(np.abs(V[:, 2] - chi1[1]).max()))
    Vfull = np.column_stack([chi1[0], V[:, 1], chi1[1], V[:, 3]])
    psi = _phase_to_psi(Vfull, Up, Um)
    return Mode0Solution(chi1[0], chi1[1], V[:, 1], V[:, 3], psi, max(res), gap)


def _mass_density(profile):
    p = profile.params
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    rho_p = p.Aplus * (p.tplus**2 - Up**2) - p.B * (p.tminus**2 - Um**2)
    rho_m = p.Aminus * (p.tminus**2 - Um**2) - p.B * (p.tplus**2 - Up**2)
    return rho_p, rho_m


def _constraint_vector(profile, ell):
    """Weighted translation direction defining the mode-1 constraint <psi, Z0>_* = 0."""
    rho_p, rho_m = _mass_density(profile)
    w = quadrature_rule(profile.grid).weights
    rho = np.column_stack([rho_p, rho_p, rho_m, rho_m])
    return w[:, None] * rho * _translation_direction(profile, ell)


def solve_mode1(profile: VortexProfile, h1, ell: int = 1, gate: float | None = None) -> ModeSolution:
    """Minimize the mode-1 energy subject to <psi, Z0>_* = 0 (bordered banded solve)."""
    _require_11(profile)
    if ell not in (1, 2):
        raise DomainError(f"ell must be 1 or 2, got {ell}")
    h1 = np.asarray(h1, dtype=float)
    w = quadrature_rule(profile.grid).weights
    Z = _translation_direction(profile, ell)
    if gate is not None:
        res = abs(math.pi * float(np.sum(w[:, None] * h1 * Z)))
        if res > gate:
            raise OrthogonalityError("dx2" if ell == 1 else "dx1", res, gate)
    D = assemble_D(profile)
    f = w[:, None] * h1
    c = _constraint_vector(profile, ell)
    gy = D.restrict(_D_load(f, ell))
    cy = D.restrict(_D_load(c, ell))
    rhs = np.column_stack([gy, cy])
    sol = banded_solve(D.K, rhs)
    y1, y2 = sol[:, 0], sol[:, 1]
    denom = float(cy @ y2)
    if denom == 0 or not math.isfinite(denom):
        raise SingularOperatorError(-1, denom)
    mu = float(cy @ y1) / denom
    y = y1 - mu * y2
    psi = _from_D(D.expand(y), ell)
    return _make_solution(profile, 1, ell, psi, h1, mu)


def solve_modek(profile: VortexProfile, j: int, ell: int, hj) -> ModeSolution:
    """Coercive banded solve for a mode j >= 2 in phase variables."""
    _require_11(profile)
    if int(j) != j or j < 2:
        raise DomainError(f"solve_modek needs j >= 2, got {j}")
    if ell not in (1, 2):
        raise DomainError(f"ell must be 1 or 2, got {ell}")
    hj = np.asarray(hj, dtype=float)
    w = quadrature_rule(profile.grid).weights
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    M = _assemble_M(profile, int(j), ell)
    V = _solve_free(M, _phase_load(w[:, None] * hj, Up, Um))
    return _make_solution(profile, int(j), ell, _phase_to_psi(V, Up, Um), hj)


def _mode_energy(profile, j, ell, psi) -> float:
    """B(psi, psi) for a single mode via its discrete form."""
    form = _form_for(profile, j, ell)
    if j == 0:
        return mode_weight(0) * form.value(_b0_order(psi))
    if j == 1:
        return mode_weight(1) * 2 * form.value(_to_D(psi, ell))
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    return mode_weight(j) * form.value(_psi_to_phase(psi, Up, Um))


def _make_solution(profile, j, ell, psi, h, multiplier=0.0) -> ModeSolution:
    return ModeSolution(
        j, ell, psi, H_norm2(profile, j, ell, psi), _mode_energy(profile, j, ell, psi),
        pairing(profile, j, h, psi), multiplier,
    )


def kernel_direction(profile: VortexProfile, ell: int) -> np.ndarray:
    """Discrete near-kernel direction of mode 1: the response of the D form to the constraint.

    On a truncated grid this is the lowest D eigenvector approximation that the bordered
    solve removes; it tends to the translation field as Rmax grows.
    """
    D = assemble_D(profile)
    cy = D.restrict(_D_load(_constraint_vector(profile, ell), ell))
    return _from_D(D.expand(banded_solve(D.K, cy)), ell)


def project_kernel(profile: VortexProfile, psi, ell: int) -> np.ndarray:
    """Remove the discrete kernel component from mode-1 coefficients.

    The result satisfies the mode-1 constraint exactly, so two solutions of the same
    mode-1 problem agree after projection.
    """
    psi = np.asarray(psi, dtype=float)
    c = _constraint_vector(profile, ell)
    d = kernel_direction(profile, ell)
    return psi - (float(np.sum(c * psi)) / float(np.sum(c * d))) * d


def fredholm_solve(profile: VortexProfile, h: RhsData, check_gates: bool = True):
    """Solve every stored mode; returns (mode solutions, mode-0 solution or None, report)."""
    _require_11(profile)
    profile.params.require_attractive()
    for arr in h.modes.values():
        if arr.shape[0] != profile.grid.size:
            raise DomainError("rhs coefficients do not match the profile grid")
    gate = _gate_value(h, profile)
    orth = check_orthogonality(h, profile)
    if check_gates:
        for name in ("iw", "dx1", "dx2"):
            if orth[name] > gate:
                raise OrthogonalityError(name, orth[name], gate)
    sols, diag = [], []
    mode0 = None
    hn = 0.0
    wn = 0.0
    for (j, ell), hj in sorted(h.modes.items()):
        if j == 0:
            mode0 = solve_mode0(profile, hj, h.sigma)
            sol = _make_solution(profile, 0, 0, mode0.psi, hj)
        elif j == 1:
            sol = solve_mode1(profile, hj, ell)
        else:
            sol = solve_modek(profile, j, ell, hj)
        sols.append(sol)
        hn += sol.Hnorm_contribution
        wn += weighted_norm2(profile, j, hj, h.sigma)
        diag.append({
            "j": j, "ell": ell, "Hnorm2": sol.Hnorm_contribution, "energy": sol.energy,
            "pairing": sol.pairing, "energy_gap": sol.energy_gap if sol.pairing != 0 else 0.0,
            "multiplier": sol.multiplier,
        })
        if j == 0:
            diag[-1].update(chi1_residual=mode0.chi1_residual, chi1_direct_gap=mode0.chi1_direct_gap)
    ratio = hn / wn if wn > 0 else 0.0
    rep = FredholmReport(orth, gate, diag, hn, wn, ratio, h.sigma)
    return sols, mode0, rep


def write_solution_csv(sol: ModeSolution, grid: RadialGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["r", "psi11p", "psi12p", "psi11m", "psi12m"])
        for r, row in zip(grid.nodes, sol.psi):
            wr.writerow([format(r, ".17g"), *(format(x, ".17g") for x in row)])


def write_report_json(rep: FredholmReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(rep.as_dict(), fh, indent=1)
