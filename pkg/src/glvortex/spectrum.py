"""Fourier-mode quadratic forms of the linearized operator and their spectra.

Every form handled here has the shape

    sum_f int g_f |phi_f'|^2 r dr + int phi^T Q(r) phi r dr

over a handful of real radial fields phi_f.  The gradient part is discretized with
the edge stiffness of :mod:`glvortex.numerics` (with ``g_f`` averaged onto edges, or
``U_i U_{i+1}`` for squared-amplitude weights) and the zeroth-order part with the
lumped r-weights.  Because the profile solver uses the same two ingredients, the
discrete translation and phase modes are near-kernels of the discrete forms up to
the O(h^2) error of the sampled derivatives.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, UnsupportedDegreeError
from .numerics import BandedSym, RadialGrid, differentiate, edge_stiffness, eig_smallest, quadrature_rule
from .profile import VortexProfile

# --------------------------------------------------------------------------- kernel basis


def _require_11(profile: VortexProfile) -> None:
    if (profile.degrees.nplus, profile.degrees.nminus) != (1, 1):
        raise UnsupportedDegreeError(
            f"degree pair ({profile.degrees.nplus}, {profile.degrees.nminus}) is not supported; need (1, 1)"
        )


def _over_r(U: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """U/r with the finite limit U'(0) at the origin."""
    r = grid.nodes
    out = np.empty_like(U)
    out[1:] = U[1:] / r[1:]
    out[0] = differentiate(U, grid)[0]
    return out


@dataclass(frozen=True)
class KernelBasis:
    """Sampled kernel directions of the degree-(1, 1) vortex."""

    Phi2plus: np.ndarray
    Phi2minus: np.ndarray
    Phi0plus: np.ndarray
    Phi0minus: np.ndarray
    etaplus: np.ndarray
    etaminus: np.ndarray
    zetaplus: np.ndarray
    zetaminus: np.ndarray

    @property
    def Z0(self):
        return (self.zetaplus, self.etaplus, self.zetaminus, self.etaminus)

    def D_fields(self) -> np.ndarray:
        """(Phi2+, Phi2-, Phi0+, Phi0-) stacked as columns, the field order of the D form."""
        return np.column_stack([self.Phi2plus, self.Phi2minus, self.Phi0plus, self.Phi0minus])


def build_kernel_basis(profile: VortexProfile) -> KernelBasis:
    _require_11(profile)
    g = profile.grid
    arrays = {}
    for sign, tag in ((1, "plus"), (-1, "minus")):
        zeta = np.array(profile.dU(sign))
        eta = _over_r(np.asarray(profile.U(sign)), g)
        eta[0] = zeta[0]
        arrays["eta" + tag] = eta
        arrays["zeta" + tag] = zeta
        arrays["Phi2" + tag] = 0.5 * (eta - zeta)
        arrays["Phi0" + tag] = 0.5 * (eta + zeta)
    for a in arrays.values():
        a.setflags(write=False)
    return KernelBasis(**arrays)


# --------------------------------------------------------------------------- generic forms


@dataclass(frozen=True)
class ModeForm:
    """A discretized radial quadratic form on ``fields_per_node`` real fields.

    Degrees of freedom are node-major (``node * m + field``); Dirichlet nodes are
    removed, so ``K`` acts on the free entries only.  ``free`` is the (nodes, m)
    boolean mask of retained unknowns.
    """

    kind: str
    k_or_j: int
    field_names: tuple
    K: BandedSym
    massweights: np.ndarray
    free: np.ndarray
    grid: RadialGrid
    bc: dict = field(default_factory=dict)
    ell: int = 0

    @property
    def fields_per_node(self) -> int:
        return len(self.field_names)

    @property
    def order(self) -> int:
        return self.K.order

    def restrict(self, fields) -> np.ndarray:
        """Free-dof vector from a (nodes, m) array of field samples."""
        F = np.asarray(fields, dtype=float)
        if F.shape != self.free.shape:
            raise DomainError(f"fields must have shape {self.free.shape}, got {F.shape}")
        return F.reshape(-1)[self.free.reshape(-1)]

    def expand(self, vec) -> np.ndarray:
        out = np.zeros(self.free.size)
        out[self.free.reshape(-1)] = vec
        return out.reshape(self.free.shape)

    def value(self, fields) -> float:
        """Quadratic form value; constrained entries of ``fields`` are ignored."""
        return self.K.quad(self.restrict(fields))

    def mass_norm2(self, fields) -> float:
        v = self.restrict(fields)
        return float(v @ (self.massweights * v))

    def apply(self, fields) -> np.ndarray:
        """Strong-form action K v / w on free entries (zero where the mass vanishes)."""
        v = self.restrict(fields)
        Kv = self.K.matvec(v)
        out = np.zeros_like(Kv)
        pos = self.massweights > 0
        out[pos] = Kv[pos] / self.massweights[pos]
        return self.expand(out)

    def smallest(self, count: int = 3, seed: int = 0, tol: float = 1e-8):
        """``count`` smallest generalized eigenpairs, eigenvectors expanded to fields."""
        pairs = eig_smallest(self.K, self.massweights, count=count, seed=seed, tol=tol)
        return [(lam, self.expand(v)) for lam, v in pairs]


def _edge_average(g: np.ndarray) -> np.ndarray:
    return 0.5 * (g[:-1] + g[1:])


def _edge_product(U: np.ndarray) -> np.ndarray:
    return U[:-1] * U[1:]


def assemble_form(
    grid: RadialGrid,
    edge_weights: np.ndarray,
    Q: np.ndarray,
    dirichlet_origin,
    kind: str,
    k_or_j: int,
    field_names,
    ell: int = 0,
) -> ModeForm:
    """Assemble from per-edge gradient weights (edges, m) and node matrices Q (nodes, m, m).

    ``Q`` is the integrand matrix; it is multiplied by the r-weights here.  Node 0 has
    zero r-weight, so singular centrifugal entries there never enter.
    """
    m = len(field_names)
    n = grid.size
    w = quadrature_rule(grid).weights
    k = edge_stiffness(grid)
    if edge_weights.shape != (n - 1, m) or Q.shape != (n, m, m):
        raise DomainError("coefficient arrays have inconsistent shapes")
    rows, cols, vals = [], [], []
    node = np.arange(n - 1)
    for f in range(m):
        s = k * edge_weights[:, f]
        a, b = node * m + f, (node + 1) * m + f
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        vals += [s, s, -s, -s]
    Qw = Q * w[:, None, None]
    ii = np.arange(n)
    for f in range(m):
        for g in range(m):
            rows.append(ii * m + f)
            cols.append(ii * m + g)
            vals.append(Qw[:, f, g])
    S = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * m, n * m)
    ).tocsr()
    free = np.ones((n, m), dtype=bool)
    free[-1, :] = False
    free[0, :] = ~np.asarray(dirichlet_origin, dtype=bool)
    idx = np.nonzero(free.reshape(-1))[0]
    S = S[idx][:, idx]
    S = 0.5 * (S + S.T)
    K = BandedSym.from_sparse(S)
    mass = np.repeat(w, m)[idx]
    bc = {
        "origin": ["dirichlet" if d else "natural" for d in dirichlet_origin],
        "outer": "dirichlet",
    }
    return ModeForm(kind, k_or_j, tuple(field_names), K, mass, free, grid, bc, ell)


def _inv_r2(grid: RadialGrid) -> np.ndarray:
    r = grid.nodes
    out = np.zeros_like(r)
    out[1:] = 1.0 / r[1:] ** 2
    return out


def _potentials(profile):
    return profile.params.potentials(np.asarray(profile.Uplus), np.asarray(profile.Uminus))


# --------------------------------------------------------------------------- named forms

B0_FIELDS = ("Re_plus", "Re_minus", "Im_plus", "Im_minus")
D_FIELDS = ("phi2_plus", "phi2_minus", "phi0_plus", "phi0_minus")
M_FIELDS = ("V1_plus", "V2_plus", "V1_minus", "V2_minus")


def assemble_B0(profile: VortexProfile) -> ModeForm:
    """Mode-one form on (Re phi+, Re phi-, Im phi+, Im phi-)."""
    p = profile.params
    g = profile.grid
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    Pp, Pm = _potentials(profile)
    c = _inv_r2(g)
    Q = np.zeros((g.size, 4, 4))
    Q[:, 0, 0] = c + Pp + 2 * p.Aplus * Up**2
    Q[:, 1, 1] = c + Pm + 2 * p.Aminus * Um**2
    Q[:, 0, 1] = Q[:, 1, 0] = 2 * p.B * Up * Um
    Q[:, 2, 2] = c + Pp
    Q[:, 3, 3] = c + Pm
    G = np.ones((g.size - 1, 4))
    return assemble_form(g, G, Q, [True] * 4, "B0", 0, B0_FIELDS)


def _pair_block(profile, n_hi: int, n_lo: int):
    """Node matrix of the real block (X+, X-, Y+, Y-) of the form on modes (n_hi, n_lo).

    The amplitude coupling acts on X + Y, which covers both the B_k real block and D
    (the latter after the sign flip phi2 -> -phi2 handled by the caller).
    """
    p = profile.params
    g = profile.grid
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    Pp, Pm = _potentials(profile)
    c = _inv_r2(g)
    Q = np.zeros((g.size, 4, 4))
    Q[:, 0, 0] = n_hi**2 * c + Pp
    Q[:, 1, 1] = n_hi**2 * c + Pm
    Q[:, 2, 2] = n_lo**2 * c + Pp
    Q[:, 3, 3] = n_lo**2 * c + Pm
    # A U^2 (X + Y)^2 per component and 2B U+U- (X+ + Y+)(X- + Y-)
    s_p = p.Aplus * Up**2
    s_m = p.Aminus * Um**2
    x = p.B * Up * Um
    plus, minus = (0, 2), (1, 3)
    for a in plus:
        for b in plus:
            Q[:, a, b] += s_p
    for a in minus:
        for b in minus:
            Q[:, a, b] += s_m
    for a in plus:
        for b in minus:
            Q[:, a, b] += x
            Q[:, b, a] += x
    return Q


def assemble_D(profile: VortexProfile) -> ModeForm:
    """Form D on (phi2+, phi2-, phi0+, phi0-), the imaginary part of the mode-(2, 0) pair."""
    g = profile.grid
    Q = _pair_block(profile, 2, 0)
    # D(phi2, phi0) is the real block evaluated at (-phi2, phi0)
    flip = np.array([-1.0, -1.0, 1.0, 1.0])
    Q = Q * flip[None, :, None] * flip[None, None, :]
    G = np.ones((g.size - 1, 4))
    return assemble_form(g, G, Q, [True, True, False, False], "D", 1, D_FIELDS)


def assemble_Bk(profile: VortexProfile, k: int) -> ModeForm:
    """Form B_k on 8 real fields: Re/Im of phi_{1+k}+-, then Re/Im of phi_{1-k}+-.

    Field order: (Re a+, Re a-, Re b+, Re b-, Im a+, Im a-, Im b+, Im b-) with
    a = phi_{1+k}, b = phi_{1-k}.  The imaginary block couples a^I - b^I.
    """
    if int(k) != k or k < 2:
        raise DomainError(f"assemble_Bk needs an integer k >= 2 (use assemble_D for k = 1), got {k}")
    g = profile.grid
    blk = _pair_block(profile, 1 + k, 1 - k)
    flip = np.array([1.0, 1.0, -1.0, -1.0])
    Q = np.zeros((g.size, 8, 8))
    Q[:, :4, :4] = blk
    Q[:, 4:, 4:] = blk * flip[None, :, None] * flip[None, None, :]
    G = np.ones((g.size - 1, 8))
    names = ("Re_a_plus", "Re_a_minus", "Re_b_plus", "Re_b_minus", "Im_a_plus", "Im_a_minus", "Im_b_plus", "Im_b_minus")
    # indices 1+k and 1-k are both nonzero for k >= 2
    return assemble_form(g, G, Q, [True] * 8, "Bk", int(k), names)


def assemble_Mform(profile: VortexProfile, j: int, ell: int) -> ModeForm:
    """Phase-transformed form on (V1+, V2+, V1-, V2-) for angular index j and parity ell."""
    if int(j) != j or j < 1:
        raise DomainError(f"j must be a positive integer, got {j}")
    if ell not in (1, 2):
        raise DomainError(f"ell must be 1 or 2, got {ell}")
    return _assemble_M(profile, int(j), ell)


def _assemble_M(profile: VortexProfile, j: int, ell: int) -> ModeForm:
    # j = 0 is the phase-transformed mode-one form used by the Fredholm solver
    p = profile.params
    g = profile.grid
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    c = _inv_r2(g)
    off = (-1) ** (ell + 1) * 2 * j
    Q = np.zeros((g.size, 4, 4))
    for base, U in ((0, Up), (2, Um)):
        Q[:, base, base] = Q[:, base + 1, base + 1] = j**2 * c * U**2
        Q[:, base, base + 1] = Q[:, base + 1, base] = off * c * U**2
    Q[:, 1, 1] += 2 * p.Aplus * Up**4
    Q[:, 3, 3] += 2 * p.Aminus * Um**4
    Q[:, 1, 3] = Q[:, 3, 1] = 2 * p.B * Up**2 * Um**2
    G = np.column_stack([_edge_product(Up)] * 2 + [_edge_product(Um)] * 2)
    # the squared-amplitude weight vanishes at the origin, so node 0 carries no energy
    return assemble_form(g, G, Q, [True] * 4, "Mform", j, M_FIELDS, ell=ell)


# --------------------------------------------------------------------------- Picone machinery


@dataclass(frozen=True)
class PiconeSystem:
    """Coefficients of F(u+, v+, u-, v-) written with the plain measure dr.

    Entries at the origin node are NaN: the 1/r coefficients are singular there and
    every test field handled here vanishes near r = 0.
    """

    r: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray

    def sign_structure(self) -> dict:
        inner = slice(1, self.r.size - 1)
        pos = all(bool(np.all(getattr(self, n)[inner] > 0)) for n in ("alpha1", "alpha2", "beta1", "beta2"))
        neg = {n: bool(np.all(getattr(self, n)[inner] < 0)) for n in ("b1", "b2", "b3")}
        return {"alpha_beta_positive": pos, **{f"{k}_negative": v for k, v in neg.items()}}


def build_picone_system(profile: VortexProfile) -> PiconeSystem:
    p = profile.params
    r = profile.grid.nodes
    Up, Um = np.asarray(profile.Uplus), np.asarray(profile.Uminus)
    Pp, Pm = _potentials(profile)
    inv = np.full_like(r, np.nan)
    inv[1:] = 1.0 / r[1:]
    half = r / 2
    arr = dict(
        r=r,
        alpha1=half, alpha2=half.copy(), beta1=half.copy(), beta2=half.copy(),
        a1=inv + 0.5 * Pp * r,
        a2=inv + 0.5 * Pm * r,
        d1=inv + 0.5 * Pp * r + p.Aplus * Up**2 * r,
        d2=inv + 0.5 * Pm * r + p.Aminus * Um**2 * r,
        b1=-inv, b2=-inv.copy(),
        b3=p.B * Up * Um * r,
    )
    arr["b3"][0] = np.nan
    for a in arr.values():
        a.setflags(write=False)
    return PiconeSystem(**arr)


def _second_order_flux(c_mid, u, grid):
    """-(c u')' at interior nodes from conservative differences (c sampled at midpoints)."""
    h = grid.h
    flux = c_mid * np.diff(u) / h
    out = np.zeros_like(u)
    out[1:-1] = -(flux[1:] - flux[:-1]) / (0.5 * (h[:-1] + h[1:]))
    return out


def translation_residual(profile: VortexProfile, kb: KernelBasis | None = None) -> np.ndarray:
    """Residuals of the four coupled ODEs satisfied by (eta+, zeta+, eta-, zeta-).

    Returned on nodes 2..N-2: the end values of the sampled derivative use one-sided
    stencils whose O(h^2) error the second difference would amplify back to O(1).
    """
    kb = kb or build_kernel_basis(profile)
    ps = build_picone_system(profile)
    g = profile.grid
    half_mid = g.midpoints / 2
    ep, em, zp, zm = kb.etaplus, kb.etaminus, kb.zetaplus, kb.zetaminus
    res = np.vstack([
        _second_order_flux(half_mid, ep, g) + ps.a1 * ep + ps.b1 * zp,
        _second_order_flux(half_mid, em, g) + ps.a2 * em + ps.b2 * zm,
        _second_order_flux(half_mid, zp, g) + ps.d1 * zp + ps.b1 * ep + ps.b3 * zm,
        _second_order_flux(half_mid, zm, g) + ps.d2 * zm + ps.b2 * em + ps.b3 * zp,
    ])
    return res[:, 2:-2]


@dataclass(frozen=True)
class KernelResidualReport:
    translation_max: float
    translation_per_equation: tuple
    D_interior_norm: float
    window: float
    h_max: float
    N: int
    Rmax: float

    @property
    def epsilon(self) -> float:
        """Near-zero threshold for the smallest eigenvalue of D."""
        return 10.0 * self.D_interior_norm

    def as_dict(self) -> dict:
        return {
            "translation_max": self.translation_max,
            "translation_per_equation": list(self.translation_per_equation),
            "D_interior_norm": self.D_interior_norm,
            "epsilon": self.epsilon,
            "window": self.window,
            "h_max": self.h_max,
            "N": self.N,
            "Rmax": self.Rmax,
        }


def D_interior_residual(profile: VortexProfile, fields, D: ModeForm | None = None, window: float = 0.8) -> float:
    """Mass-weighted norm of the strong action of D on ``fields`` over r <= window * Rmax."""
    D = D or assemble_D(profile)
    g = profile.grid
    res = D.apply(fields)
    w = quadrature_rule(g).weights
    sel = g.nodes <= window * g.Rmax
    return float(np.sqrt(np.sum(w[sel, None] * res[sel] ** 2)))


def kernel_residual(profile: VortexProfile, window: float = 0.8) -> KernelResidualReport:
    kb = build_kernel_basis(profile)
    res = translation_residual(profile, kb)
    per = tuple(float(np.abs(row).max()) for row in res)
    dres = D_interior_residual(profile, kb.D_fields(), window=window)
    g = profile.grid
    return KernelResidualReport(max(per), per, dres, window, float(g.h.max()), g.N, g.Rmax)


@dataclass
class PiconeReport:
    identity_max: float
    rows: list
    passed: bool
    tolerance: float

    def as_dict(self) -> dict:
        return {"identity_max": self.identity_max, "rows": self.rows, "passed": self.passed, "tolerance": self.tolerance}


def picone_identity_residual(u, du, eta, deta) -> np.ndarray:
    """Pointwise |(u')^2 - (u^2/eta)' eta' - (u' - u eta'/eta)^2| with the quotient rule."""
    u, du, eta, deta = (np.asarray(a, dtype=float) for a in (u, du, eta, deta))
    quot = 2 * u * du / eta - u**2 * deta / eta**2
    return np.abs(du**2 - quot * deta - (du - u * deta / eta) ** 2)


def picone_terms(profile: VortexProfile, quad, D: ModeForm | None = None, ps: PiconeSystem | None = None,
                 kb: KernelBasis | None = None) -> dict:
    """F, the right side of the Picone lower bound, and a magnitude scale for one quadruple.

    ``quad`` is a (nodes, 4) array of (u+, v+, u-, v-).  F is evaluated through the
    discrete D form with phi2 = (u - v)/2, phi0 = (u + v)/2.
    """
    D = D or assemble_D(profile)
    ps = ps or build_picone_system(profile)
    kb = kb or build_kernel_basis(profile)
    q = np.asarray(quad, dtype=float)
    up, vp, um, vm = q.T
    fields = np.column_stack([(up - vp) / 2, (um - vm) / 2, (up + vp) / 2, (um + vm) / 2])
    F = D.value(fields)
    g = profile.grid
    r = g.nodes
    dr = np.zeros_like(r)
    dr[1:] = quadrature_rule(g).weights[1:] / r[1:]
    inner = slice(1, g.N)
    ep, em, zp, zm = (np.asarray(a)[inner] for a in (kb.etaplus, kb.etaminus, kb.zetaplus, kb.zetaminus))
    sl = lambda a: np.asarray(a)[inner]
    b1, b2, b3 = sl(ps.b1), sl(ps.b2), sl(ps.b3)
    up_, vp_, um_, vm_ = sl(up), sl(vp), sl(um), sl(vm)
    rhs_density = (
        -b1 * (up_ * np.sqrt(zp / ep) - vp_ * np.sqrt(ep / zp)) ** 2
        - b2 * (um_ * np.sqrt(zm / em) - vm_ * np.sqrt(em / zm)) ** 2
        - b3 * (vp_ * np.sqrt(zm / zp) - vm_ * np.sqrt(zp / zm)) ** 2
    )
    rhs = float(dr[inner] @ rhs_density)
    du = np.column_stack([differentiate(c, g) for c in (up, vp, um, vm)])
    mag = (
        sl(ps.alpha1) * sl(du[:, 0]) ** 2 + sl(ps.beta1) * sl(du[:, 1]) ** 2
        + sl(ps.alpha2) * sl(du[:, 2]) ** 2 + sl(ps.beta2) * sl(du[:, 3]) ** 2
        + np.abs(sl(ps.a1)) * up_**2 + np.abs(sl(ps.d1)) * vp_**2
        + np.abs(sl(ps.a2)) * um_**2 + np.abs(sl(ps.d2)) * vm_**2
        + 2 * np.abs(b1 * up_ * vp_) + 2 * np.abs(b2 * um_ * vm_) + 2 * np.abs(b3 * vp_ * vm_)
    )
    scale = float(dr[inner] @ mag)
    return {"F": F, "rhs": rhs, "scale": scale}


def picone_certificate(profile: VortexProfile, testfields, tol: float = 1e-9, identity_tol: float = 1e-10,
                       guard: float | None = None) -> PiconeReport:
    """Check F >= RHS >= 0 and the pointwise Picone identities on each test quadruple.

    ``testfields`` is a sequence of (nodes, 4) arrays or of objects with ``values``
    and ``derivs`` attributes.  Every field must vanish for r <= ``guard`` (default:
    the first five grid nodes).
    """
    _require_11(profile)
    g = profile.grid
    r = g.nodes
    guard = r[5] if guard is None else guard
    D = assemble_D(profile)
    ps = build_picone_system(profile)
    kb = build_kernel_basis(profile)
    deta = [differentiate(a, g) for a in (kb.etaplus, kb.zetaplus, kb.etaminus, kb.zetaminus)]
    base = (kb.etaplus, kb.zetaplus, kb.etaminus, kb.zetaminus)
    rows = []
    ident_max = 0.0
    ok = True
    for idx, tf in enumerate(testfields):
        vals = np.asarray(getattr(tf, "values", tf), dtype=float)
        ders = getattr(tf, "derivs", None)
        if ders is None:
            ders = np.column_stack([differentiate(c, g) for c in vals.T])
        if np.any(vals[r <= guard] != 0):
            raise DomainError(f"test field {idx} does not vanish near the origin (r <= {guard:g})")
        sel = (np.abs(vals).sum(axis=1) > 0)
        sel[0] = False
        ident = 0.0
        for c in range(4):
            res = picone_identity_residual(vals[sel, c], ders[sel, c], base[c][sel], deta[c][sel])
            scale_c = max(1.0, float(np.max(ders[sel, c] ** 2)) if sel.any() else 1.0)
            ident = max(ident, float(res.max() / scale_c) if res.size else 0.0)
        t = picone_terms(profile, vals, D, ps, kb)
        good = t["F"] >= t["rhs"] - tol * t["scale"] and t["rhs"] >= -tol * t["scale"] and ident <= identity_tol
        ok &= bool(good)
        ident_max = max(ident_max, ident)
        rows.append({**t, "identity": ident, "passed": bool(good)})
    return PiconeReport(ident_max, rows, ok, tol)


# --------------------------------------------------------------------------- spectrum report


def cosine(a, b, weights) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(weights, dtype=float)[:, None]
    return float(abs(np.sum(w * a * b)) / np.sqrt(np.sum(w * a * a) * np.sum(w * b * b)))


@dataclass
class SpectrumReport:
    params: dict
    grid: dict
    eigenvalues: dict
    residuals: dict
    flags: dict
    diagnostics: dict
    vectors: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "grid": self.grid,
            "eigenvalues": self.eigenvalues,
            "residuals": self.residuals,
            "flags": self.flags,
            "diagnostics": self.diagnostics,
            "passed": self.passed,
        }


def _pair_residual(form: ModeForm, lam: float, fields) -> float:
    v = form.restrict(fields)
    return float(np.linalg.norm(form.K.matvec(v) - lam * form.massweights * v))


def spectrum_report(profile: VortexProfile, kmax: int = 5, count: int = 3, window: float = 0.8,
                    seed: int = 0) -> SpectrumReport:
    """Smallest eigenvalues of B0, D and B_k (k = 2..kmax) with the non-degeneracy flags."""
    _require_11(profile)
    profile.params.require_attractive()
    if int(kmax) != kmax or not 2 <= kmax <= 8:
        raise DomainError(f"kmax must be an integer in 2..8, got {kmax}")
    g = profile.grid
    kr = kernel_residual(profile, window)
    eigs, resid, vecs = {}, {}, {}
    forms = [("B0", assemble_B0(profile)), ("D", assemble_D(profile))]
    forms += [(f"B{k}", assemble_Bk(profile, k)) for k in range(2, kmax + 1)]
    for name, form in forms:
        pairs = form.smallest(count, seed=seed)
        eigs[name] = [lam for lam, _ in pairs]
        resid[name] = [_pair_residual(form, lam, v) for lam, v in pairs]
        vecs[name] = pairs[0][1]
    w = quadrature_rule(g).weights
    kb = build_kernel_basis(profile)
    target = kb.D_fields().copy()
    target[-1] = 0.0
    sel = g.nodes <= window * g.Rmax
    cos_window = cosine(vecs["D"][sel], target[sel], w[sel])
    cos_full = cosine(vecs["D"], target, w)
    lamD = eigs["D"][0]
    bk = [eigs[f"B{k}"][0] for k in range(2, kmax + 1)]
    flags = {
        "B0_nonnegative": eigs["B0"][0] >= -1e-8,
        "D_near_zero": -1e-8 <= lamD <= kr.epsilon,
        "D_eigvec_cosine": cos_window >= 0.99,
        "Bk_above_D": all(b > lamD for b in bk),
        "Bk_positive": all(b > 0 for b in bk),
        "Bk_increasing": all(b1 < b2 for b1, b2 in zip(bk, bk[1:])),
    }
    diagnostics = {
        "epsilon": kr.epsilon,
        "kernel_residual": kr.as_dict(),
        "D_cosine_window": cos_window,
        "D_cosine_full": cos_full,
        "cosine_window": window,
        "seed": seed,
    }
    return SpectrumReport(profile.params.as_dict(), g.metadata(), eigs, resid, flags, diagnostics, vecs)


def write_report_json(report: SpectrumReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=1, sort_keys=True)


def write_eigvec_csv(form_name: str, report: SpectrumReport, grid: RadialGrid, path, field_names=None) -> None:
    """Dump the lowest eigenvector of one form with header ``r,field1,...``."""
    V = report.vectors[form_name]
    names = field_names or [f"field{i + 1}" for i in range(V.shape[1])]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["r", *names])
        for r, row in zip(grid.nodes, V):
            wr.writerow([format(r, ".17g"), *(format(x, ".17g") for x in row)])
