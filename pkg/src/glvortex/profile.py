"""Radial vortex profiles of the coupled Ginzburg-Landau system.

The profile pair (U+, U-) solves

    -U'' - U'/r + n^2/r^2 U + [A (U^2 - t^2) + B (V^2 - s^2)] U = 0

for each component (V, s denoting the partner's amplitude and target), with
U(0) = 0 for nonzero degree, U'(0) = 0 otherwise, and U -> t at infinity.

The Laplacian is discretized in conservative form with the edge stiffness and lumped
r-weights from :mod:`glvortex.numerics`.  The same two ingredients assemble every
quadratic form in :mod:`glvortex.spectrum`, so the discrete profile is an exact
critical point of the discrete energy and the ground-state identities used there
hold up to the Newton residual.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, HypothesisError, NewtonDivergenceError, QualitativePropertyError
from .numerics import RadialGrid, build_grid, differentiate, edge_stiffness, quadrature_rule

MONOTONICITY_SLACK = 1e-8
MAX_NEWTON = 40
MAX_HALVINGS = 30
ROUNDOFF_ULPS = 16


@dataclass(frozen=True)
class PhysParams:
    Aplus: float
    Aminus: float
    B: float
    tplus: float
    tminus: float

    def __post_init__(self):
        if not (self.Aplus > 0 and self.Aminus > 0):
            raise HypothesisError("H1", f"A+ = {self.Aplus}, A- = {self.Aminus} must be positive")
        if not (self.tplus > 0 and self.tminus > 0):
            raise HypothesisError("H1", f"t+ = {self.tplus}, t- = {self.tminus} must be positive")
        if not self.B**2 < self.Aplus * self.Aminus:
            raise HypothesisError("H1", f"B^2 = {self.B**2} must be < A+ A- = {self.Aplus * self.Aminus}")

    @property
    def strictly_attractive(self) -> bool:
        return self.B < 0

    def require_attractive(self) -> None:
        if not self.strictly_attractive:
            raise HypothesisError("H2", f"B = {self.B} must be negative")

    def A(self, sign: int) -> float:
        return self.Aplus if sign > 0 else self.Aminus

    def t(self, sign: int) -> float:
        return self.tplus if sign > 0 else self.tminus

    def potentials(self, Up, Um):
        """Pair (P+, P-) of zeroth-order coefficients A(U^2 - t^2) + B(V^2 - s^2)."""
        dp = Up**2 - self.tplus**2
        dm = Um**2 - self.tminus**2
        return self.Aplus * dp + self.B * dm, self.Aminus * dm + self.B * dp

    def tail_coefficients(self, degrees: "DegreePair"):
        """Coefficients of U = t + c/(2 r^2) + O(r^-4) at infinity."""
        det = self.Aplus * self.Aminus - self.B**2
        npl, nmi = degrees.nplus**2, degrees.nminus**2
        cp = (self.B * nmi - self.Aminus * npl) / (det * self.tplus)
        cm = (self.B * npl - self.Aplus * nmi) / (det * self.tminus)
        return cp, cm

    def as_dict(self) -> dict:
        return {"Aplus": self.Aplus, "Aminus": self.Aminus, "B": self.B, "tplus": self.tplus, "tminus": self.tminus}

    def swapped(self) -> "PhysParams":
        return PhysParams(self.Aminus, self.Aplus, self.B, self.tminus, self.tplus)


@dataclass(frozen=True)
class DegreePair:
    nplus: int = 1
    nminus: int = 1

    def __post_init__(self):
        if int(self.nplus) != self.nplus or int(self.nminus) != self.nminus:
            raise DomainError("degrees must be integers")

    def as_dict(self) -> dict:
        return {"nplus": int(self.nplus), "nminus": int(self.nminus)}


@dataclass(frozen=True)
class VortexProfile:
    params: PhysParams
    degrees: DegreePair
    grid: RadialGrid
    Uplus: np.ndarray
    Uminus: np.ndarray
    dUplus: np.ndarray
    dUminus: np.ndarray
    newton_residual: float = math.nan
    iterations: int = 0

    def __post_init__(self):
        for name in ("Uplus", "Uminus", "dUplus", "dUminus"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (self.grid.size,):
                raise DomainError(f"{name} has shape {a.shape}, expected ({self.grid.size},)")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_amplitudes(cls, params, degrees, grid, Up, Um, **kw):
        return cls(params, degrees, grid, Up, Um, differentiate(Up, grid), differentiate(Um, grid), **kw)

    def U(self, sign: int) -> np.ndarray:
        return self.Uplus if sign > 0 else self.Uminus

    def dU(self, sign: int) -> np.ndarray:
        return self.dUplus if sign > 0 else self.dUminus

    def n(self, sign: int) -> int:
        return self.degrees.nplus if sign > 0 else self.degrees.nminus


@dataclass(frozen=True)
class TailFit:
    chat_plus_fit: float
    chat_minus_fit: float
    chat_plus_formula: float
    chat_minus_formula: float
    window: tuple
    relative_errors: tuple

    def as_dict(self) -> dict:
        return {
            "chat_plus_fit": self.chat_plus_fit,
            "chat_minus_fit": self.chat_minus_fit,
            "chat_plus_formula": self.chat_plus_formula,
            "chat_minus_formula": self.chat_minus_formula,
            "window": list(self.window),
            "relative_errors": list(self.relative_errors),
        }


@dataclass
class QualitativeReport:
    checks: list = field(default_factory=list)

    def add(self, name, passed, detail):
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failures(self) -> list:
        return [c["name"] for c in self.checks if not c["passed"]]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks}


# --------------------------------------------------------------------------- solver


def initial_guess(params: PhysParams, degrees: DegreePair, grid: RadialGrid) -> VortexProfile:
    r = grid.nodes
    amps = []
    for t, n in ((params.tplus, abs(degrees.nplus)), (params.tminus, abs(degrees.nminus))):
        amps.append(t * r**n / (r**2 + n) ** (n / 2) if n else np.full_like(r, t))
    return VortexProfile.from_amplitudes(params, degrees, grid, *amps)


def boundary_values(params: PhysParams, degrees: DegreePair, Rmax: float):
    cp, cm = params.tail_coefficients(degrees)
    return params.tplus + cp / (2 * Rmax**2), params.tminus + cm / (2 * Rmax**2)


class _Discretization:
    """Precomputed stencils for the profile equations on a fixed grid."""

    def __init__(self, grid: RadialGrid):
        r = grid.nodes
        self.grid = grid
        self.w = quadrature_rule(grid).weights
        self.k = edge_stiffness(grid)
        self.inner = slice(1, grid.N)
        with np.errstate(divide="ignore"):
            self.inv_r2 = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0) ** 2, 0.0)
        h0, h1 = grid.h[0], grid.h[1]
        # one-sided U'(0) = 0 row
        self.d0 = np.array([-(2 * h0 + h1) / (h0 * (h0 + h1)), (h0 + h1) / (h0 * h1), -h0 / (h1 * (h0 + h1))])

    def laplacian(self, U):
        """Strong-form -(1/r)(r U')' at interior nodes (full-length array, ends zero)."""
        k = self.k
        out = np.zeros_like(U)
        flux = k * np.diff(U)
        out[1:-1] = -(flux[1:] - flux[:-1]) / self.w[1:-1]
        return out


def _residual(disc, params, degrees, Up, Um, targets):
    P = params.potentials(Up, Um)
    res = []
    for sign, U, Pot, target in ((1, Up, P[0], targets[0]), (-1, Um, P[1], targets[1])):
        n2 = (degrees.nplus if sign > 0 else degrees.nminus) ** 2
        R = disc.laplacian(U) + (n2 * disc.inv_r2 + Pot) * U
        R[0] = U[0] if n2 else disc.d0 @ U[:3]
        R[-1] = U[-1] - target
        res.append(R)
    return res


def _roundoff_floor(disc, params, degrees, Up, Um):
    """Per-row size of the terms entering each residual row, times a few ulps.

    Near the origin of a graded grid the lumped weight is O(h0^2), so a row whose
    amplitude does not vanish there (degree 0) cannot be resolved below eps / h0^2.
    """
    k, w = disc.k, disc.w
    P = params.potentials(Up, Um)
    floors = []
    for sign, U, Pot in ((1, Up, P[0]), (-1, Um, P[1])):
        n2 = (degrees.nplus if sign > 0 else degrees.nminus) ** 2
        mag = np.zeros_like(U)
        aU = np.abs(U)
        mag[1:-1] = (
            (k[:-1] * (aU[:-2] + aU[1:-1]) + k[1:] * (aU[1:-1] + aU[2:])) / w[1:-1]
            + (n2 * disc.inv_r2[1:-1] + np.abs(Pot[1:-1])) * aU[1:-1]
        )
        mag[0] = aU[0] if n2 else np.abs(disc.d0) @ aU[:3]
        mag[-1] = aU[-1]
        floors.append(ROUNDOFF_ULPS * np.finfo(float).eps * mag)
    return floors


def _at_floor(R, floors) -> bool:
    return all(bool(np.all(np.abs(r) <= f)) for r, f in zip(R, floors))


def nonlinear_residual(profile: VortexProfile):
    """Discrete left-hand sides of both profile equations (boundary rows hold BC residuals)."""
    disc = _Discretization(profile.grid)
    targets = boundary_values(profile.params, profile.degrees, profile.grid.Rmax)
    return tuple(_residual(disc, profile.params, profile.degrees, profile.Uplus, profile.Uminus, targets))


def _jacobian(disc, params, degrees, Up, Um):
    n = disc.grid.size
    r_idx = np.arange(n)
    A, B = params.Aplus, params.Aminus
    P = params.potentials(Up, Um)
    rows, cols, vals = [], [], []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    k = disc.k
    w = disc.w
    inner = r_idx[1:-1]
    for c, (U, V, Pot, Aself, n_) in enumerate(
        ((Up, Um, P[0], A, degrees.nplus), (Um, Up, P[1], B, degrees.nminus))
    ):
        other = 1 - c
        n2 = n_**2
        diag = (k[inner - 1] + k[inner]) / w[inner] + n2 * disc.inv_r2[inner] + Pot[inner] + 2 * Aself * U[inner] ** 2
        put(2 * inner + c, 2 * inner + c, diag)
        put(2 * inner + c, 2 * (inner - 1) + c, -k[inner - 1] / w[inner])
        put(2 * inner + c, 2 * (inner + 1) + c, -k[inner] / w[inner])
        put(2 * inner + c, 2 * inner + other, 2 * params.B * U[inner] * V[inner])
        if n2:
            put(np.array([c]), np.array([c]), np.array([1.0]))
        else:
            put(np.full(3, c), 2 * np.arange(3) + c, disc.d0)
        last = 2 * (n - 1) + c
        put(np.array([last]), np.array([last]), np.array([1.0]))
    J = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n)
    )
    return J


def solve_profile(
    params: PhysParams,
    degrees: DegreePair = DegreePair(1, 1),
    grid: RadialGrid | None = None,
    tol: float = 1e-10,
    initial: VortexProfile | None = None,
    check: bool = True,
) -> VortexProfile:
    """Damped Newton solve of the coupled profile equations."""
    if not 1e-14 <= tol <= 1e-6:
        raise DomainError(f"tol must lie in [1e-14, 1e-6], got {tol}")
    if grid is None:
        grid = build_grid()
    disc = _Discretization(grid)
    targets = boundary_values(params, degrees, grid.Rmax)
    guess = initial if initial is not None else initial_guess(params, degrees, grid)
    Up = np.array(guess.Uplus, dtype=float)
    Um = np.array(guess.Uminus, dtype=float)
    Up[-1], Um[-1] = targets
    hi = (2 * params.tplus, 2 * params.tminus)

    def clamp(a, b):
        return np.clip(a, 0.0, hi[0]), np.clip(b, 0.0, hi[1])

    Up, Um = clamp(Up, Um)
    R = _residual(disc, params, degrees, Up, Um, targets)
    rnorm = max(np.abs(R[0]).max(), np.abs(R[1]).max())
    trace = [rnorm]
    it = 0
    while rnorm > tol:
        if it >= MAX_NEWTON:
            raise NewtonDivergenceError(f"Newton did not reach {tol:g} in {MAX_NEWTON} iterations", trace)
        it += 1
        J = _jacobian(disc, params, degrees, Up, Um)
        rhs = np.empty(2 * grid.size)
        rhs[0::2], rhs[1::2] = R
        step = spla.splu(J).solve(-rhs)
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = clamp(Up + lam * step[0::2], Um + lam * step[1::2])
            Rc = _residual(disc, params, degrees, *cand, targets)
            cnorm = max(np.abs(Rc[0]).max(), np.abs(Rc[1]).max())
            if cnorm <= (1 - 1e-4 * lam) * rnorm or cnorm <= tol:
                break
            lam *= 0.5
        else:
            # a stall is accepted only once every row is at its rounding floor
            if _at_floor(R, _roundoff_floor(disc, params, degrees, Up, Um)):
                break
            raise NewtonDivergenceError("step damping exhausted", trace)
        (Up, Um), R, rnorm = cand, Rc, cnorm
        trace.append(rnorm)
    prof = VortexProfile.from_amplitudes(params, degrees, grid, Up, Um, newton_residual=float(rnorm), iterations=it)
    if check:
        _enforce_invariants(prof)
    return prof


def _enforce_invariants(prof: VortexProfile) -> None:
    p = prof.params
    inner = slice(1, prof.grid.N)
    for sign, label in ((1, "+"), (-1, "-")):
        U = prof.U(sign)[inner]
        if U.min() <= 0:
            raise QualitativePropertyError("amplitude-bound", f"U{label} not positive at an interior node")
        if p.B <= 0 and U.max() > p.t(sign) * (1 + 1e-12):
            raise QualitativePropertyError("amplitude-bound", f"U{label} exceeds t{label}")
        if p.B < 0 and prof.dU(sign).min() < -MONOTONICITY_SLACK:
            raise QualitativePropertyError("monotonicity", f"U{label}' drops below -{MONOTONICITY_SLACK:g}")


# --------------------------------------------------------------------------- verification


def fit_tail(profile: VortexProfile, window: tuple | None = None) -> TailFit:
    """Least-squares fit of U - t against 1/(2 r^2) over ``window``."""
    R = profile.grid.Rmax
    lo, hi = window if window is not None else (R / 2, R)
    if lo < R / 2 - 1e-12 or hi > R + 1e-12 or lo >= hi:
        raise DomainError(f"window {lo, hi} must lie inside [Rmax/2, Rmax]")
    r = profile.grid.nodes
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 10:
        raise DomainError("tail window holds fewer than 10 nodes")
    x = 1.0 / (2 * r[sel] ** 2)
    fits = []
    for sign in (1, -1):
        y = profile.U(sign)[sel] - profile.params.t(sign)
        fits.append(float(x @ y / (x @ x)))
    formula = profile.params.tail_coefficients(profile.degrees)
    rel = tuple(
        float(abs(f - c) / abs(c)) if c != 0 else float(abs(f - c)) for f, c in zip(fits, formula)
    )
    return TailFit(fits[0], fits[1], float(formula[0]), float(formula[1]), (float(lo), float(hi)), rel)


def check_qualitative(profile: VortexProfile) -> QualitativeReport:
    """Boolean checks of the bounds, origin behavior, monotonicity and tail decay."""
    rep = QualitativeReport()
    p = profile.params
    r = profile.grid.nodes
    inner = slice(1, profile.grid.N)
    cpm = p.tail_coefficients(profile.degrees)
    for sign, label, chat in ((1, "+", cpm[0]), (-1, "-", cpm[1])):
        U, dU, t = profile.U(sign), profile.dU(sign), p.t(sign)
        n = abs(profile.n(sign))
        Ui = U[inner]
        ok = Ui.min() > 0 and (p.B > 0 or Ui.max() <= t * (1 + 1e-12))
        rep.add(f"amplitude-bound{label}", ok, {"min": float(Ui.min()), "max": float(Ui.max()), "t": t})

        dec = (r >= r[1]) & (r <= 10 * r[1])
        slope = float(np.polyfit(np.log(r[dec]), np.log(U[dec]), 1)[0])
        rep.add(f"origin-slope{label}", abs(slope - n) <= 0.1, {"slope": slope, "degree": n})

        if p.B < 0:
            rep.add(
                f"monotonicity{label}",
                dU.min() >= -MONOTONICITY_SLACK,
                {"min_dU": float(dU.min()), "slack": MONOTONICITY_SLACK},
            )

        R = profile.grid.Rmax
        win = (r >= R / 4) & (r <= R / 2)
        scaled = r[win] ** 3 * dU[win]
        if chat != 0:
            ratio = scaled / (-chat)
            ok = bool(np.all(ratio >= 0.5) and np.all(ratio <= 2.0))
            detail = {"min_ratio": float(ratio.min()), "max_ratio": float(ratio.max())}
        else:
            ok = bool(np.abs(scaled).max() <= 1e-6)
            detail = {"max_r3_dU": float(np.abs(scaled).max())}
        rep.add(f"tail-decay{label}", ok, detail)
    return rep


# --------------------------------------------------------------------------- serialization

CSV_HEADER = ("r", "Uplus", "dUplus", "Uminus", "dUminus")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(profile: VortexProfile, path) -> None:
    cols = (profile.grid.nodes, profile.Uplus, profile.dUplus, profile.Uminus, profile.dUminus)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for row in zip(*cols):
            wr.writerow([_fmt(v) for v in row])


def read_csv(path) -> dict:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd))
        if header != CSV_HEADER:
            raise DomainError(f"unexpected profile CSV header {header}")
        data = np.array([[float(v) for v in row] for row in rd])
    return {name: data[:, i] for i, name in enumerate(CSV_HEADER)}


def profile_to_dict(profile: VortexProfile) -> dict:
    return {
        "params": profile.params.as_dict(),
        "degrees": profile.degrees.as_dict(),
        "grid": profile.grid.metadata(),
        "newton_residual": profile.newton_residual,
        "iterations": profile.iterations,
        "Uplus": [float(v) for v in profile.Uplus],
        "dUplus": [float(v) for v in profile.dUplus],
        "Uminus": [float(v) for v in profile.Uminus],
        "dUminus": [float(v) for v in profile.dUminus],
    }


def write_json(profile: VortexProfile, path) -> None:
    # json emits repr(float), the shortest string that round-trips exactly
    with open(path, "w") as fh:
        json.dump(profile_to_dict(profile), fh, indent=1, sort_keys=True)


def read_json(path) -> VortexProfile:
    with open(path) as fh:
        d = json.load(fh)
    g = d["grid"]
    grid = build_grid(g["Rmax"], g["N"], g["grading"])
    return VortexProfile(
        PhysParams(**d["params"]),
        DegreePair(**d["degrees"]),
        grid,
        np.array(d["Uplus"]),
        np.array(d["Uminus"]),
        np.array(d["dUplus"]),
        np.array(d["dUminus"]),
        newton_residual=d["newton_residual"],
        iterations=d["iterations"],
    )
