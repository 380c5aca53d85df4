"""Radial grids, r-weighted quadrature, finite differences and banded symmetric solvers.

Every other module works on the graded grid ``r_i = Rmax (i/N)**grading``.  The
discrete quadratic forms are built from two ingredients defined here:

* lumped r-weights ``w_i`` (trapezoid rule applied to ``r f(r)``), used both as the
  quadrature rule for ``int f r dr`` and as the diagonal mass matrix;
* edge stiffness ``r_{i+1/2} / h_i``, which integrates ``int f' g' r dr`` exactly for
  piecewise-linear interpolants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numba import njit

from .errors import DomainError, EigenConvergenceError, SingularOperatorError

TIKHONOV_FACTOR = 1e-14


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    Rmax: float
    N: int
    grading: float

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def size(self) -> int:
        return self.N + 1

    def metadata(self) -> dict:
        return {"Rmax": self.Rmax, "N": self.N, "grading": self.grading}


@dataclass(frozen=True)
class QuadratureRule:
    weights: np.ndarray


def build_grid(Rmax: float = 60.0, N: int = 4000, grading: float = 2.0) -> RadialGrid:
    """Graded grid on [0, Rmax] clustering nodes near the origin."""
    if not Rmax > 0:
        raise DomainError(f"Rmax must be positive, got {Rmax}")
    if int(N) != N or N < 16:
        raise DomainError(f"N must be an integer >= 16, got {N}")
    if grading < 1:
        raise DomainError(f"grading must be >= 1, got {grading}")
    N = int(N)
    nodes = Rmax * (np.arange(N + 1) / N) ** grading
    nodes[0] = 0.0
    nodes[-1] = Rmax
    h = np.diff(nodes)
    if np.any(h <= 0):
        raise DomainError("grid nodes are not strictly increasing")
    ratio = h[1:] / h[:-1]
    if ratio.max() > 3.0 + 1e-12 or ratio.min() < 1.0 / 3.0 - 1e-12:
        raise DomainError(f"mesh ratio {ratio.max():.3f} outside [1/3, 3]; lower the grading")
    nodes.setflags(write=False)
    return RadialGrid(nodes=nodes, Rmax=float(Rmax), N=N, grading=float(grading))


def quadrature_rule(grid: RadialGrid) -> QuadratureRule:
    r = grid.nodes
    h = grid.h
    cell = np.zeros_like(r)
    cell[:-1] += 0.5 * h
    cell[1:] += 0.5 * h
    w = r * cell
    w.setflags(write=False)
    return QuadratureRule(weights=w)


def edge_stiffness(grid: RadialGrid) -> np.ndarray:
    """Weights ``r_{i+1/2} / h_i`` with ``sum k_e (df_e)^2 = int f'^2 r dr`` for P1 fields."""
    return grid.midpoints / grid.h


def integrate(samples, rule: QuadratureRule) -> float:
    f = np.asarray(samples, dtype=float)
    if f.shape[0] != rule.weights.shape[0]:
        raise DomainError(f"expected {rule.weights.shape[0]} samples, got {f.shape[0]}")
    return float(rule.weights @ f)


def differentiate(samples, grid: RadialGrid) -> np.ndarray:
    """Second-order derivative on the nonuniform grid (one-sided at both ends)."""
    f = np.asarray(samples, dtype=float)
    r = grid.nodes
    if f.shape[0] != r.shape[0]:
        raise DomainError(f"expected {r.shape[0]} samples, got {f.shape[0]}")
    h = np.diff(r)
    df = np.empty_like(f)
    hm, hp = h[:-1], h[1:]
    df[1:-1] = (
        -hp / (hm * (hm + hp)) * f[:-2]
        + (hp - hm) / (hm * hp) * f[1:-1]
        + hm / (hp * (hm + hp)) * f[2:]
    )
    h0, h1 = h[0], h[1]
    df[0] = (
        -(2 * h0 + h1) / (h0 * (h0 + h1)) * f[0]
        + (h0 + h1) / (h0 * h1) * f[1]
        - h0 / (h1 * (h0 + h1)) * f[2]
    )
    g0, g1 = h[-1], h[-2]
    df[-1] = (
        (2 * g0 + g1) / (g0 * (g0 + g1)) * f[-1]
        - (g0 + g1) / (g0 * g1) * f[-2]
        + g0 / (g1 * (g0 + g1)) * f[-3]
    )
    return df


# --------------------------------------------------------------------------- banded


@njit(cache=True)
def _ldlt_banded(bands, guard, floor):
    # bands[d, j] holds A[j + d, j]; overwritten with L (unit diagonal) and D on row 0.
    bw = bands.shape[0] - 1
    n = bands.shape[1]
    for j in range(n):
        dj = bands[0, j] + guard
        for k in range(max(0, j - bw), j):
            l = bands[j - k, k]
            dj -= l * l * bands[0, k]
        if abs(dj) <= floor:
            return j, dj
        bands[0, j] = dj
        for i in range(j + 1, min(n, j + bw + 1)):
            s = bands[i - j, j]
            for k in range(max(0, i - bw), j):
                s -= bands[i - k, k] * bands[j - k, k] * bands[0, k]
            bands[i - j, j] = s / dj
    return -1, 0.0


@njit(cache=True)
def _ldlt_solve(fac, rhs):
    bw = fac.shape[0] - 1
    n = fac.shape[1]
    x = rhs.copy()
    m = x.shape[1]
    for i in range(n):
        for k in range(max(0, i - bw), i):
            l = fac[i - k, k]
            for c in range(m):
                x[i, c] -= l * x[k, c]
    for i in range(n):
        for c in range(m):
            x[i, c] /= fac[0, i]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, min(n, i + bw + 1)):
            l = fac[k - i, i]
            for c in range(m):
                x[i, c] -= l * x[k, c]
    return x


@dataclass
class BandedSym:
    """Symmetric matrix in lower band storage: ``bands[d, j] = K[j + d, j]``."""

    bands: np.ndarray
    _factor: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.bands = np.ascontiguousarray(self.bands, dtype=float)
        if self.bands.ndim != 2:
            raise DomainError("bands must be a 2-D array")

    @property
    def order(self) -> int:
        return self.bands.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.bands.shape[0] - 1

    @property
    def factorized(self) -> bool:
        return self._factor is not None

    @classmethod
    def from_dense(cls, A, bandwidth=None):
        A = np.asarray(A, dtype=float)
        if not np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max())):
            raise DomainError("matrix is not symmetric")
        n = A.shape[0]
        if bandwidth is None:
            nz = np.nonzero(A)
            bandwidth = int(np.max(np.abs(nz[0] - nz[1]))) if nz[0].size else 0
        bands = np.zeros((bandwidth + 1, n))
        for d in range(bandwidth + 1):
            bands[d, : n - d] = np.diagonal(A, -d)
        return cls(bands)

    @classmethod
    def from_sparse(cls, S):
        S = S.tocoo()
        n = S.shape[0]
        lower = S.row >= S.col
        d = (S.row - S.col)[lower]
        bw = int(d.max()) if d.size else 0
        bands = np.zeros((bw + 1, n))
        np.add.at(bands, (d, S.col[lower]), S.data[lower])
        return cls(bands)

    def to_dense(self) -> np.ndarray:
        n = self.order
        A = np.zeros((n, n))
        for d in range(self.bandwidth + 1):
            idx = np.arange(n - d)
            A[idx + d, idx] = self.bands[d, : n - d]
            A[idx, idx + d] = self.bands[d, : n - d]
        return A

    def entry(self, i: int, j: int) -> float:
        i, j = max(i, j), min(i, j)
        d = i - j
        return float(self.bands[d, j]) if d <= self.bandwidth else 0.0

    def set_entry(self, i: int, j: int, value: float) -> None:
        i, j = max(i, j), min(i, j)
        if i - j > self.bandwidth:
            raise DomainError("entry outside the stored band")
        self.bands[i - j, j] = value
        self._factor = None

    def add_to_diagonal(self, values) -> None:
        self.bands[0] += values
        self._factor = None

    def shifted(self, sigma: float, massweights) -> "BandedSym":
        """``K - sigma * diag(massweights)`` as a new matrix."""
        b = self.bands.copy()
        b[0] -= sigma * np.asarray(massweights, dtype=float)
        return BandedSym(b)

    def norm(self) -> float:
        """Infinity norm (maximum absolute row sum)."""
        n = self.order
        s = np.abs(self.bands[0]).copy()
        for d in range(1, self.bandwidth + 1):
            a = np.abs(self.bands[d, : n - d])
            s[d:] += a
            s[: n - d] += a
        return float(s.max()) if n else 0.0

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.order
        y = self.bands[0].reshape((n,) + (1,) * (x.ndim - 1)) * x
        for d in range(1, self.bandwidth + 1):
            b = self.bands[d, : n - d].reshape((n - d,) + (1,) * (x.ndim - 1))
            y[d:] += b * x[: n - d]
            y[: n - d] += b * x[d:]
        return y

    def quad(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.matvec(x))

    def factorize(self):
        if self._factor is None:
            scale = self.norm()
            floor = TIKHONOV_FACTOR * scale
            work = self.bands.copy()
            idx, piv = _ldlt_banded(work, 0.0, floor)
            guard = 0.0
            if idx >= 0:
                guard = floor
                work = self.bands.copy()
                idx, piv = _ldlt_banded(work, guard, 10.0 * floor)
                if idx >= 0:
                    raise SingularOperatorError(idx, piv)
            self._factor = (work, guard)
        return self._factor

    def inertia(self) -> int:
        """Number of negative pivots, i.e. of negative eigenvalues (Sylvester)."""
        work, _ = self.factorize()
        return int(np.count_nonzero(work[0] < 0))


def banded_solve(M: BandedSym, b) -> np.ndarray:
    """Solve ``M x = b`` by equilibrated banded LDL^T (no pivoting, Tikhonov guard on pivot underflow)."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != M.order:
        raise DomainError(f"rhs length {b.shape[0]} does not match order {M.order}")
    # symmetric diagonal equilibration keeps pivots of strongly graded rows away from the guard
    d = np.abs(M.bands[0])
    s = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 1.0)
    bands = M.bands.copy()
    n = M.order
    for k in range(M.bandwidth + 1):
        bands[k, : n - k] *= s[: n - k] * s[k:]
    fac, _ = BandedSym(bands).factorize()
    rhs = s[:, None] * b.reshape(n, -1)
    x = s[:, None] * _ldlt_solve(fac, rhs.copy())
    return x.reshape(b.shape)


def _auto_shift(K: BandedSym, m: np.ndarray) -> tuple:
    """A shift below the whole spectrum, found by walking down until the inertia is zero."""
    mmax = float(m.max()) if m.size else 1.0
    step = 1e-6 * K.norm() / mmax
    sigma = 0.0
    for _ in range(40):
        A = K.shifted(sigma, m)
        try:
            if A.inertia() == 0:
                return sigma, A
        except SingularOperatorError:
            pass
        sigma = -step
        step *= 4.0
    raise SingularOperatorError(-1, sigma)


def eig_smallest(
    K: BandedSym,
    massweights,
    count: int = 3,
    shift: float | None = None,
    tol: float = 1e-8,
    maxiter: int = 2000,
    seed: int = 0,
):
    """Algebraically smallest eigenpairs of ``K v = lam diag(m) v``.

    Subspace inverse iteration on ``(K - shift M)^{-1} M`` with Rayleigh-Ritz
    extraction; converged leading pairs are locked while the rest of the block keeps
    iterating.  ``shift`` must lie below the wanted eigenvalues; by default it is the
    largest of 0, -s, -4s, ... (s = 1e-6 |K| / max m) at which the shifted matrix has
    no negative pivots.  Rows with zero mass act as constraints (their eigenvalues are
    infinite).
    """
    m = np.asarray(massweights, dtype=float)
    n = K.order
    if m.shape != (n,):
        raise DomainError("massweights length does not match operator order")
    if np.any(m < 0):
        raise DomainError("massweights must be nonnegative")
    if not 1 <= count <= 6:
        raise DomainError("count must lie in 1..6")
    if shift is None:
        shift, A = _auto_shift(K, m)
    else:
        A = K.shifted(shift, m)
        A.factorize()
    knorm = K.norm()
    p = min(n, 2 * count + 6)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    last = np.inf
    locked = 0
    for it in range(1, maxiter + 1):
        Y = banded_solve(A, m[:, None] * X)
        Y, _ = np.linalg.qr(Y)
        KY = K.matvec(Y)
        Kp = Y.T @ KY
        Mp = Y.T @ (m[:, None] * Y)
        theta, S = scipy.linalg.eigh(0.5 * (Kp + Kp.T), 0.5 * (Mp + Mp.T))
        X = Y @ S
        KX = KY @ S
        R = KX - (m[:, None] * X) * theta
        res = np.linalg.norm(R[:, :count], axis=0)
        last = float(res.max())
        while locked < count and res[locked] <= tol * knorm:
            locked += 1
        if locked == count:
            return [(float(theta[i]), X[:, i].copy()) for i in range(count)]
    raise EigenConvergenceError(maxiter, last)
