import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from glvortex.errors import DomainError, SingularOperatorError
from glvortex.numerics import (
    BandedSym,
    banded_solve,
    build_grid,
    differentiate,
    edge_stiffness,
    eig_smallest,
    integrate,
    quadrature_rule,
)


def random_banded(n, bw, rng, shift=0.0):
    A = np.zeros((n, n))
    for d in range(bw + 1):
        v = rng.standard_normal(n - d)
        A += np.diag(v, d) + (np.diag(v, -d) if d else 0)
    return A + shift * np.eye(n)


def test_grid_shape_and_grading():
    g = build_grid(60.0, 100, 2.0)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 60.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[1] == pytest.approx(60.0 / 100**2)
    assert g.metadata() == {"Rmax": 60.0, "N": 100, "grading": 2.0}


@pytest.mark.parametrize("kw", [dict(Rmax=-1.0), dict(N=4), dict(N=10.5), dict(grading=0.5)])
def test_grid_rejects_bad_arguments(kw):
    with pytest.raises(DomainError):
        build_grid(**{"Rmax": 10.0, "N": 100, "grading": 2.0, **kw})


def test_quadrature_integrates_polynomials_exactly_enough():
    g = build_grid(10.0, 2000)
    rule = quadrature_rule(g)
    assert rule.weights[0] == 0.0
    # int_0^10 r^2 * r dr = 2500
    assert integrate(g.nodes**2, rule) == pytest.approx(2500.0, rel=1e-5)
    with pytest.raises(DomainError):
        integrate(np.ones(3), rule)


def test_edge_stiffness_is_exact_for_linear_fields():
    g = build_grid(5.0, 50)
    f = 3.0 * g.nodes
    # int_0^5 9 r dr = 112.5
    assert float(edge_stiffness(g) @ np.diff(f) ** 2) == pytest.approx(112.5, rel=1e-12)


def test_differentiate_second_order():
    errs = []
    for n in (200, 400):
        g = build_grid(3.0, n)
        errs.append(np.abs(differentiate(np.sin(g.nodes), g) - np.cos(g.nodes)).max())
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_banded_roundtrip_and_matvec(rng):
    A = random_banded(30, 3, rng)
    M = BandedSym.from_dense(A)
    assert M.bandwidth == 3
    np.testing.assert_allclose(M.to_dense(), A)
    x = rng.standard_normal(30)
    np.testing.assert_allclose(M.matvec(x), A @ x, atol=1e-12)
    assert M.quad(x) == pytest.approx(x @ A @ x)
    S = BandedSym.from_sparse(sp.csr_matrix(A))
    np.testing.assert_allclose(S.to_dense(), A)


def test_banded_solve_matches_dense_on_indefinite_matrix(rng):
    A = random_banded(60, 4, rng, shift=0.5)
    b = rng.standard_normal((60, 2))
    x = banded_solve(BandedSym.from_dense(A), b)
    np.testing.assert_allclose(A @ x, b, atol=1e-8)


def test_inertia_counts_negative_eigenvalues(rng):
    A = random_banded(40, 2, rng, shift=1.0)
    M = BandedSym.from_dense(A)
    assert M.inertia() == int(np.sum(np.linalg.eigvalsh(A) < 0))


def test_singular_matrix_raises():
    A = np.zeros((5, 5))
    with pytest.raises(SingularOperatorError):
        BandedSym.from_dense(A).factorize()


def test_eig_smallest_matches_scipy(rng):
    n = 200
    main = 2.0 + rng.random(n)
    off = -np.ones(n - 1)
    A = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    m = 1.0 + rng.random(n)
    ref = scipy.linalg.eigh(A, np.diag(m), eigvals_only=True)[:3]
    got = eig_smallest(BandedSym.from_dense(A), m, count=3, tol=1e-10)
    np.testing.assert_allclose([lam for lam, _ in got], ref, rtol=1e-8, atol=1e-10)
    for lam, v in got:
        np.testing.assert_allclose(A @ v, lam * m * v, atol=1e-7 * np.abs(A).max())


def test_eig_smallest_handles_negative_spectrum(rng):
    A = random_banded(80, 2, rng)
    m = np.ones(80)
    ref = np.linalg.eigvalsh(A)[:2]
    got = eig_smallest(BandedSym.from_dense(A), m, count=2, tol=1e-10)
    np.testing.assert_allclose([lam for lam, _ in got], ref, rtol=1e-7, atol=1e-9)


def test_eig_smallest_rejects_bad_input():
    M = BandedSym.from_dense(np.eye(4))
    with pytest.raises(DomainError):
        eig_smallest(M, np.ones(3))
    with pytest.raises(DomainError):
        eig_smallest(M, -np.ones(4))
    with pytest.raises(DomainError):
        eig_smallest(M, np.ones(4), count=0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 40), bw=st.integers(0, 4), seed=st.integers(0, 10_000))
def test_banded_solve_property_spd(n, bw, seed):
    rng = np.random.default_rng(seed)
    B = random_banded(n, bw, rng)
    A = B @ B.T + n * np.eye(n)  # SPD with bandwidth 2 bw
    b = rng.standard_normal(n)
    x = banded_solve(BandedSym.from_dense(A), b)
    assert np.linalg.norm(A @ x - b) <= 1e-9 * np.linalg.norm(b) * np.linalg.cond(A)
