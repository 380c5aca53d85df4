import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from glvortex.errors import DomainError, HypothesisError, UnsupportedDegreeError
from glvortex.numerics import build_grid
from glvortex.oracles import discrete_form_value
from glvortex.profile import DegreePair, PhysParams
from glvortex.spectrum import (
    assemble_B0,
    assemble_Bk,
    assemble_D,
    assemble_Mform,
    build_kernel_basis,
    build_picone_system,
    kernel_residual,
    picone_certificate,
    picone_identity_residual,
    spectrum_report,
    write_eigvec_csv,
    write_report_json,
)
from glvortex.testfields import random_bumps


def _forms(profile):
    return [
        assemble_B0(profile),
        assemble_D(profile),
        assemble_Bk(profile, 2),
        assemble_Bk(profile, 4),
        assemble_Mform(profile, 2, 1),
        assemble_Mform(profile, 3, 2),
    ]


def test_assembled_forms_match_discrete_calculus_oracle(small_profile, rng):
    n = small_profile.grid.size
    for form in _forms(small_profile):
        for _ in range(3):
            F = rng.standard_normal((n, form.fields_per_node))
            want = discrete_form_value(form, small_profile, F)
            assert form.value(F) == pytest.approx(want, rel=1e-11), form.kind


def test_assembled_forms_are_symmetric(small_profile):
    for form in _forms(small_profile):
        A = form.K.to_dense()
        assert np.abs(A - A.T).max() <= 1e-14 * np.abs(A).max()


def test_form_argument_validation(small_profile):
    with pytest.raises(DomainError):
        assemble_Bk(small_profile, 1)
    with pytest.raises(DomainError):
        assemble_Mform(small_profile, 0, 1)
    with pytest.raises(DomainError):
        assemble_Mform(small_profile, 2, 3)
    with pytest.raises(DomainError):
        assemble_B0(small_profile).value(np.zeros((3, 4)))


def test_kernel_basis_identities(small_profile):
    kb = build_kernel_basis(small_profile)
    np.testing.assert_allclose(kb.Phi2plus + kb.Phi0plus, kb.etaplus, atol=1e-15)
    np.testing.assert_allclose(kb.Phi0minus - kb.Phi2minus, kb.zetaminus, atol=1e-15)
    # eta = U/r and zeta = U' agree at the origin for a degree-one vortex
    assert kb.Phi2plus[0] == 0.0 and kb.Phi2minus[0] == 0.0


def test_B0_is_nonnegative(small_profile):
    lam = assemble_B0(small_profile).smallest(2)[0][0]
    assert lam >= -1e-8


def test_D_lowest_eigenvalue_matches_eigsh(small_profile):
    D = assemble_D(small_profile)
    ours = [lam for lam, _ in D.smallest(3, tol=1e-10)]
    K = sp.csc_matrix(D.K.to_dense())
    M = sp.diags(D.massweights).tocsc()
    ref = np.sort(eigsh(K, k=3, M=M, sigma=-1e-2, which="LM")[0])
    np.testing.assert_allclose(ours, ref, rtol=1e-7)


def test_translation_residual_is_second_order(ref_params):
    from glvortex.profile import solve_profile

    res = [kernel_residual(solve_profile(ref_params, grid=build_grid(30.0, n))).translation_max for n in (1000, 2000)]
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_D_annihilates_kernel_fields_in_the_interior(ref_profile):
    kr = kernel_residual(ref_profile)
    assert kr.D_interior_norm <= 1e-5
    assert kr.epsilon == pytest.approx(10 * kr.D_interior_norm)


def test_picone_system_sign_structure(small_profile):
    flags = build_picone_system(small_profile).sign_structure()
    assert all(flags.values()), flags


def test_picone_identity_pointwise(rng):
    r = np.linspace(1.0, 5.0, 200)
    u, du = np.sin(r), np.cos(r)
    eta, deta = 1 + r**2, 2 * r
    assert picone_identity_residual(u, du, eta, deta).max() <= 1e-13


def test_picone_certificate_on_random_bumps(small_profile, rng):
    fields = [random_bumps(small_profile.grid, 4, rng, 0.1, 0.7) for _ in range(5)]
    rep = picone_certificate(small_profile, fields)
    assert rep.passed
    assert rep.identity_max <= 1e-10
    assert all(row["F"] >= row["rhs"] >= 0 for row in rep.rows)


def test_picone_rejects_fields_at_the_origin(small_profile):
    bad = np.ones((small_profile.grid.size, 4))
    with pytest.raises(DomainError):
        picone_certificate(small_profile, [bad])


def test_spectrum_report_domain_checks(small_profile):
    with pytest.raises(DomainError):
        spectrum_report(small_profile, kmax=1)
    with pytest.raises(DomainError):
        spectrum_report(small_profile, kmax=9)
    repulsive = dataclasses.replace(small_profile, params=PhysParams(2.0, 1.0, 0.5, 1.0, 1.0))
    with pytest.raises(HypothesisError):
        spectrum_report(repulsive)
    other = dataclasses.replace(small_profile, degrees=DegreePair(1, 0))
    with pytest.raises(UnsupportedDegreeError):
        spectrum_report(other)


def test_spectrum_report_structure_and_outputs(small_profile, tmp_path):
    rep = spectrum_report(small_profile, kmax=3)
    assert set(rep.eigenvalues) == {"B0", "D", "B2", "B3"}
    assert rep.flags["B0_nonnegative"] and rep.flags["Bk_increasing"] and rep.flags["Bk_above_D"]
    assert rep.eigenvalues["B2"][0] < rep.eigenvalues["B3"][0]
    # eigenpair residuals are absolute; compare with the operator scale
    scale = assemble_D(small_profile).K.norm()
    assert max(max(v) for v in rep.residuals.values()) <= 1e-6 * scale
    write_report_json(rep, tmp_path / "s.json")
    write_eigvec_csv("D", rep, small_profile.grid, tmp_path / "d.csv", ["phi2p", "phi2m", "phi0p", "phi0m"])
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "r,phi2p,phi2m,phi0p,phi0m"
    assert len(lines) == small_profile.grid.size + 1
