import dataclasses
import math

import numpy as np
import pytest

from glvortex import fredholm as fh
from glvortex.errors import DomainError, HypothesisError, OrthogonalityError
from glvortex.numerics import build_grid, quadrature_rule
from glvortex.profile import PhysParams, solve_profile
from glvortex.testfields import bspline_bump, cutoff

KEYS = [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]


def manufactured(profile, seed=7, keys=KEYS, hi=25.0):
    rng = np.random.default_rng(seed)
    r = profile.grid.nodes
    star = {k: np.column_stack([bspline_bump(r, 1.0, hi, rng.standard_normal(6))[0] for _ in range(4)]) for k in keys}
    h = {k: fh.apply_L_mode(profile, *k, v) for k, v in star.items()}
    return star, fh.RhsData(1.0, h, profile.grid)


def rel_err(a, b):
    return float(np.abs(a - b).max() / np.abs(a).max())


@pytest.fixture(scope="module")
def fixture_ref(ref_profile):
    star, h = manufactured(ref_profile)
    return star, h, fh.fredholm_solve(ref_profile, h)


def test_zero_rhs_gives_zero_solution(small_profile):
    n = small_profile.grid.size
    h = fh.RhsData(1.0, {k: np.zeros((n, 4)) for k in KEYS}, small_profile.grid)
    sols, mode0, rep = fh.fredholm_solve(small_profile, h)
    assert all(np.all(s.psi == 0) for s in sols)
    assert rep.Hnorm_psi == 0 and rep.ratio == 0


def test_forward_image_is_orthogonal_to_kernel(fixture_ref, ref_profile):
    _, h, (_, _, rep) = fixture_ref
    norm = math.sqrt(sum(fh.weighted_norm2(ref_profile, j, a, 1.0) for (j, _), a in h.modes.items()))
    for name, val in rep.orthogonality.items():
        assert val <= 1e-8 * norm, name


def test_manufactured_recovery_all_modes(fixture_ref, ref_profile):
    star, _, (sols, _, _) = fixture_ref
    assert {(s.j, s.ell) for s in sols} == set(KEYS)
    for s in sols:
        a, b = star[(s.j, s.ell)], s.psi
        if s.j == 1:
            a, b = fh.project_kernel(ref_profile, a, s.ell), fh.project_kernel(ref_profile, b, s.ell)
        assert rel_err(a, b) <= 1e-6, (s.j, s.ell)


def test_energy_identity(fixture_ref):
    _, _, (sols, _, rep) = fixture_ref
    assert max(s.energy_gap for s in sols) <= 1e-8
    assert all(m["energy_gap"] <= 1e-8 for m in rep.modes)


def test_mode0_closed_form_matches_direct_solve(fixture_ref):
    _, _, (_, mode0, rep) = fixture_ref
    assert mode0.chi1_direct_gap <= 1e-8
    assert mode0.provenance == {"chi1": "closed-form", "chi2": "banded-solve"}
    assert rep.modes[0]["chi1_direct_gap"] == mode0.chi1_direct_gap


def test_mode1_solution_differs_by_translation(fixture_ref, ref_profile):
    star, _, (sols, _, _) = fixture_ref
    for s in sols:
        if s.j != 1:
            continue
        diff = s.psi - star[(1, s.ell)]
        # exactly along the discrete near-kernel direction removed by the bordered solve
        d = fh.kernel_direction(ref_profile, s.ell)
        assert abs(np.sum(diff * d)) / math.sqrt(np.sum(diff**2) * np.sum(d**2)) >= 1 - 1e-10
        # and close to the translation field in the energy norm
        Z = fh._translation_direction(ref_profile, s.ell)
        H = lambda a: fh.H_norm2(ref_profile, 1, s.ell, a)
        ip = (H(diff + Z) - H(diff - Z)) / 4
        assert abs(ip) / math.sqrt(H(diff) * H(Z)) >= 0.999


def test_translation_aligned_rhs_is_rejected(small_profile):
    r = small_profile.grid.nodes
    chi, _ = cutoff(r, 0.5, 1.0, 10.0, 20.0)
    h1 = chi[:, None] * fh._translation_direction(small_profile, 1)
    h = fh.RhsData(1.0, {(1, 1): h1}, small_profile.grid)
    orth = fh.check_orthogonality(h, small_profile)
    norm = math.sqrt(fh.pairing(small_profile, 1, h1, h1))
    assert orth["dx2"] >= 0.1 * norm
    with pytest.raises(OrthogonalityError) as exc:
        fh.fredholm_solve(small_profile, h)
    assert exc.value.pairing == "dx2"


def test_phase_rhs_is_rejected(small_profile):
    Up, Um = small_profile.Uplus, small_profile.Uminus
    z = np.zeros_like(Up)
    h = fh.RhsData(1.0, {(0, 0): np.column_stack([z, Up, z, Um])}, small_profile.grid)
    with pytest.raises(OrthogonalityError):
        fh.fredholm_solve(small_profile, h)


def test_linearity(small_profile):
    _, h1 = manufactured(small_profile, seed=1, hi=20.0)
    _, h2 = manufactured(small_profile, seed=2, hi=20.0)
    a, b = 1.5, -0.25
    combo = fh.RhsData(1.0, {k: a * h1.modes[k] + b * h2.modes[k] for k in KEYS}, small_profile.grid)
    s1, s2, s = (fh.fredholm_solve(small_profile, x)[0] for x in (h1, h2, combo))
    for x, y, z in zip(s1, s2, s):
        assert rel_err(z.psi, a * x.psi + b * y.psi) <= 1e-9


def test_mode_norm_decreases_with_j(small_profile):
    r = small_profile.grid.nodes
    radial = np.column_stack([bspline_bump(r, 1.0, 15.0, c)[0] for c in np.eye(4, 6, 1) + 0.3])
    norms = [fh.solve_modek(small_profile, j, 1, radial).Hnorm_contribution for j in range(2, 6)]
    assert all(a > b for a, b in zip(norms, norms[1:])), norms


def test_decoupled_components_do_not_interact():
    prof = solve_profile(PhysParams(2.0, 1.0, 0.0, 1.0, 1.0), grid=build_grid(30.0, 800))
    r = prof.grid.nodes
    bump = bspline_bump(r, 1.0, 15.0, np.arange(1.0, 7.0))[0]
    z = np.zeros_like(r)
    h = np.column_stack([bump, 0.5 * bump, z, z])
    for j in (2, 3):
        psi = fh.solve_modek(prof, j, 1, h).psi
        assert np.abs(psi[:, 2:]).max() == 0.0
        assert np.abs(psi[:, :2]).max() > 0
    psi0 = fh.solve_mode0(prof, h).psi
    assert np.abs(psi0[:, 2:]).max() <= 1e-14 * np.abs(psi0).max()


def test_nonattractive_coupling_is_rejected(small_profile):
    _, h = manufactured(small_profile, keys=[(2, 1)], hi=20.0)
    for B in (0.0, 0.3):
        bad = dataclasses.replace(small_profile, params=PhysParams(2.0, 1.0, B, 1.0, 1.0))
        with pytest.raises(HypothesisError):
            fh.fredholm_solve(bad, h)


def test_separable_projection_reconstructs_the_field(small_profile):
    r = small_profile.grid.nodes
    fp = lambda x: np.exp(-x) * (1 + 0.5j)
    fm = lambda x: x * np.exp(-x)
    angular = {1: 1.0, 3: 0.5 - 0.25j, -1: 0.2j}
    h = fh.project_separable(small_profile.grid, fp, fm, angular)
    theta = np.linspace(0, 2 * np.pi, 17)
    want = sum(c * np.exp(1j * m * theta) for m, c in angular.items())
    got_p = np.zeros((r.size, theta.size), complex)
    for (j, ell), a in h.modes.items():
        if j == 0:
            s1 = c2 = np.ones_like(theta)
        elif ell == 1:
            s1, c2 = np.sin(j * theta), np.cos(j * theta)
        else:
            s1, c2 = np.cos(j * theta), np.sin(j * theta)
        got_p += np.exp(1j * theta) * (a[:, :1] * s1 + 1j * a[:, 1:2] * c2)
    np.testing.assert_allclose(got_p, fp(r)[:, None] * want[None, :], atol=1e-13)
    assert max(j for j, _ in h.modes) == 2


def test_rhs_json_round_trip(small_profile, tmp_path):
    _, h = manufactured(small_profile, keys=[(0, 0), (2, 2)], hi=20.0)
    fh.write_rhs_json(h, tmp_path / "h.json")
    back = fh.read_rhs_json(tmp_path / "h.json", small_profile.grid)
    assert back.sigma == h.sigma and set(back.modes) == set(h.modes)
    for k in h.modes:
        np.testing.assert_array_equal(back.modes[k], h.modes[k])


@pytest.mark.parametrize("modes", [{(0, 1): np.zeros((5, 4))}, {(2, 3): np.zeros((5, 4))},
                                   {(2, 1): np.zeros((5, 3))}, {(2, 1): np.full((5, 4), np.nan)}])
def test_rhs_validation(modes):
    with pytest.raises(DomainError):
        fh.RhsData(1.0, modes)


def test_rhs_grid_mismatch_and_sigma(small_profile):
    with pytest.raises(DomainError):
        fh.RhsData(0.0, {})
    h = fh.RhsData(1.0, {(2, 1): np.zeros((5, 4))})
    with pytest.raises(DomainError):
        fh.fredholm_solve(small_profile, h)


def test_solution_csv_header(small_profile, tmp_path):
    _, h = manufactured(small_profile, keys=[(2, 1)], hi=20.0)
    sol = fh.fredholm_solve(small_profile, h)[0][0]
    fh.write_solution_csv(sol, small_profile.grid, tmp_path / "psi.csv")
    lines = (tmp_path / "psi.csv").read_text().splitlines()
    assert lines[0] == "r,psi11p,psi12p,psi11m,psi12m"
    assert len(lines) == small_profile.grid.size + 1
