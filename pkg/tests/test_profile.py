import dataclasses

import numpy as np
import pytest

from glvortex.errors import DomainError, HypothesisError, NewtonDivergenceError
from glvortex.numerics import build_grid
from glvortex.oracles import scalar_vortex
from glvortex.profile import (
    DegreePair,
    PhysParams,
    VortexProfile,
    boundary_values,
    check_qualitative,
    fit_tail,
    initial_guess,
    nonlinear_residual,
    profile_to_dict,
    read_csv,
    read_json,
    solve_profile,
    write_csv,
    write_json,
)


# ----------------------------------------------------------------------------- params


@pytest.mark.parametrize(
    "args",
    [(0.0, 1, -0.5, 1, 1), (1, -1, 0, 1, 1), (1, 1, 1.0, 1, 1), (2, 1, -1.5, 1, 1), (1, 1, 0, 0, 1)],
)
def test_params_reject_h1_violations(args):
    with pytest.raises(HypothesisError) as exc:
        PhysParams(*args)
    assert exc.value.hypothesis == "H1"


def test_attractive_flag_and_h2():
    assert PhysParams(2, 1, -0.5, 1, 1).strictly_attractive
    p = PhysParams(2, 1, 0.1, 1, 1)
    assert not p.strictly_attractive
    with pytest.raises(HypothesisError) as exc:
        p.require_attractive()
    assert exc.value.hypothesis == "H2"


def test_tail_coefficients_reference(ref_params):
    cp, cm = ref_params.tail_coefficients(DegreePair(1, 1))
    assert cp == pytest.approx(-6 / 7, abs=1e-15)
    assert cm == pytest.approx(-10 / 7, abs=1e-15)


def test_degree_pair_must_be_integral():
    with pytest.raises(DomainError):
        DegreePair(1.5, 1)


# ----------------------------------------------------------------------------- guess / residual


def test_initial_guess_values():
    g = build_grid(20.0, 400)
    p = PhysParams(1, 1, 0, 1, 1)
    guess = initial_guess(p, DegreePair(1, 1), g)
    assert guess.Uplus[0] == 0.0
    assert guess.Uplus[-1] == pytest.approx(1.0, abs=2e-3)
    i = np.searchsorted(g.nodes, 1.0)
    r = g.nodes[i]
    assert guess.Uplus[i] == pytest.approx(r / np.sqrt(r**2 + 1))
    assert 1 / np.sqrt(2) == pytest.approx(1.0 / np.sqrt(1.0 + 1.0))
    flat = initial_guess(p, DegreePair(0, 0), g)
    np.testing.assert_array_equal(flat.Uplus, 1.0)


def test_residual_of_constant_state_is_centrifugal():
    g = build_grid(10.0, 200)
    p = PhysParams(1, 1, -0.5, 1, 1)
    const = VortexProfile.from_amplitudes(p, DegreePair(1, 1), g, np.ones(g.size), np.ones(g.size))
    rp, rm = nonlinear_residual(const)
    np.testing.assert_allclose(rp[1:-1], 1.0 / g.nodes[1:-1] ** 2, rtol=1e-12)
    np.testing.assert_allclose(rm[1:-1], rp[1:-1])


def test_residual_of_solution_is_below_tolerance(ref_profile):
    rp, rm = nonlinear_residual(ref_profile)
    assert max(np.abs(rp).max(), np.abs(rm).max()) <= 1e-10


# ----------------------------------------------------------------------------- solver


def test_reference_solve(ref_profile):
    p = ref_profile
    assert p.newton_residual <= 1e-10
    assert p.Uplus[0] == 0.0 and p.Uminus[0] == 0.0
    assert np.all(p.Uplus[1:-1] > 0) and np.all(p.Uplus[1:-1] < 1)
    assert np.all(p.Uminus[1:-1] > 0) and np.all(p.Uminus[1:-1] < 1)
    assert p.dUplus.min() >= -1e-8 and p.dUminus.min() >= -1e-8
    bp, bm = boundary_values(p.params, p.degrees, 60.0)
    assert p.Uplus[-1] == pytest.approx(bp) and p.Uminus[-1] == pytest.approx(bm)


def test_symmetric_parameters_give_equal_components():
    prof = solve_profile(PhysParams(1, 1, -0.5, 1, 1), grid=build_grid(40.0, 1500))
    assert np.abs(prof.Uplus - prof.Uminus).max() <= 1e-10


def test_swap_symmetry():
    g = build_grid(30.0, 1000)
    p = PhysParams(2, 1, -0.5, 1.0, 0.8)
    a = solve_profile(p, grid=g)
    b = solve_profile(p.swapped(), grid=g)
    np.testing.assert_allclose(a.Uplus, b.Uminus, atol=1e-12)
    np.testing.assert_allclose(a.Uminus, b.Uplus, atol=1e-12)


def test_decoupled_matches_shooting_oracle():
    g = build_grid(60.0, 4000)
    prof = solve_profile(PhysParams(1, 1, 0.0, 1, 1), DegreePair(1, 0), grid=g)
    U, r_valid = scalar_vortex(1, 1.0, 1.0)
    sel = g.nodes <= min(r_valid, 15.0)
    assert np.abs(prof.Uplus[sel] - U(g.nodes[sel])).max() <= 1e-6
    # degree-0 component with B = 0 stays at its vacuum value
    np.testing.assert_allclose(prof.Uminus, 1.0, atol=1e-12)


def test_decoupled_component_matches_single_component_solve():
    g = build_grid(30.0, 1000)
    a = solve_profile(PhysParams(2, 1, 0.0, 1, 1), grid=g)
    b = solve_profile(PhysParams(2, 3, 0.0, 1, 1.5), grid=g)
    assert np.abs(a.Uplus - b.Uplus).max() <= 1e-8


def test_refinement_ratio():
    profs = [solve_profile(PhysParams(2, 1, -0.5, 1, 1), grid=build_grid(30.0, n)) for n in (500, 1000, 2000)]
    d1 = np.abs(profs[0].Uplus - profs[1].Uplus[::2]).max()
    d2 = np.abs(profs[1].Uplus - profs[2].Uplus[::2]).max()
    assert 3.5 <= d1 / d2 <= 4.5


def test_tolerance_domain():
    with pytest.raises(DomainError):
        solve_profile(PhysParams(1, 1, 0, 1, 1), tol=1e-3)
    with pytest.raises(DomainError):
        solve_profile(PhysParams(1, 1, 0, 1, 1), tol=1e-16)


def test_newton_divergence_carries_trace(monkeypatch):
    import glvortex.profile as mod

    monkeypatch.setattr(mod, "MAX_NEWTON", 1)
    with pytest.raises(NewtonDivergenceError) as exc:
        solve_profile(PhysParams(2, 1, -0.5, 1, 1), grid=build_grid(20.0, 400))
    assert len(exc.value.trace) >= 1


# ----------------------------------------------------------------------------- tail / qualitative


def test_tail_fit_reference(ref_profile):
    fit = fit_tail(ref_profile)
    assert fit.window == (30.0, 60.0)
    assert fit.chat_plus_formula == pytest.approx(-6 / 7)
    assert fit.chat_minus_formula == pytest.approx(-10 / 7)
    assert max(fit.relative_errors) <= 0.02


def test_tail_fit_window_errors(ref_profile):
    with pytest.raises(DomainError):
        fit_tail(ref_profile, (10.0, 60.0))
    with pytest.raises(DomainError):
        fit_tail(ref_profile, (59.99, 60.0))


def test_qualitative_passes_on_solution(ref_profile):
    rep = check_qualitative(ref_profile)
    assert rep.passed, rep.failures()


def test_qualitative_detects_amplitude_violation(ref_profile):
    Up = np.array(ref_profile.Uplus)
    Up[1] = 2.0
    bad = dataclasses.replace(ref_profile, Uplus=Up)
    assert "amplitude-bound+" in check_qualitative(bad).failures()


def test_qualitative_detects_dip(ref_profile):
    dU = np.array(ref_profile.dUminus)
    dU[2000] = -1e-3
    bad = dataclasses.replace(ref_profile, dUminus=dU)
    assert "monotonicity-" in check_qualitative(bad).failures()


# ----------------------------------------------------------------------------- io


def test_csv_roundtrip_is_bit_stable(tmp_path, small_profile):
    path = tmp_path / "p.csv"
    write_csv(small_profile, path)
    assert path.read_text().splitlines()[0] == "r,Uplus,dUplus,Uminus,dUminus"
    data = read_csv(path)
    np.testing.assert_array_equal(data["Uplus"], small_profile.Uplus)
    np.testing.assert_array_equal(data["dUminus"], small_profile.dUminus)
    np.testing.assert_array_equal(data["r"], small_profile.grid.nodes)


def test_json_roundtrip_is_bit_stable(tmp_path, small_profile):
    path = tmp_path / "p.json"
    write_json(small_profile, path)
    back = read_json(path)
    assert back.params == small_profile.params
    np.testing.assert_array_equal(back.Uminus, small_profile.Uminus)
    assert profile_to_dict(back) == profile_to_dict(small_profile)
