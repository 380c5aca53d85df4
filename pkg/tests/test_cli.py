import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from glvortex import fredholm as fh
from glvortex.cli import main
from glvortex.config import DEFAULTS, RunConfig, load_config
from glvortex.errors import DomainError
from glvortex.testfields import bspline_bump, cutoff

SMALL = {"grid": {"Rmax": 30.0, "N": 800}}


def write_config(tmp_path, extra=None, name="cfg.json"):
    cfg = json.loads(json.dumps(SMALL))
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and k in cfg:
            cfg[k].update(v)
        else:
            cfg[k] = v
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, *argv, out="out", extra=None):
    cfg = write_config(tmp_path, extra)
    return main([*argv, "--config", cfg, "--out", str(tmp_path / out), "--quiet"])


@pytest.fixture(scope="module")
def manufactured_rhs(small_profile, tmp_path_factory):
    """rhs JSON with h = L psi* for compact psi* and the psi* reference block."""
    rng = np.random.default_rng(3)
    r = small_profile.grid.nodes
    keys = [(0, 0), (1, 1), (2, 2), (3, 1)]
    star = {k: np.column_stack([bspline_bump(r, 1.0, 20.0, rng.standard_normal(6))[0] for _ in range(4)]) for k in keys}
    h = fh.RhsData(1.0, {k: fh.apply_L_mode(small_profile, *k, v) for k, v in star.items()}, small_profile.grid)
    doc = h.to_dict()
    doc["reference"] = fh.RhsData(1.0, star).to_dict()["modes"]
    d = tmp_path_factory.mktemp("rhs")
    good = d / "rhs.json"
    good.write_text(json.dumps(doc))
    chi, _ = cutoff(r, 0.5, 1.0, 10.0, 20.0)
    bad_modes = dict(h.modes)
    bad_modes[(1, 1)] = bad_modes[(1, 1)] + chi[:, None] * fh._translation_direction(small_profile, 1)
    bad = d / "aligned.json"
    bad.write_text(json.dumps(fh.RhsData(1.0, bad_modes, small_profile.grid).to_dict()))
    return good, bad


def test_print_defaults(capsys):
    assert main(["print-defaults"]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads(json.dumps(DEFAULTS))


def test_config_round_trip_and_validation(tmp_path):
    cfg = RunConfig.from_dict(SMALL)
    assert RunConfig.from_dict(cfg.as_dict()).hash() == cfg.hash()
    with pytest.raises(DomainError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(DomainError):
        RunConfig.from_dict({"tolerances": {"nonsense": 1.0}})
    with pytest.raises(DomainError):
        RunConfig.from_dict({"tolerances": {"newton": -1.0}})
    assert load_config(None, env={"GLVORTEX_SEED": "17"}).seed == 17


def test_solve_profile_writes_stamped_artifacts(tmp_path):
    assert run(tmp_path, "solve-profile", extra={"emit_plots": True}) == 0
    out = tmp_path / "out"
    checks = json.loads((out / "checks.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert checks["config_hash"] == manifest["config_hash"]
    assert checks["newton"]["passed"] and checks["tail_fit"]["passed"]
    assert {"profile.csv", "profile.json", "checks.json", "profile.svg", "tail_fit.svg"} <= set(manifest["artifacts"])
    assert ET.parse(out / "profile.svg").getroot().tag.endswith("svg")


def test_repeated_runs_are_byte_identical(tmp_path):
    names = ("profile.json", "checks.json", "profile.csv", "manifest.json")
    assert run(tmp_path, "solve-profile") == 0
    first = {n: (tmp_path / "out" / n).read_bytes() for n in names}
    assert run(tmp_path, "solve-profile") == 0
    for n in names:
        assert (tmp_path / "out" / n).read_bytes() == first[n], n
    # the hash depends on the numerical inputs only
    assert run(tmp_path, "solve-profile", out="elsewhere") == 0
    other = json.loads((tmp_path / "elsewhere" / "checks.json").read_text())
    assert other["config_hash"] == json.loads(first["checks.json"])["config_hash"]


def test_tightened_tail_tolerance_fails_by_name(tmp_path, capsys):
    cfg = write_config(tmp_path, {"tolerances": {"tail_fit": 1e-16}})
    assert main(["solve-profile", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "FAIL tail-fit" in capsys.readouterr().out


def test_spectrum_and_picone_outputs(tmp_path):
    code = run(tmp_path, "spectrum", "--kmax", "3", out="s")
    rep = json.loads((tmp_path / "s" / "spectrum.json").read_text())
    assert code == (0 if rep["passed"] else 1)
    assert set(rep["eigenvalues"]) == {"B0", "D", "B2", "B3"}
    header = (tmp_path / "s" / "eigvec_D.csv").read_text().splitlines()[0]
    assert header.startswith("r,")
    assert run(tmp_path, "picone", out="p") == 0
    assert json.loads((tmp_path / "p" / "picone.json").read_text())["certificate"]["passed"]


def test_fredholm_manufactured_fixture(tmp_path, manufactured_rhs):
    good, _ = manufactured_rhs
    assert run(tmp_path, "fredholm", "--rhs", str(good)) == 0
    rep = json.loads((tmp_path / "out" / "fredholm.json").read_text())
    assert max(rep["recovery_error"].values()) <= 1e-6
    assert (tmp_path / "out" / "psi_mode3_ell1.csv").exists()


def test_fredholm_rejects_translation_content(tmp_path, manufactured_rhs):
    _, bad = manufactured_rhs
    assert run(tmp_path, "fredholm", "--rhs", str(bad)) == 4
    err = json.loads((tmp_path / "out" / "error.json").read_text())
    assert err["pairing"] == "dx2" and err["residual"] > err["gate"]


def test_fredholm_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "fredholm", "--rhs", str(bad)) == 65
    bad.write_text(json.dumps({"modes": [{"j": 2, "ell": 5, "coeffs": {}}]}))
    assert run(tmp_path, "fredholm", "--rhs", str(bad)) == 65
    assert run(tmp_path, "fredholm", "--rhs", str(tmp_path / "missing.json")) == 66
    assert run(tmp_path, "fredholm") == 64


def test_exit_codes_for_configuration_problems(tmp_path):
    assert main(["solve-profile", "--config", str(tmp_path / "nope.json"), "--quiet"]) == 66
    assert run(tmp_path, "spectrum", extra={"params": {"B": 0.5}}) == 2
    assert run(tmp_path, "solve-profile", extra={"seed": 1, "kmax": 3, "bogus": 1}) == 65
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path)
    assert main(["solve-profile", "--config", cfg, "--out", str(blocker / "sub"), "--quiet"]) == 3
    assert main(["no-such-command"]) == 64


def test_verify_all_names_a_failing_criterion(tmp_path):
    assert run(tmp_path, "verify-all", extra={"tolerances": {"tail_fit": 1e-16}}) == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    failing = {c["name"] for c in summary["criteria"] if not c["passed"]}
    assert "tail-fit" in failing
    assert len(summary["criteria"]) == 9
