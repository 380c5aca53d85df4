"""Command-line entry point.

Usage:
    glvortex print-defaults
    glvortex solve-profile [--config PATH] [--out DIR] [--plots]
    glvortex spectrum      [--config PATH] [--kmax INT] [--out DIR] [--plots]
    glvortex picone        [--config PATH] [--out DIR]
    glvortex fredholm      --rhs PATH [--config PATH] [--out DIR]
    glvortex verify-all    [--config PATH] [--out DIR]

Exit codes: 0 ok, 1 criterion failure, 2 hypothesis violation, 3 I/O error,
4 orthogonality gate, 64 usage, 65 malformed input, 66 missing input file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import fredholm as fh
from .config import DEFAULTS, RunConfig, load_config
from .errors import DomainError, GLVortexError, HypothesisError, OrthogonalityError
from .profile import check_qualitative, fit_tail, solve_profile, write_csv, write_json
from .spectrum import (
    D_FIELDS,
    build_picone_system,
    kernel_residual,
    picone_certificate,
    spectrum_report,
    write_eigvec_csv,
)
from .svg import write_svg
from .testfields import random_bumps

EXIT_OK, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_IO, EXIT_ORTHOGONALITY = 0, 1, 2, 3, 4
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class Run:
    """Output directory, config hash stamping and console reporting for one command."""

    def __init__(self, config: RunConfig, quiet: bool = False):
        self.config = config
        self.quiet = quiet
        self.out = config.output_dir
        self.artifacts = []
        try:
            os.makedirs(self.out, exist_ok=True)
            probe = os.path.join(self.out, ".write_probe")
            with open(probe, "w") as fp:
                fp.write("")
            os.remove(probe)
        except OSError as exc:
            raise IOError(f"output directory {self.out!r} is not writable: {exc}") from exc

    def path(self, name: str) -> str:
        self.artifacts.append(name)
        return os.path.join(self.out, name)

    def write_json(self, name: str, payload: dict) -> None:
        doc = {"config_hash": self.config.hash(), "glvortex_version": __version__, **payload}
        with open(self.path(name), "w") as fp:
            json.dump(_jsonable(doc), fp, indent=1, sort_keys=True)
            fp.write("\n")

    def finish(self, command: str, code: int) -> int:
        manifest = {"command": command, "exit_code": code, "config": self.config.as_dict(), "artifacts": sorted(self.artifacts)}
        self.write_json("manifest.json", manifest)
        return code

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    return x


def _solve(config: RunConfig):
    return solve_profile(config.params, config.degrees, config.build_grid(), tol=config.tolerances["newton"])


# --------------------------------------------------------------------------- commands


def cmd_print_defaults(args) -> int:
    print(json.dumps(DEFAULTS, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_solve_profile(config: RunConfig, run: Run) -> int:
    prof = _solve(config)
    write_csv(prof, run.path("profile.csv"))
    write_json(prof, run.path("profile.json"))
    fit = fit_tail(prof)
    qual = check_qualitative(prof)
    tol = config.tolerances["tail_fit"]
    tail_ok = max(fit.relative_errors) <= tol
    newton_ok = prof.newton_residual <= config.tolerances["newton"]
    run.write_json("checks.json", {
        "newton": {"residual": prof.newton_residual, "iterations": prof.iterations, "passed": newton_ok},
        "tail_fit": {**fit.as_dict(), "tolerance": tol, "passed": tail_ok},
        "qualitative": qual.as_dict(),
    })
    if config.emit_plots:
        r = prof.grid.nodes
        write_svg(run.path("profile.svg"), [("U+", r, prof.Uplus), ("U-", r, prof.Uminus)],
                  title="vortex profile", xlabel="r", ylabel="U")
        sel = r >= fit.window[0]
        resid = [(f"U{s} fit residual", r[sel], prof.U(sign)[sel] - prof.params.t(sign) - c / (2 * r[sel] ** 2))
                 for s, sign, c in (("+", 1, fit.chat_plus_fit), ("-", -1, fit.chat_minus_fit))]
        write_svg(run.path("tail_fit.svg"), resid, title="tail fit residual", xlabel="r", ylabel="residual")
    run.say(f"newton residual {prof.newton_residual:.3e} in {prof.iterations} iterations")
    run.say(f"tail fit relative errors {fit.relative_errors[0]:.3e}, {fit.relative_errors[1]:.3e}")
    failed = [] if newton_ok else ["newton"]
    failed += [] if tail_ok else ["tail-fit"]
    failed += qual.failures()
    for name in failed:
        run.say(f"FAIL {name}")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_spectrum(config: RunConfig, run: Run, kmax: int) -> int:
    config.params.require_attractive()
    prof = _solve(config)
    rep = spectrum_report(prof, kmax=kmax, seed=config.seed)
    run.write_json("spectrum.json", rep.as_dict())
    write_eigvec_csv("D", rep, prof.grid, run.path("eigvec_D.csv"), list(D_FIELDS))
    if config.emit_plots:
        r = prof.grid.nodes
        V = rep.vectors["D"]
        write_svg(run.path("eigvec_D.svg"), [(name, r, V[:, i]) for i, name in enumerate(D_FIELDS)],
                  title="lowest eigenvector of D", xlabel="r", ylabel="amplitude")
    for name, vals in rep.eigenvalues.items():
        run.say(f"lambda_min({name}) = {vals[0]:.6e}")
    for flag, ok in rep.flags.items():
        run.say(f"{'PASS' if ok else 'FAIL'} {flag}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_picone(config: RunConfig, run: Run) -> int:
    config.params.require_attractive()
    prof = _solve(config)
    rng = np.random.default_rng(config.seed)
    fields = [random_bumps(prof.grid, 4, rng) for _ in range(50)]
    cert = picone_certificate(prof, fields, tol=config.tolerances["picone_sign"],
                              identity_tol=config.tolerances["picone_identity"])
    signs = build_picone_system(prof).sign_structure()
    kr = kernel_residual(prof)
    run.write_json("picone.json", {"certificate": cert.as_dict(), "sign_structure": signs, "kernel_residual": kr.as_dict()})
    ok = cert.passed and all(signs.values())
    run.say(f"{'PASS' if cert.passed else 'FAIL'} Picone certificate on {len(fields)} seeded quadruples")
    run.say(f"{'PASS' if all(signs.values()) else 'FAIL'} coefficient sign structure")
    return EXIT_OK if ok else EXIT_FAIL


def _read_rhs(path: str):
    with open(path) as fp:
        try:
            doc = json.load(fp)
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed rhs JSON: {exc}") from exc
    if not isinstance(doc, dict) or "modes" not in doc:
        raise DomainError("rhs JSON must be an object with a 'modes' list")
    try:
        h = fh.RhsData.from_dict(doc)
        ref = fh.RhsData.from_dict({"sigma": h.sigma, "modes": doc["reference"]}) if "reference" in doc else None
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed rhs JSON: {exc}") from exc
    return h, ref, doc.get("grid")


def cmd_fredholm(config: RunConfig, run: Run, rhs_path: str) -> int:
    config.params.require_attractive()
    h, ref, grid_meta = _read_rhs(rhs_path)
    if grid_meta:
        config.grid = {**config.grid, **grid_meta}
    prof = _solve(config)
    try:
        sols, mode0, rep = fh.fredholm_solve(prof, h)
    except OrthogonalityError as exc:
        run.write_json("error.json", {"error": "orthogonality", "pairing": exc.pairing,
                                      "residual": exc.residual, "gate": exc.gate, "message": str(exc)})
        run.say(f"orthogonality gate failed on pairing {exc.pairing}")
        return EXIT_ORTHOGONALITY
    tol = config.tolerances
    payload = rep.as_dict()
    ok = all(d["energy_gap"] <= tol["energy_identity"] for d in rep.modes)
    if ref is not None:
        errs = {}
        for s in sols:
            want = ref.modes.get((s.j, s.ell))
            if want is None:
                continue
            got = s.psi
            if s.j == 1:
                want, got = fh.project_kernel(prof, want, s.ell), fh.project_kernel(prof, got, s.ell)
            errs[f"{s.j},{s.ell}"] = float(np.abs(want - got).max() / max(np.abs(want).max(), 1e-300))
        payload["recovery_error"] = errs
        ok &= all(e <= tol["recovery"] for e in errs.values())
    payload["passed"] = ok
    run.write_json("fredholm.json", payload)
    for s in sols:
        fh.write_solution_csv(s, prof.grid, run.path(f"psi_mode{s.j}_ell{s.ell}.csv"))
    if mode0 is not None:
        run.say(f"mode 0 phase residual {mode0.chi1_residual:.3e}, closed form vs solve {mode0.chi1_direct_gap:.3e}")
    run.say(f"H-norm ratio {rep.ratio:.6e} (sigma = {rep.sigma})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_all(config: RunConfig, run: Run) -> int:
    from .acceptance import Suite

    config.params.require_attractive()
    results = Suite(config).run()
    run.write_json("summary.json", {"criteria": [r.as_dict() for r in results],
                                    "passed": all(r.passed for r in results)})
    for r in results:
        run.say(r.line())
    failing = [r.name for r in results if not r.passed]
    if failing:
        run.say("failing criteria: " + ", ".join(failing))
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glvortex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"glvortex {__version__}")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("print-defaults", help="print the default configuration")
    for name in ("solve-profile", "spectrum", "picone", "fredholm", "verify-all"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--plots", action="store_true", help="also write SVG charts")
        p.add_argument("--quiet", action="store_true", help="suppress console output")
        if name == "spectrum":
            p.add_argument("--kmax", type=int, help="highest mode index (2..8)")
        if name == "fredholm":
            p.add_argument("--rhs", help="right-hand side JSON file")
    return parser


def _dispatch(args) -> int:
    if args.command == "print-defaults":
        return cmd_print_defaults(args)
    if args.command == "fredholm" and not args.rhs:
        raise UsageError("fredholm needs --rhs PATH")
    kmax = getattr(args, "kmax", None)
    for path in (args.config, getattr(args, "rhs", None)):
        if path is not None and not os.path.isfile(path):
            raise FileNotFoundError(path)
    try:
        config = load_config(args.config)
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed config JSON: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DomainError(f"invalid config: {exc}") from exc
    if kmax is None:
        kmax = config.kmax
    if not 2 <= kmax <= 8:
        raise UsageError(f"--kmax must lie in 2..8, got {kmax}")
    if args.out:
        config.output_dir = args.out
    if args.plots:
        config.emit_plots = True
    run = Run(config, quiet=args.quiet)
    if args.command == "solve-profile":
        code = cmd_solve_profile(config, run)
    elif args.command == "spectrum":
        code = cmd_spectrum(config, run, kmax)
    elif args.command == "picone":
        code = cmd_picone(config, run)
    elif args.command == "fredholm":
        code = cmd_fredholm(config, run, args.rhs)
    else:
        code = cmd_verify_all(config, run)
    return run.finish(args.command, code)


def _report_error(kind: str, exc: Exception, code: int, args) -> int:
    print(f"glvortex: {kind}: {exc}", file=sys.stderr)
    out = getattr(args, "out", None)
    if out and code != EXIT_IO:
        try:
            os.makedirs(out, exist_ok=True)
            with open(os.path.join(out, "error.json"), "w") as fp:
                json.dump({"error": kind, "message": str(exc), "exit_code": code,
                           "hypothesis": getattr(exc, "hypothesis", None)}, fp, indent=1, sort_keys=True)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return _dispatch(args)
    except UsageError as exc:
        return _report_error("usage", exc, EXIT_USAGE, args)
    except HypothesisError as exc:
        return _report_error("hypothesis", exc, EXIT_HYPOTHESIS, args)
    except OrthogonalityError as exc:
        return _report_error("orthogonality", exc, EXIT_ORTHOGONALITY, args)
    except FileNotFoundError as exc:
        return _report_error("missing input", exc, EXIT_NOINPUT, args)
    except DomainError as exc:
        return _report_error("invalid input", exc, EXIT_DATA, args)
    except OSError as exc:
        return _report_error("io", exc, EXIT_IO, args)
    except GLVortexError as exc:
        return _report_error("failure", exc, EXIT_FAIL, args)


if __name__ == "__main__":
    sys.exit(main())
