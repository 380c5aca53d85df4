"""Run configuration: a single JSON document with every default printable."""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field

from .errors import DomainError
from .numerics import RadialGrid, build_grid
from .profile import DegreePair, PhysParams

DEFAULT_TOLERANCES = {
    "newton": 1e-10,
    "refinement_lo": 3.5,
    "refinement_hi": 4.5,
    "shooting": 1e-6,
    "symmetry": 1e-10,
    "tail_fit": 0.02,
    "tail_fit_large": 0.005,
    "monotonicity": 1e-8,
    "D_interior": 1e-5,
    "eig_floor": 1e-8,
    "eig_cosine": 0.99,
    "picone_identity": 1e-10,
    "picone_sign": 1e-10,
    "picone_kernel": 1e-6,
    "decomposition": 1e-6,
    "recovery": 1e-6,
    "energy_identity": 1e-8,
    "ratio_stability": 0.10,
    "mform_bound": 1e-10,
}

DEFAULTS = {
    "params": {"Aplus": 2.0, "Aminus": 1.0, "B": -0.5, "tplus": 1.0, "tminus": 1.0},
    "degrees": {"nplus": 1, "nminus": 1},
    "grid": {"Rmax": 60.0, "N": 4000, "grading": 2.0},
    "tolerances": DEFAULT_TOLERANCES,
    "seed": 0,
    "kmax": 5,
    "output_dir": "glvortex_out",
    "emit_plots": False,
}


@dataclass
class RunConfig:
    params: PhysParams
    degrees: DegreePair = field(default_factory=DegreePair)
    grid: dict = field(default_factory=lambda: dict(DEFAULTS["grid"]))
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    kmax: int = 5
    output_dir: str = "glvortex_out"
    emit_plots: bool = False

    def __post_init__(self):
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise DomainError(f"unknown tolerance names {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        bad = [k for k, v in self.tolerances.items() if not float(v) > 0]
        if bad:
            raise DomainError(f"tolerances must be positive: {bad}")
        if int(self.seed) != self.seed:
            raise DomainError("seed must be an integer")

    def build_grid(self, Rmax: float | None = None, N: int | None = None) -> RadialGrid:
        g = self.grid
        return build_grid(Rmax or g["Rmax"], N or g["N"], g.get("grading", 2.0))

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "degrees": self.degrees.as_dict(),
            "grid": dict(self.grid),
            "tolerances": dict(self.tolerances),
            "seed": int(self.seed),
            "kmax": int(self.kmax),
            "output_dir": str(self.output_dir),
            "emit_plots": bool(self.emit_plots),
        }

    def hash(self) -> str:
        """Short digest of the canonical JSON form, stamped into every artifact.

        The output directory is left out: it does not change any computed value.
        """
        d = self.as_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        merged = copy.deepcopy(DEFAULTS)
        for key, val in d.items():
            if key not in merged:
                raise DomainError(f"unknown config key {key!r}")
            if isinstance(merged[key], dict):
                merged[key].update(val)
            else:
                merged[key] = val
        return cls(
            params=PhysParams(**{k: float(v) for k, v in merged["params"].items()}),
            degrees=DegreePair(**merged["degrees"]),
            grid=merged["grid"],
            tolerances=merged["tolerances"],
            seed=int(merged["seed"]),
            kmax=int(merged["kmax"]),
            output_dir=merged["output_dir"],
            emit_plots=bool(merged["emit_plots"]),
        )


def load_config(path: str | None, env=os.environ) -> RunConfig:
    """Read a JSON config (defaults when ``path`` is None); GLVORTEX_SEED overrides the seed."""
    d = {}
    if path is not None:
        with open(path) as fh:
            d = json.load(fh)
        if not isinstance(d, dict):
            raise DomainError("config must be a JSON object")
    if env.get("GLVORTEX_SEED") is not None:
        d["seed"] = int(env["GLVORTEX_SEED"])
    return RunConfig.from_dict(d)
