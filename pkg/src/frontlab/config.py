"""Experiment configuration: one JSON document, validated up front.

Every numeric field is checked against the preconditions of the module
it feeds before any compute starts, and a short hash of the canonical
JSON is stamped into every output file so a run's artifacts can be
cross-checked for consistency.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ValidationError
from .grids import SpaceGrid, TraitGrid
from .potentials import DEFAULT_KAPPA, KERNEL_KINDS, POTENTIAL_KINDS, KernelSpec, PotentialSpec
from . import spectral

_DEFAULTS = {
    "boundary": "dirichlet",
    "diffusion": {"kind": "standard"},
    "grid": {"R_y": 10.0, "n_y": 241, "L_x": 40.0, "n_x": 401},
    "time": {"T": 10.0, "dt": "auto", "snapshot_stride": 25},
    "initial": {"amplitude": 0.02, "r_x": 2.0, "r_y": 1.0, "plateau": 0.5},
    "speeds": [],
    "spectrum": {"k": 8},
    "tracker": {"theta": "auto", "window_fraction": 0.5, "slice": "y0"},
    "output": {"dir": "out", "snapshots": "final"},
    "deterministic": True,
}


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(canon).hexdigest()[:12]


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


@dataclass
class ExperimentConfig:
    raw: dict = field(repr=False)
    hash: str = ""

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = cls(raw=raw, hash=config_hash(raw))
        cfg.validate()
        return cfg

    def section(self, name: str) -> dict:
        merged = dict(_DEFAULTS.get(name, {}))
        val = self.raw.get(name, {})
        if isinstance(merged, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config.{name} must be an object")
            merged.update(val)
            return merged
        return val

    # ---- validation ------------------------------------------------

    def validate(self):
        raw = self.raw
        _require("potential" in raw, "config.potential required")
        _require("kernel" in raw, "config.kernel required")
        _require("alpha" in raw, "config.alpha required")
        pot = raw["potential"]
        _require(isinstance(pot, dict) and pot.get("kind") in POTENTIAL_KINDS,
                 f"config.potential.kind must be one of {POTENTIAL_KINDS}")
        ker = raw["kernel"]
        _require(isinstance(ker, dict) and ker.get("kind") in KERNEL_KINDS,
                 f"config.kernel.kind must be one of {KERNEL_KINDS}")
        alpha = raw["alpha"]
        if isinstance(alpha, str):
            _require(alpha.startswith("auto:"),
                     "config.alpha must be a positive number or 'auto:FRACTION'")
            try:
                frac = float(alpha.split(":", 1)[1])
            except ValueError:
                raise ConfigError("config.alpha auto fraction is not a number") from None
            _require(frac > 0, "config.alpha auto fraction must be positive")
        else:
            _require(isinstance(alpha, (int, float)) and alpha > 0,
                     "config.alpha must be positive")
        diff = self.section("diffusion")
        if isinstance(diff, str):
            diff = {"kind": diff}
        _require(diff.get("kind") in ("standard", "fractional"),
                 "config.diffusion.kind must be 'standard' or 'fractional'")
        if diff.get("kind") == "fractional":
            sigma = diff.get("sigma")
            _require(isinstance(sigma, (int, float)) and 0 < sigma < 1,
                     "config.diffusion.sigma must lie in (0, 1)")
        _require(self.raw.get("boundary", _DEFAULTS["boundary"]) in ("dirichlet", "neumann"),
                 "config.boundary must be 'dirichlet' or 'neumann'")
        g = self.section("grid")
        for key in ("R_y", "L_x"):
            _require(isinstance(g.get(key), (int, float)) and g[key] > 0,
                     f"config.grid.{key} must be positive")
        for key in ("n_y", "n_x"):
            v = g.get(key)
            _require(isinstance(v, int) and v >= 3 and v % 2 == 1,
                     f"config.grid.{key} must be an odd integer >= 3")
        t = self.section("time")
        _require(isinstance(t.get("T"), (int, float)) and t["T"] >= 0,
                 "config.time.T must be nonnegative")
        dt = t.get("dt", "auto")
        _require(dt == "auto" or (isinstance(dt, (int, float)) and dt > 0),
                 "config.time.dt must be 'auto' or a positive number")
        stride = t.get("snapshot_stride", 25)
        _require(isinstance(stride, int) and stride >= 1,
                 "config.time.snapshot_stride must be a positive integer")
        ini = self.section("initial")
        _require(ini.get("amplitude", 0) != "" and float(ini.get("amplitude", 0)) > 0,
                 "config.initial.amplitude must be positive")
        for key in ("r_x", "r_y"):
            _require(float(ini.get(key, 0)) > 0, f"config.initial.{key} must be positive")
        _require(0 < float(ini.get("plateau", 0.5)) < 1,
                 "config.initial.plateau must lie in (0, 1)")
        speeds = self.raw.get("speeds", [])
        _require(isinstance(speeds, list), "config.speeds must be a list")
        for s in speeds:
            if isinstance(s, str):
                _require(_parse_speed_expr(s) is not None,
                         f"config.speeds entry {s!r} is not a number or '<float>*cstar'")
            else:
                _require(isinstance(s, (int, float)), "config.speeds entries must be numeric")
        trk = self.section("tracker")
        th = trk.get("theta", "auto")
        _require(th == "auto" or (isinstance(th, (int, float)) and th > 0),
                 "config.tracker.theta must be 'auto' or positive")
        _require(0 <= float(trk.get("window_fraction", 0.5)) < 1,
                 "config.tracker.window_fraction must lie in [0, 1)")
        _require(trk.get("slice", "y0") in ("y0", "ymax"),
                 "config.tracker.slice must be 'y0' or 'ymax'")
        k = self.section("spectrum").get("k", 8)
        _require(isinstance(k, int) and k >= 1, "config.spectrum.k must be a positive integer")
        _require(k <= g["n_y"] - 2, "config.spectrum.k must not exceed n_y - 2")

    # ---- builders --------------------------------------------------

    def trait_grid(self) -> TraitGrid:
        g = self.section("grid")
        return TraitGrid(float(g["R_y"]), int(g["n_y"]))

    def space_grid(self) -> SpaceGrid:
        g = self.section("grid")
        return SpaceGrid(float(g["L_x"]), int(g["n_x"]))

    def potential(self) -> PotentialSpec:
        p = dict(self.raw["potential"])
        kind = p.pop("kind")
        kappa = float(p.pop("kappa", DEFAULT_KAPPA))
        if kind == "tabulated":
            return PotentialSpec.from_csv(p["path"], kappa=kappa)
        return PotentialSpec(kind=kind, a=float(p.pop("a", 1.0)), kappa=kappa)

    def kernel(self) -> KernelSpec:
        p = dict(self.raw["kernel"])
        kind = p.pop("kind")
        kappa = float(p.pop("kappa", DEFAULT_KAPPA))
        if kind == "tabulated":
            return KernelSpec.from_csv(p["path"], kappa=kappa)
        fields = {k: float(v) for k, v in p.items()
                  if k in ("k", "amplitude", "width", "radius", "height")}
        return KernelSpec(kind=kind, kappa=kappa, **fields)

    def diffusion_kind(self) -> tuple[str, float | None]:
        diff = self.section("diffusion")
        if isinstance(diff, str):
            diff = {"kind": diff}
        return diff["kind"], diff.get("sigma")

    def boundary(self) -> str:
        return self.raw.get("boundary", _DEFAULTS["boundary"])

    def resolve_alpha(self, alpha_bar: float | None = None) -> tuple[float, float | None]:
        """(alpha, alpha_bar);  'auto:f' resolves to f * alpha_bar."""
        alpha = self.raw["alpha"]
        if isinstance(alpha, str):
            frac = float(alpha.split(":", 1)[1])
            if alpha_bar is None:
                kind, sigma = self.diffusion_kind()
                alpha_bar = spectral.find_alpha_bar(
                    self.potential(), self.trait_grid(), tol=1e-4,
                    bc=self.boundary(), diffusion=kind, sigma=sigma)
            return frac * alpha_bar, alpha_bar
        return float(alpha), alpha_bar

    def operator(self, alpha: float) -> spectral.DiscreteOperator:
        kind, sigma = self.diffusion_kind()
        return spectral.assemble_operator(self.trait_grid(), self.potential(), alpha,
                                          bc=self.boundary(), diffusion=kind, sigma=sigma)

    def speeds(self, c_star: float) -> list[float]:
        entries = self.raw.get("speeds", [])
        if not entries:
            return [c_star]
        out = []
        for s in entries:
            if isinstance(s, str):
                out.append(_parse_speed_expr(s) * c_star)
            else:
                out.append(float(s))
        return out

    def output_dir(self) -> Path:
        return Path(self.section("output").get("dir", "out"))


def _parse_speed_expr(expr: str) -> float | None:
    """'cstar' -> 1.0, '1.02*cstar' -> 1.02, otherwise None."""
    s = expr.replace(" ", "")
    if s == "cstar":
        return 1.0
    if s.endswith("*cstar"):
        try:
            return float(s[: -len("*cstar")])
        except ValueError:
            return None
    return None
