"""Command-line scenario runner.

Every mode writes CSV files plus ``run_manifest.json`` into the output
directory::

    esst reproduce-fig2 --out runs/fig2
    esst sweep --etas 0.01 0.02 0.05 --tau-us 0.5 --out runs/sweep
    esst propagate --config scenario.json --steps 8000

Times are in microseconds and Rabi frequencies in rad/us at this boundary;
the numerical core is unit-agnostic.
"""

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import List, Optional

import numpy as np

from .design import DesignParams, designed_pulses, polynomial_schedule, write_pulses_csv
from .invariant import residual_profile
from .metrics import default_eta_grid, enantiomeric_excess, omega_max, sweep_eta, write_sweep_csv
from .model import Chirality
from .propagate import METHODS, basis_state, propagate, write_trajectory_csv

MODES = ("design", "propagate", "sweep", "reproduce-fig2", "reproduce-fig3", "reproduce-fig4")
CHIRALITIES = ("left", "right", "both")
# typical experimental Rabi frequency for molecular rotational transitions, rad/us
TYPICAL_RABI = 2 * math.pi * 10.0


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""


@dataclass
class ScenarioConfig:
    mode: str
    tau: float = 0.5
    tau_unit: str = "us"
    eta: float = 0.02
    steps: int = 4000
    chirality: str = "both"
    output_dir: str = "."
    etas: Optional[List[float]] = None
    workers: int = 1
    method: str = "magnus4"
    omega0: float = 1.0

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why} (got {getattr(self, name)!r})")

        if self.mode not in MODES:
            bad("mode", f"must be one of {', '.join(MODES)}")
        if not _is_number(self.tau) or not (math.isfinite(self.tau) and self.tau > 0):
            bad("tau", "must be a positive number")
        if self.tau_unit != "us":
            bad("tau_unit", "only 'us' is supported")
        if not _is_number(self.eta) or not math.isfinite(self.eta) or self.eta == 0 or abs(self.eta) > 0.2:
            bad("eta", "must satisfy eta != 0 and |eta| <= 0.2 (eta = 0 makes Omega_y diverge)")
        if self.eta < 0:
            bad("eta", "the shared field is designed from the left branch and needs eta > 0")
        if not _is_int(self.steps) or self.steps < 100:
            bad("steps", "must be an integer >= 100")
        if self.chirality not in CHIRALITIES:
            bad("chirality", f"must be one of {', '.join(CHIRALITIES)}")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            bad("output_dir", "must be a non-empty path string")
        if self.etas is not None:
            if not isinstance(self.etas, list) or not all(_is_number(e) for e in self.etas):
                bad("etas", "must be a list of numbers")
            if not self.etas:
                bad("etas", "must contain at least one value")
            if not all(0 < e <= 0.2 for e in self.etas):
                bad("etas", "every value must lie in (0, 0.2]")
        if not _is_int(self.workers) or self.workers < 1:
            bad("workers", "must be a positive integer")
        if self.method not in METHODS:
            bad("method", f"must be one of {', '.join(METHODS)}")
        if not _is_number(self.omega0) or not self.omega0 > 0:
            bad("omega0", "must be positive")
        return self

    def resolved_etas(self):
        return list(self.etas) if self.etas is not None else [float(e) for e in default_eta_grid()]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def config_from_dict(data) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "mode" not in data:
        raise ConfigError("mode: required field is missing")
    return ScenarioConfig(**data).validate()


def parse_config(text: str) -> ScenarioConfig:
    """Strictly parse a JSON scenario document, filling documented defaults."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from None
    return config_from_dict(data)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _trajectory(pulses, chirality, cfg):
    params = DesignParams(cfg.tau, cfg.eta if chirality is Chirality.LEFT else -cfg.eta, cfg.steps + 1)
    traj = propagate(pulses, chirality, basis_state(1), cfg.steps, cfg.method)
    schedule = polynomial_schedule(params, chirality)
    traj.invariant_residual = residual_profile(schedule, pulses, chirality, cfg.omega0, traj.times)
    return traj


def run_scenario(cfg: ScenarioConfig):
    """Execute one scenario; returns ``(files, summary)`` with all files written."""
    cfg.validate()
    out = Path(cfg.output_dir)
    summary = {}
    outputs = {}  # filename -> writer callable; written only after all numerics succeed

    mode = cfg.mode
    chirality = {"reproduce-fig2": "left", "reproduce-fig3": "right"}.get(mode, cfg.chirality)
    sides = [Chirality.LEFT, Chirality.RIGHT] if chirality == "both" else [Chirality.parse(chirality)]

    if mode == "sweep" or mode == "reproduce-fig4":
        etas = cfg.resolved_etas()
        rows = sweep_eta(etas, cfg.tau, cfg.steps, cfg.workers, cfg.method)
        failed = [r for r in rows if r.failed]
        if failed:
            raise RuntimeError("sweep failed at " + "; ".join(f"eta={r.eta:g}: {r.error}" for r in failed))
        outputs["sweep.csv"] = lambda p: write_sweep_csv(rows, p)
        summary["sweep_points"] = len(rows)
        summary["omega_max_range"] = [min(r.omega_max for r in rows), max(r.omega_max for r in rows)]
    else:
        pulses = designed_pulses(DesignParams(cfg.tau, cfg.eta, cfg.steps + 1), Chirality.LEFT)
        outputs["pulses.csv"] = lambda p: write_pulses_csv(pulses, p)
        peak = omega_max(pulses)
        summary["omega_max"] = peak
        summary["feasibility"] = {
            "typical_rabi_rad_per_us": TYPICAL_RABI,
            "omega_max_over_typical": peak / TYPICAL_RABI,
            "within_typical": bool(peak <= TYPICAL_RABI),
        }
        if mode != "design":
            finals = {}
            for side in sides:
                traj = _trajectory(pulses, side, cfg)
                name = f"trajectory_{side.value}.csv"
                outputs[name] = lambda p, traj=traj: write_trajectory_csv(traj, p)
                finals[side.value] = [float(x) for x in traj.final_populations]
                summary[f"max_norm_error_{side.value}"] = float(np.max(traj.norm_error))
                summary[f"max_invariant_residual_{side.value}"] = float(np.nanmax(traj.invariant_residual))
            summary["final_populations"] = finals
            if len(finals) == 2:
                summary["enantiomeric_excess"] = enantiomeric_excess(finals["left"][2], finals["right"][2])

    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, writer in outputs.items():
        writer(out / name)
        files[name] = _sha256(out / name)
    manifest = {
        "tool": "esst",
        "version": _tool_version(),
        "config": dataclasses.asdict(cfg),
        "units": {"time": cfg.tau_unit, "rabi_frequency": f"rad/{cfg.tau_unit}"},
        "files": files,
        "summary": summary,
    }
    with open(out / "run_manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return files, summary


def build_parser():
    parser = argparse.ArgumentParser(prog="esst", description="Enantio-specific state transfer via invariant-based shortcuts")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="JSON scenario file; flags override its values")
        p.add_argument("--out", dest="output_dir", help="output directory")
        p.add_argument("--steps", type=int, help="integration steps over [0, tau]")
        p.add_argument("--eta", type=float, help="left-branch regularisation offset (radians)")
        p.add_argument("--tau-us", dest="tau", type=float, help="pulse duration in microseconds")
        p.add_argument("--chirality", choices=CHIRALITIES)
        p.add_argument("--workers", type=int)
        p.add_argument("--method", choices=METHODS)
        if mode in ("sweep", "reproduce-fig4"):
            p.add_argument("--etas", type=float, nargs="*", help="eta values (default: 20 log-spaced in [0.005, 0.1])")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        data = {}
        if args.config:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
            if not isinstance(data, dict):
                raise ConfigError("config document must be a JSON object")
        data["mode"] = args.mode
        for key in ("output_dir", "steps", "eta", "tau", "chirality", "workers", "method", "etas"):
            value = getattr(args, key, None)
            if value is not None:
                data[key] = value
        cfg = config_from_dict(data)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"esst: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        files, summary = run_scenario(cfg)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"esst: numerical failure: {exc}", file=sys.stderr)
        return 1
    for name in files:
        print(Path(cfg.output_dir) / name)
    if "final_populations" in summary:
        for side, pops in summary["final_populations"].items():
            print(f"{side}: P1={pops[0]:.4f} P2={pops[1]:.4f} P3={pops[2]:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
