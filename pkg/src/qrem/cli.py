"""Command-line front end: reproducible experiments with CSV/JSON emission.

Each command reads a JSON config (all fields optional, defaults below),
applies the shared flag overrides, validates, computes, and writes into the
output directory:

* the data CSVs of the command,
* ``summary.json``   {tool_version, rng_version, config_echo, results,
  metadata} (timestamps live only under ``metadata``),
* ``effective_config.json``  the fully-materialized config that reproduces
  the run byte for byte.

Exit status: 0 when every requested computation converged, 1 on compute
errors or unconverged results, 2 on config errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .anneal import DT_SAFETY, Schedule, success_vs_tau
from .errors import ConfigError, QremError
from .gaps import gap_scaling_ensemble, minimal_gap, spectrum_vs_field
from .instances import RNG_VERSION, instance_from_energies, sample_instance
from .instanton import (
    InstantonParams,
    balanced_theta_action,
    instanton_action,
    static_m,
    surface_cost_gap,
)
from .io_utils import (
    write_anneal_csv,
    write_checkpoints_csv,
    write_csv,
    write_json,
    write_scaling_csv,
    write_spectrum_csv,
)
from .perturbation import minimal_gap_prediction
from .thermo import phase_boundary

COMMANDS = ("spectrum", "gap", "scaling", "anneal", "phase-diagram", "instanton")

_DEFAULTS = {
    "spectrum": {
        "n": 10,
        "seed": 1,
        "energies": None,
        "gammas": {"start": 0.0, "stop": 1.5, "num": 31},
        "k": 5,
        "tol": 1e-10,
    },
    "gap": {
        "n": 12,
        "seed": 1,
        "bracket": None,
        "tol_gamma": 5e-4,
        "tol_eig": None,
    },
    "scaling": {
        "ns": [10, 12, 14, 16],
        "samples": 25,
        "master_seed": 20260810,
        "tol_gamma": 5e-4,
        "tol_eig": None,
    },
    "anneal": {
        "n": 8,
        "seed": 1,
        "taus": [1.0, 3.0, 10.0, 30.0, 100.0],
        "tau_scaled": None,
        "gamma_start": None,
        "gamma_end": 0.0,
        "dt_safety": DT_SAFETY,
        "checkpoints": 0,
    },
    "phase-diagram": {
        "ts": {"start": 0.0, "stop": 1.5, "step": 0.1},
        "tol": 1e-10,
    },
    "instanton": {
        "ns": [10, 12, 14, 16, 18, 20],
        "beta": 10.0,
        "j": 1.0,
        "gamma": 0.3,
        "theta": 0.5,
        "k": 2,
    },
}


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"config error at {path}: {message}")


def _check_number(cfg: dict, key: str, *, integer=False, minimum=None, optional=False):
    value = cfg.get(key)
    if value is None:
        if optional:
            return
        raise _fail(key, "missing value")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise _fail(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(key, f"must be >= {minimum}, got {value!r}")


def _check_int_list(cfg: dict, key: str, *, minimum=None):
    values = cfg.get(key)
    if not isinstance(values, list) or not values:
        raise _fail(key, f"expected a non-empty list, got {values!r}")
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, int):
            raise _fail(f"{key}[{i}]", f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            raise _fail(f"{key}[{i}]", f"must be >= {minimum}, got {v!r}")


def _grid_from(cfg_value, path: str) -> np.ndarray:
    if isinstance(cfg_value, list):
        if not cfg_value:
            raise _fail(path, "grid list is empty")
        return np.asarray(cfg_value, dtype=np.float64)
    if isinstance(cfg_value, dict):
        missing = {"start", "stop"} - set(cfg_value)
        if missing:
            raise _fail(path, f"grid needs start/stop, missing {sorted(missing)}")
        start, stop = float(cfg_value["start"]), float(cfg_value["stop"])
        if "num" in cfg_value:
            num = int(cfg_value["num"])
            if num < 1:
                raise _fail(f"{path}.num", "must be >= 1")
            return np.linspace(start, stop, num)
        step = float(cfg_value.get("step", 0.1))
        if step <= 0:
            raise _fail(f"{path}.step", "must be > 0")
        return np.arange(start, stop + 0.5 * step, step)
    raise _fail(path, f"expected list or {{start, stop, num|step}}, got {cfg_value!r}")


def _load_config(args) -> dict:
    command = args.command
    cfg = dict(_DEFAULTS[command])
    if args.config is not None:
        try:
            raw = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"config error: cannot read {args.config}: {exc}") from exc
        try:
            user = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(user, dict):
            raise ConfigError("config error at <root>: expected a JSON object")
        declared = user.pop("command", None)
        if declared is not None and declared != command:
            raise _fail("command", f"config declares {declared!r}, invoked as {command!r}")
        unknown = set(user) - set(cfg)
        if unknown:
            raise _fail(sorted(unknown)[0], "unknown field")
        cfg.update(user)
    if args.seed is not None:
        cfg["master_seed" if command == "scaling" else "seed"] = args.seed
    cfg["command"] = command
    cfg["threads"] = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if cfg["threads"] < 1:
        raise _fail("threads", f"must be >= 1, got {cfg['threads']}")
    return cfg


def _instance_from_cfg(cfg: dict):
    if cfg.get("energies") is not None:
        if not isinstance(cfg["energies"], list):
            raise _fail("energies", "expected a list of level energies")
        instance = instance_from_energies(np.asarray(cfg["energies"], dtype=np.float64))
        if instance.n != cfg["n"]:
            raise _fail("energies", f"length 2**{instance.n} does not match n={cfg['n']}")
        return instance
    return sample_instance(int(cfg["n"]), int(cfg["seed"]))


def _run_spectrum(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_number(cfg, "n", integer=True, minimum=1)
    _check_number(cfg, "seed", integer=True)
    _check_number(cfg, "k", integer=True, minimum=2)
    _check_number(cfg, "tol", minimum=0.0)
    grid = _grid_from(cfg["gammas"], "gammas")
    instance = _instance_from_cfg(cfg)
    curve = spectrum_vs_field(instance, grid, k=int(cfg["k"]), tol=float(cfg["tol"]))
    write_spectrum_csv(curve, out / "spectrum.csv")
    ok = bool(curve.converged.all())
    results = {
        "n": instance.n,
        "e0": instance.ground_energy,
        "points": int(curve.gammas.size),
        "all_converged": ok,
        "min_gap_on_grid": float(curve.gap().min()),
        "files": ["spectrum.csv"],
    }
    return (0 if ok else 1), results


def _run_gap(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_number(cfg, "n", integer=True, minimum=1)
    _check_number(cfg, "seed", integer=True)
    _check_number(cfg, "tol_gamma", minimum=1e-12)
    bracket = cfg.get("bracket")
    if bracket is not None:
        if not (isinstance(bracket, list) and len(bracket) == 2):
            raise _fail("bracket", f"expected [lo, hi], got {bracket!r}")
        bracket = (float(bracket[0]), float(bracket[1]))
    instance = sample_instance(int(cfg["n"]), int(cfg["seed"]))
    result = minimal_gap(
        instance,
        bracket=bracket,
        tol_gamma=float(cfg["tol_gamma"]),
        tol_eig=None if cfg.get("tol_eig") is None else float(cfg["tol_eig"]),
    )
    write_csv(
        out / "gap.csv",
        ["n", "sample", "seed", "e0", "gamma_star", "delta_min"],
        [(instance.n, 0, instance.seed, result.e0, result.gamma_star, result.delta_min)],
    )
    gamma_pred, delta_pred = minimal_gap_prediction(result.e0, instance.n)
    results = {
        "gamma_star": result.gamma_star,
        "delta_min": result.delta_min,
        "e0": result.e0,
        "search_evals": result.search_evals,
        "non_unimodal": result.non_unimodal,
        "gamma_star_predicted": gamma_pred,
        "delta_min_predicted": delta_pred,
        "files": ["gap.csv"],
    }
    return 0, results


def _run_scaling(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_int_list(cfg, "ns", minimum=1)
    _check_number(cfg, "samples", integer=True, minimum=1)
    _check_number(cfg, "master_seed", integer=True)
    _check_number(cfg, "tol_gamma", minimum=1e-12)
    result = gap_scaling_ensemble(
        cfg["ns"],
        int(cfg["samples"]),
        int(cfg["master_seed"]),
        tol_gamma=float(cfg["tol_gamma"]),
        tol_eig=None if cfg.get("tol_eig") is None else float(cfg["tol_eig"]),
        workers=int(cfg["threads"]),
    )
    write_scaling_csv(result, out / "scaling.csv")
    results = {
        "slope": result.slope,
        "slope_stderr": result.slope_stderr,
        "slope_ci95": list(result.slope_ci) if result.slope_ci else None,
        "intercept": result.intercept,
        "excluded": result.excluded,
        "stats": {str(n): result.stats[n] for n in result.ns},
        "files": ["scaling.csv"],
    }
    return (0 if result.excluded == 0 else 1), results


def _run_anneal(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_number(cfg, "n", integer=True, minimum=1)
    _check_number(cfg, "seed", integer=True)
    _check_number(cfg, "gamma_end", minimum=0.0)
    _check_number(cfg, "dt_safety", minimum=1e-6)
    _check_number(cfg, "checkpoints", integer=True, minimum=0)
    instance = sample_instance(int(cfg["n"]), int(cfg["seed"]))
    gamma_pred, delta_pred = minimal_gap_prediction(instance.ground_energy, instance.n)
    gamma_start = cfg.get("gamma_start")
    if gamma_start is None:
        gamma_start = 5.0 * gamma_pred
    if cfg.get("tau_scaled") is not None:
        coeffs = cfg["tau_scaled"]
        if not isinstance(coeffs, list) or not coeffs:
            raise _fail("tau_scaled", f"expected a non-empty list, got {coeffs!r}")
        taus = [float(c) / delta_pred**2 for c in coeffs]
    else:
        taus = cfg["taus"]
        if not isinstance(taus, list) or not taus:
            raise _fail("taus", f"expected a non-empty list, got {taus!r}")
        taus = [float(t) for t in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise _fail("taus", "annealing times must be strictly ascending")
    template = Schedule(
        gamma_start=float(gamma_start), gamma_end=float(cfg["gamma_end"]), tau=taus[0]
    )
    runs = success_vs_tau(
        instance,
        taus,
        template,
        dt_rule=float(cfg["dt_safety"]),
        checkpoints=int(cfg["checkpoints"]),
    )
    entries = [(instance.n, instance.seed, run) for run in runs]
    write_anneal_csv(entries, out / "anneal.csv")
    files = ["anneal.csv"]
    if int(cfg["checkpoints"]) > 0:
        for i, run in enumerate(runs):
            name = f"checkpoints_{i:03d}.csv"
            write_checkpoints_csv(run.checkpoints, out / name)
            files.append(name)
    results = {
        "n": instance.n,
        "e0": instance.ground_energy,
        "gamma_start": float(gamma_start),
        "delta_min_predicted": delta_pred,
        "taus": taus,
        "fidelities": [run.fidelity for run in runs],
        "max_norm_drift": max(run.max_norm_drift for run in runs),
        "files": files,
    }
    return 0, results


def _run_phase_diagram(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_number(cfg, "tol", minimum=1e-14)
    ts = _grid_from(cfg["ts"], "ts")
    if np.any(ts < 0):
        raise _fail("ts", "temperatures must be >= 0")
    points = [phase_boundary(float(t), tol=float(cfg["tol"])) for t in ts]
    write_csv(
        out / "phase_diagram.csv",
        ["T", "gamma_c"],
        [(p.temperature, p.gamma_c) for p in points],
    )
    results = {
        "points": len(points),
        "gamma_c_at_first_T": points[0].gamma_c if points else None,
        "files": ["phase_diagram.csv"],
    }
    return 0, results


def _run_instanton(cfg: dict, out: Path) -> tuple[int, dict]:
    _check_int_list(cfg, "ns", minimum=1)
    _check_number(cfg, "beta", minimum=1e-12)
    _check_number(cfg, "j", minimum=1e-12)
    _check_number(cfg, "gamma", minimum=0.0)
    _check_number(cfg, "k", integer=True, minimum=0)
    _check_number(cfg, "theta", minimum=0.0)
    if cfg["theta"] > 1:
        raise _fail("theta", f"must be <= 1, got {cfg['theta']!r}")
    rows = []
    for n in cfg["ns"]:
        g, scale = surface_cost_gap(int(n))
        rows.append((int(n), g, scale))
    write_csv(out / "surface_cost.csv", ["n", "g", "gap_scale"], rows)
    params = InstantonParams(
        theta=float(cfg["theta"]),
        beta=float(cfg["beta"]),
        j=float(cfg["j"]),
        gamma=float(cfg["gamma"]),
        k=int(cfg["k"]),
    )
    choice = balanced_theta_action(float(cfg["beta"]), float(cfg["j"]), float(cfg["gamma"]))
    results = {
        "action": instanton_action(params),
        "static_m": static_m(float(cfg["theta"]), float(cfg["beta"]), float(cfg["j"]))
        if cfg["theta"] > 0
        else None,
        "balanced_theta": {
            "theta": choice.theta,
            "action": choice.action,
            "degenerate": choice.degenerate,
        },
        "files": ["surface_cost.csv"],
    }
    return 0, results


_RUNNERS = {
    "spectrum": _run_spectrum,
    "gap": _run_gap,
    "scaling": _run_scaling,
    "anneal": _run_anneal,
    "phase-diagram": _run_phase_diagram,
    "instanton": _run_instanton,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrem",
        description="Random energy model in a transverse field: spectra, gaps, annealing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="seed / master seed override")
        p.add_argument("--threads", type=int, default=None, help="worker count (default: cores)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        status, results = _RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except QremError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_json(out / "effective_config.json", cfg)
    summary = {
        "tool_version": __version__,
        "rng_version": RNG_VERSION,
        "config_echo": cfg,
        "results": results,
        "metadata": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())},
    }
    write_json(out / "summary.json", summary)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
