"""Batch entry point: parse a run configuration, dispatch, write reports.

Usage:
    switchdiff <command> --config cfg.json [--seed N] [--out DIR]
               [--format csv|json] [--threads N]

Commands: check, skeleton, simulate, verify-mgf, verify-lln, chernoff,
escape-rate, verify-lemma2, verify-tail.

Exit codes: 0 success, 1 configuration error, 2 domain error,
3 a verified bound was violated.

Seed and output directory resolve as CLI flag > SWITCHDIFF_SEED /
SWITCHDIFF_OUT environment variable > configuration file.  `--threads` only
changes scheduling; every reported number is independent of it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

from . import __version__, _kernels
from .errors import ConfigError, ModelValidationError, SwitchDiffError
from .model import Constant, ModelSpec, analytic_constants, validate
from .montecarlo import (chernoff_frequency_check, verify_mgf,
                         verify_spatial_tail, verify_stopped_moment,
                         verify_velocity)
from .paths import simulate_em, simulate_exact_constant, trajectory_to_csv
from .reporting import (BoundReport, VERDICT_CONSISTENT, any_violated,
                        write_report_csv, write_report_json)
from .rng import PhiloxStream
from .skeleton import lln_check, sample_skeleton, skeleton_to_csv

ENV_SEED = "SWITCHDIFF_SEED"
ENV_OUT = "SWITCHDIFF_OUT"

_REQUIRED = object()


def _check_positive(v):
    return None if (v > 0 and math.isfinite(v)) else "must be > 0 and finite"


def _check_nonnegative(v):
    return None if (v >= 0 and math.isfinite(v)) else "must be >= 0 and finite"


def _check_finite(v):
    return None if math.isfinite(v) else "must be finite"


def _check_ge1(v):
    return None if v >= 1 else "must be >= 1"


def _check_ge2(v):
    return None if v >= 2 else "must be >= 2"


@dataclass(frozen=True)
class _Param:
    kind: str                    # "int" | "float" | "str" | "float_list" | "int_list"
    default: object = _REQUIRED
    check: object = None         # scalar validator -> error string or None
    choices: tuple = ()
    min_len: int = 1


_SEED = _Param("int", default=0, check=_check_nonnegative)

COMMAND_PARAMS: dict[str, dict[str, _Param]] = {
    "check": {},
    "skeleton": {
        "n_cycles": _Param("int", check=_check_ge1),
        "seed": _SEED,
    },
    "simulate": {
        "method": _Param("str", default="exact", choices=("exact", "em")),
        "horizon": _Param("float", check=_check_positive),
        "dt": _Param("float", default=0.01, check=_check_positive),
        "n_cycles": _Param("int", default=0, check=_check_nonnegative),
        "seed": _SEED,
    },
    "verify-mgf": {
        "which": _Param("str", default="both",
                        choices=("deficit", "excess", "both")),
        "lambdas": _Param("float_list", check=_check_nonnegative),
        "cycles": _Param("int_list", check=_check_nonnegative),
        "n_samples": _Param("int", check=_check_ge2),
        "seed": _SEED,
    },
    "verify-lln": {
        "n_cycles": _Param("int", check=_check_ge1),
        "tolerance": _Param("float", check=_check_positive),
        "seed": _SEED,
    },
    "chernoff": {
        "direction": _Param("str", default="lower_tail",
                            choices=("lower_tail", "upper_tail")),
        "epsilon": _Param("float", check=_check_positive),
        "cycles": _Param("int_list", check=_check_ge1),
        "n_samples": _Param("int", check=_check_ge2),
        "lambda_cap": _Param("float", default=1.0e3, check=_check_positive),
        "seed": _SEED,
    },
    "escape-rate": {
        "horizon": _Param("float", check=_check_positive),
        "n_samples": _Param("int", check=_check_ge2),
        "method": _Param("str", default="exact", choices=("exact", "em")),
        "dt": _Param("float", default=0.01, check=_check_positive),
        "seed": _SEED,
    },
    "verify-lemma2": {
        "lam": _Param("float", check=_check_nonnegative),
        "a_hat": _Param("float", default=0.0, check=_check_nonnegative),
        "n_cycles": _Param("int", check=_check_ge1),
        "n_samples": _Param("int", check=_check_ge2),
        "slack": _Param("float", default=0.05, check=_check_nonnegative),
        "seed": _SEED,
    },
    "verify-tail": {
        "c0": _Param("float", check=_check_finite),
        "epsilon": _Param("float", check=_check_positive),
        "horizons": _Param("float_list", check=_check_positive, min_len=3),
        "n_samples": _Param("int", check=_check_ge2),
        "method": _Param("str", default="exact", choices=("exact", "em")),
        "dt": _Param("float", default=0.01, check=_check_positive),
        "seed": _SEED,
    },
}

COMMANDS = tuple(COMMAND_PARAMS)

_MODEL_FIELDS = {
    "lambda_plus": (True, "float"),
    "lambda_minus": (True, "float"),
    "drift_plus": (True, "float"),
    "drift_minus": (True, "float"),
    "r_plus": (True, "float"),
    "r_minus": (True, "float"),
    "sup_b_plus": (False, "float"),
    "sup_b_minus": (False, "float"),
    "x0": (False, "float"),
    "z0": (False, "str"),
}


@dataclass(frozen=True)
class RunSpec:
    """A fully validated run: model, command, parameters, output target."""

    model: ModelSpec
    command: str
    params: dict
    output_dir: str
    output_format: str

    def to_dict(self) -> dict:
        m = {
            "lambda_plus": self.model.lambda_plus,
            "lambda_minus": self.model.lambda_minus,
            "drift_plus": _constant_value(self.model.drift_plus, "drift_plus"),
            "drift_minus": _constant_value(self.model.drift_minus, "drift_minus"),
            "r_plus": self.model.r_plus,
            "r_minus": self.model.r_minus,
            "x0": self.model.x0,
            "z0": self.model.z0.value,
        }
        if self.model.sup_b_plus is not None:
            m["sup_b_plus"] = self.model.sup_b_plus
        if self.model.sup_b_minus is not None:
            m["sup_b_minus"] = self.model.sup_b_minus
        return {
            "model": m,
            "command": self.command,
            "params": dict(self.params),
            "output": {"dir": self.output_dir, "format": self.output_format},
        }


def _constant_value(drift, name: str) -> float:
    if not isinstance(drift, Constant):
        raise ConfigError(
            f"{name}: only constant drifts are representable in a "
            "configuration file; callable drifts are API-only")
    return drift.value


def serialize_config(spec: RunSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2) + "\n"


def _coerce_scalar(kind: str, value, where: str, errors: list):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{where}: expected an integer, got {value!r}")
            return None
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{where}: expected a number, got {value!r}")
            return None
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            errors.append(f"{where}: expected a string, got {value!r}")
            return None
        return value
    raise AssertionError(kind)


def _coerce_param(name: str, spec: _Param, value, errors: list):
    where = f"params.{name}"
    if spec.kind in ("float_list", "int_list"):
        if not isinstance(value, list) or len(value) < spec.min_len:
            errors.append(f"{where}: expected a list with at least "
                          f"{spec.min_len} entries, got {value!r}")
            return None
        scalar = "float" if spec.kind == "float_list" else "int"
        out = []
        for k, item in enumerate(value):
            v = _coerce_scalar(scalar, item, f"{where}[{k}]", errors)
            if v is None:
                return None
            if spec.check is not None:
                msg = spec.check(v)
                if msg:
                    errors.append(f"{where}[{k}]={v!r}: {msg}")
                    return None
            out.append(v)
        return out
    v = _coerce_scalar(spec.kind, value, where, errors)
    if v is None:
        return None
    if spec.choices and v not in spec.choices:
        errors.append(f"{where}={v!r}: expected one of {spec.choices}")
        return None
    if spec.check is not None and spec.kind in ("int", "float"):
        msg = spec.check(v)
        if msg:
            errors.append(f"{where}={v!r}: {msg}")
            return None
    return v


def parse_config(text: str) -> RunSpec:
    """Parse and validate a JSON run configuration; unknown keys rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")

    errors: list[str] = []
    known_top = {"model", "command", "params", "output"}
    for key in doc:
        if key not in known_top:
            errors.append(f"unknown top-level key {key!r}")

    command = doc.get("command")
    if command is None:
        errors.append("missing required key 'command'")
    elif command not in COMMANDS:
        errors.append(f"command={command!r}: expected one of {COMMANDS}")

    model_doc = doc.get("model")
    model = None
    if model_doc is None:
        errors.append("missing required key 'model'")
    elif not isinstance(model_doc, dict):
        errors.append("'model' must be an object")
    else:
        fields = {}
        for key, value in model_doc.items():
            if key == "sigma":
                errors.append(
                    "unknown model key 'sigma': the noise coefficient is "
                    "fixed at 1 and cannot be configured")
                continue
            if key not in _MODEL_FIELDS:
                errors.append(f"unknown model key {key!r}")
                continue
            _, kind = _MODEL_FIELDS[key]
            v = _coerce_scalar(kind, value, f"model.{key}", errors)
            if v is not None:
                fields[key] = v
        for key, (required, _) in _MODEL_FIELDS.items():
            if required and key not in fields and key not in model_doc:
                errors.append(f"missing required model key {key!r}")
        if fields.get("z0") not in (None, "plus", "minus"):
            errors.append(f"model.z0={fields.get('z0')!r}: expected "
                          "'plus' or 'minus'")
        if not errors:
            model = ModelSpec(**fields)

    params = {}
    if command in COMMAND_PARAMS:
        schema = COMMAND_PARAMS[command]
        params_doc = doc.get("params", {})
        if not isinstance(params_doc, dict):
            errors.append("'params' must be an object")
            params_doc = {}
        for key in params_doc:
            if key not in schema:
                errors.append(f"unknown key params.{key} for command "
                              f"{command!r}")
        for name, spec in schema.items():
            if name in params_doc:
                v = _coerce_param(name, spec, params_doc[name], errors)
                if v is not None:
                    params[name] = v
            elif spec.default is _REQUIRED:
                errors.append(f"missing required key params.{name!r} for "
                              f"command {command!r}")
            else:
                params[name] = spec.default

    output_dir, output_format = "out", "csv"
    out_doc = doc.get("output", {})
    if not isinstance(out_doc, dict):
        errors.append("'output' must be an object")
    else:
        for key in out_doc:
            if key not in ("dir", "format"):
                errors.append(f"unknown key output.{key}")
        if "dir" in out_doc:
            v = _coerce_scalar("str", out_doc["dir"], "output.dir", errors)
            if v is not None:
                output_dir = v
        if "format" in out_doc:
            v = _coerce_scalar("str", out_doc["format"], "output.format",
                               errors)
            if v is not None:
                if v not in ("csv", "json"):
                    errors.append(f"output.format={v!r}: expected 'csv' or "
                                  "'json'")
                else:
                    output_format = v

    if errors:
        raise ConfigError("invalid configuration: " + "; ".join(errors))
    return RunSpec(model=model, command=command, params=params,
                   output_dir=output_dir, output_format=output_format)


def _analytic_row(name: str, value: float) -> BoundReport:
    return BoundReport(quantity=name, analytic=float(value), estimate=None,
                       z=None, verdict=VERDICT_CONSISTENT)


def _auto_cycles(model, horizon: float, seed: int):
    """Skeleton guaranteed to cover the horizon, grown deterministically.

    Counter-based streams make regrowth stable: resampling with more cycles
    reuses the same leading holding times, so the skeleton only extends.
    """
    mean_cycle = analytic_constants(model).mean_cycle
    n = max(4, int(math.ceil(1.5 * horizon / mean_cycle)) + 50)
    while True:
        skel = sample_skeleton(model, n, PhiloxStream(seed, 0))
        if skel.end_time >= horizon:
            return skel, n
        n *= 2


def run(spec: RunSpec, threads: int = 1) -> int:
    """Execute a run spec; writes report/meta files; returns the exit code."""
    t_start = time.monotonic()
    try:
        model = validate(spec.model)
    except ModelValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    os.makedirs(spec.output_dir, exist_ok=True)
    params = spec.params
    seed = params.get("seed", 0)
    reports: list[BoundReport] = []
    artifacts: list[str] = []

    try:
        if spec.command == "check":
            consts = analytic_constants(model)
            print(f"transient: {'true' if consts.transient else 'false'}, "
                  f"velocity_star: {consts.velocity_star:.6f}")
            reports = [
                _analytic_row("mean_cycle", consts.mean_cycle),
                _analytic_row("velocity_star", consts.velocity_star),
                _analytic_row("time_weight_max", consts.time_weight_max),
                _analytic_row("rate_cap", consts.rate_cap),
                _analytic_row("transient", 1.0 if consts.transient else 0.0),
            ]
        elif spec.command == "skeleton":
            skel = sample_skeleton(model, params["n_cycles"],
                                   PhiloxStream(seed, 0))
            path = os.path.join(spec.output_dir, "skeleton.csv")
            skeleton_to_csv(skel, path)
            artifacts.append(path)
        elif spec.command == "simulate":
            if params["n_cycles"] > 0:
                stream = PhiloxStream(seed, 0)
                skel = sample_skeleton(model, params["n_cycles"], stream)
            else:
                skel, n = _auto_cycles(model, params["horizon"], seed)
                n_legs = 2 * n + (1 if model.starts_minus else 0)
                stream = PhiloxStream(seed, 0, position=n_legs)
            if params["method"] == "exact":
                traj = simulate_exact_constant(model, skel, params["horizon"],
                                               stream)
            else:
                traj = simulate_em(model, skel, params["dt"],
                                   params["horizon"], stream)
            path = os.path.join(spec.output_dir, "trajectory.csv")
            trajectory_to_csv(traj, path)
            artifacts.append(path)
        elif spec.command == "verify-mgf":
            reports = verify_mgf(model, params["lambdas"], params["cycles"],
                                 params["n_samples"], seed,
                                 which=params["which"], threads=threads)
        elif spec.command == "verify-lln":
            reports = [lln_check(model, params["n_cycles"],
                                 params["tolerance"], PhiloxStream(seed, 0))]
        elif spec.command == "chernoff":
            reports = chernoff_frequency_check(
                model, params["epsilon"], params["cycles"],
                params["n_samples"], seed, direction=params["direction"],
                lambda_cap=params["lambda_cap"], threads=threads)
        elif spec.command == "escape-rate":
            reports = [verify_velocity(model, params["horizon"],
                                       params["n_samples"], seed,
                                       method=params["method"],
                                       dt=params["dt"], threads=threads)]
        elif spec.command == "verify-lemma2":
            reports = [verify_stopped_moment(
                model, params["lam"], params["a_hat"], params["n_cycles"],
                params["n_samples"], seed, slack=params["slack"],
                threads=threads)]
        elif spec.command == "verify-tail":
            reports, _ = verify_spatial_tail(
                model, params["c0"], params["epsilon"], params["horizons"],
                params["n_samples"], seed, method=params["method"],
                dt=params["dt"], threads=threads)
        else:
            raise AssertionError(spec.command)
    except SwitchDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if reports:
        if spec.output_format == "csv":
            report_path = os.path.join(spec.output_dir, "report.csv")
            write_report_csv(reports, report_path)
        else:
            report_path = os.path.join(spec.output_dir, "report.json")
            write_report_json(reports, report_path)
        artifacts.append(report_path)

    meta = {
        "command": spec.command,
        "seed": seed,
        "version": __version__,
        "backend": _kernels.BACKEND,
        "threads": threads,
        "output_format": spec.output_format,
        "artifacts": [os.path.basename(a) for a in artifacts],
        "wall_time_s": round(time.monotonic() - t_start, 6),
    }
    with open(os.path.join(spec.output_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")

    return 3 if any_violated(reports) else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="switchdiff",
        description="Simulate and verify regime-switching diffusions.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True,
                        help="path to a JSON run configuration")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the master seed")
    parser.add_argument("--out", default=None,
                        help="override the output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="override the report format")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads; never changes reported numbers")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        spec = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if spec.command != args.command:
        print(f"error: config is for command {spec.command!r}, "
              f"invoked as {args.command!r}", file=sys.stderr)
        return 1

    seed = args.seed
    if seed is None and os.environ.get(ENV_SEED):
        try:
            seed = int(os.environ[ENV_SEED])
        except ValueError:
            print(f"error: {ENV_SEED} must be an integer", file=sys.stderr)
            return 1
    out_dir = args.out or os.environ.get(ENV_OUT) or None

    params = dict(spec.params)
    if seed is not None and "seed" in COMMAND_PARAMS[spec.command]:
        params["seed"] = seed
    spec = RunSpec(model=spec.model, command=spec.command, params=params,
                   output_dir=out_dir or spec.output_dir,
                   output_format=args.format or spec.output_format)

    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    return run(spec, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
