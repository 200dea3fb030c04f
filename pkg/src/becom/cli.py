"""Command-line interface: config parsing, sweeps, and table output.

Config documents are line-oriented ``key=value`` with ``#`` comments.
Keys are the physical parameter names plus ``sweep``, ``range``,
``outputs``, ``out``, and ``format``.  Sweeps are evaluated pointwise
(optionally in parallel) and written as CSV or JSON with a fixed column
schema; failed points are emitted with a status column, never dropped.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .fluctuations import (NonPhysicalStateError, SingularSystemError,
                           build_drift, fluctuation_report,
                           lyapunov_residual, solve_lyapunov)
from .model import ParameterError, PhysicalParams
from .spectrum import default_grid, power_spectrum
from .steadystate import (ConvergenceError, resonance_detuning,
                          solve_steady_state)

SWEEP_VARIABLES = ("delta_c", "omega_sw", "temperature", "omega")
OUTPUT_KINDS = ("steady", "fluctuations", "entanglement", "spectrum",
                "resonance")
COLUMNS = ("delta_c", "omega_sw", "temperature", "alpha2", "beta1_2", "g",
           "delta_n_ph", "delta_n_b", "e_n", "omega", "s_x", "omega_eff",
           "gamma_eff", "delta_c_res", "stable", "status")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

RESIDUAL_BOUND = 1e-10

_PARAM_FIELDS = tuple(f.name for f in fields(PhysicalParams))
_INT_FIELDS = ("n_atoms", "n_periods")


class ConfigError(ValueError):
    """Malformed or invalid configuration document."""


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    sweep_variable: str | None = None
    sweep_range: tuple[float, float, int] | None = None
    outputs: tuple[str, ...] = ("steady",)
    output_path: str | None = None
    format: str = "csv"


def _parse_number(key: str, value: str, line_no: int) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(
            f"line {line_no}: {key}: not a number: {value!r}") from None
    if key in _INT_FIELDS:
        if x != int(x):
            raise ConfigError(
                f"line {line_no}: {key}: expected an integer, got {value!r}")
        return int(x)
    return x


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document, applying defaults.

    Raises :class:`ConfigError` with a line number for grammar problems
    and with the offending field name for validation problems.
    """
    param_kwargs: dict = {}
    sweep_variable = None
    sweep_range = None
    outputs: tuple[str, ...] = ("steady",)
    output_path = None
    fmt = "csv"

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key=value: {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _PARAM_FIELDS:
            if key in param_kwargs:
                raise ConfigError(f"line {line_no}: duplicate key {key}")
            param_kwargs[key] = _parse_number(key, value, line_no)
        elif key == "sweep":
            if value == "none":
                sweep_variable = None
            elif value in SWEEP_VARIABLES:
                sweep_variable = value
            else:
                raise ConfigError(
                    f"line {line_no}: sweep: unknown variable {value!r} "
                    f"(choices: {', '.join(SWEEP_VARIABLES)})")
        elif key == "range":
            parts = [p.strip() for p in value.split(",")]
            if len(parts) != 3:
                raise ConfigError(
                    f"line {line_no}: range: expected start,stop,count")
            try:
                start, stop = float(parts[0]), float(parts[1])
                count = int(float(parts[2]))
                if float(parts[2]) != count:
                    raise ValueError
            except ValueError:
                raise ConfigError(
                    f"line {line_no}: range: expected start,stop,count "
                    f"numbers, got {value!r}") from None
            sweep_range = (start, stop, count)
        elif key == "outputs":
            requested = [p.strip() for p in value.split(",") if p.strip()]
            for name in requested:
                if name not in OUTPUT_KINDS:
                    raise ConfigError(
                        f"line {line_no}: outputs: unknown kind {name!r}")
            outputs = tuple(k for k in OUTPUT_KINDS if k in requested)
        elif key == "out":
            output_path = value
        elif key == "format":
            if value not in ("csv", "json"):
                raise ConfigError(
                    f"line {line_no}: format must be csv or json")
            fmt = value
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")

    # gamma tracks kappa at the standard ratio unless given explicitly
    if "kappa" in param_kwargs and "gamma" not in param_kwargs:
        param_kwargs["gamma"] = 0.001 * param_kwargs["kappa"]
    try:
        params = PhysicalParams(**param_kwargs)
        params.validate()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    config = RunConfig(params=params, sweep_variable=sweep_variable,
                       sweep_range=sweep_range, outputs=outputs,
                       output_path=output_path, format=fmt)
    _validate_config(config)
    return config


def _validate_config(config: RunConfig) -> None:
    sweep, rng = config.sweep_variable, config.sweep_range
    if sweep is not None:
        if rng is None:
            raise ConfigError(f"sweep={sweep} requires a range")
        start, stop, count = rng
        if count < 2:
            raise ConfigError(f"range: count must be >= 2, got {count}")
        if stop < start:
            raise ConfigError(
                f"range: stop must not be below start, got {start},{stop}")
    elif rng is not None:
        raise ConfigError("range given without sweep")
    if "spectrum" in config.outputs:
        if config.outputs != ("spectrum",):
            raise ConfigError(
                "outputs=spectrum cannot be combined with other outputs")
        if sweep not in (None, "omega"):
            raise ConfigError(
                f"outputs=spectrum requires sweep=omega or none, "
                f"got sweep={sweep}")
    elif sweep == "omega":
        raise ConfigError("sweep=omega requires outputs=spectrum")
    # sweep endpoints must themselves be valid parameter sets
    if sweep in ("delta_c", "omega_sw", "temperature"):
        for endpoint in rng[:2]:
            try:
                replace(config.params, **{sweep: endpoint}).validate()
            except ParameterError as exc:
                raise ConfigError(f"range: {exc}") from exc


def serialize_config(config: RunConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = [f"{name}={getattr(config.params, name)!r}"
             for name in _PARAM_FIELDS]
    if config.sweep_variable is not None:
        start, stop, count = config.sweep_range
        lines.append(f"sweep={config.sweep_variable}")
        lines.append(f"range={start!r},{stop!r},{count}")
    lines.append("outputs=" + ",".join(config.outputs))
    if config.output_path is not None:
        lines.append(f"out={config.output_path}")
    lines.append(f"format={config.format}")
    return "\n".join(lines) + "\n"


def _new_row(params: PhysicalParams) -> dict:
    row = dict.fromkeys(COLUMNS)
    row["delta_c"] = params.delta_c
    row["omega_sw"] = params.omega_sw
    row["temperature"] = params.temperature
    row["status"] = "ok"
    return row


def _evaluate_point(task: tuple) -> tuple[dict, str | None]:
    """One sweep point; returns the row and an error message if any."""
    params, outputs, verify = task
    row = _new_row(params)
    try:
        state = solve_steady_state(params)
    except (ConvergenceError, ParameterError) as exc:
        row["status"] = "error"
        return row, str(exc)
    if "steady" in outputs:
        row["alpha2"] = state.alpha**2
        row["beta1_2"] = state.beta_1**2
        row["g"] = state.coupling_g
    drift = build_drift(state, params)
    row["stable"] = drift.stable
    message = None
    if "fluctuations" in outputs or "entanglement" in outputs:
        if not drift.stable:
            row["status"] = "unstable"
            message = "drift matrix unstable; no stationary fluctuations"
        else:
            try:
                cov = solve_lyapunov(drift)
                report = fluctuation_report(cov)
            except (NonPhysicalStateError, SingularSystemError) as exc:
                row["status"] = "error"
                return row, str(exc)
            if "fluctuations" in outputs:
                row["delta_n_ph"] = report.delta_n_ph
                row["delta_n_b"] = report.delta_n_b
            if "entanglement" in outputs:
                row["e_n"] = report.log_negativity
            if verify:
                bound = RESIDUAL_BOUND * float(drift.d_upper.max())
                if lyapunov_residual(drift, cov) > bound:
                    row["status"] = "verify-failed"
                    message = "Lyapunov residual exceeds bound"
    if "resonance" in outputs:
        try:
            row["delta_c_res"] = resonance_detuning(params)
        except ConvergenceError as exc:
            row["status"] = "error"
            return row, str(exc)
    return row, message


def _spectrum_rows(config: RunConfig) -> tuple[list[dict], list[str]]:
    params = config.params
    errors: list[str] = []
    try:
        state = solve_steady_state(params)
    except (ConvergenceError, ParameterError) as exc:
        row = _new_row(params)
        row["status"] = "error"
        return [row], [str(exc)]
    if config.sweep_variable == "omega":
        start, stop, count = config.sweep_range
        grid = np.linspace(start, stop, count)
    else:
        grid = default_grid(state)
    stable = build_drift(state, params).stable
    if not stable:
        rows = []
        for w in grid:
            row = _new_row(params)
            row["omega"] = float(w)
            row["stable"] = False
            row["status"] = "unstable"
            rows.append(row)
        return rows, ["drift matrix unstable; spectrum not evaluated"]
    result = power_spectrum(grid, state, params)
    rows = []
    for pt in result.points:
        row = _new_row(params)
        row["omega"] = pt.omega
        row["s_x"] = pt.s_x
        row["omega_eff"] = pt.omega_eff
        row["gamma_eff"] = pt.gamma_eff
        row["stable"] = True
        rows.append(row)
    return rows, errors


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _write_csv(rows: list[dict], stream) -> None:
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in COLUMNS])


def _write_json(rows: list[dict], stream) -> None:
    clean = [{c: row[c] for c in COLUMNS} for row in rows]
    json.dump(clean, stream, indent=2)
    stream.write("\n")


def run(config: RunConfig, jobs: int = 1, verify: bool = False) -> int:
    """Evaluate the configured points and write the output table.

    Returns the process exit code: 0 if every point succeeded, 2 if any
    point failed or was unstable, 3 on output I/O failure.
    """
    if "spectrum" in config.outputs:
        rows, errors = _spectrum_rows(config)
    else:
        if config.sweep_variable is not None:
            start, stop, count = config.sweep_range
            points = [replace(config.params, **{config.sweep_variable: float(v)})
                      for v in np.linspace(start, stop, count)]
        else:
            points = [config.params]
        tasks = [(p, config.outputs, verify) for p in points]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_evaluate_point, tasks,
                                        chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            results = [_evaluate_point(t) for t in tasks]
        rows = [r for r, _ in results]
        errors = [f"point {i}: {msg}"
                  for i, (_, msg) in enumerate(results) if msg is not None]

    for message in errors:
        print(f"becom: {message}", file=sys.stderr)
    try:
        if config.output_path is None:
            _emit(rows, config.format, sys.stdout)
        else:
            with open(config.output_path, "w", newline="") as fh:
                _emit(rows, config.format, fh)
    except OSError as exc:
        print(f"becom: output failed: {exc}", file=sys.stderr)
        return EXIT_IO
    if any(row["status"] != "ok" for row in rows):
        return EXIT_SOLVER
    return EXIT_OK


def _emit(rows: list[dict], fmt: str, stream) -> None:
    if fmt == "json":
        _write_json(rows, stream)
    else:
        _write_csv(rows, stream)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="becom",
        description="Condensate-cavity steady states, fluctuations, "
                    "entanglement, and spectra.")
    sub = parser.add_subparsers(dest="command", required=True)
    presets = {
        "steady": "mean-field steady state (alpha^2, beta1^2, G)",
        "sweep": "run the config's sweep with its configured outputs",
        "spectrum": "displacement power spectrum",
        "resonance": "self-consistent cavity resonance detuning",
    }
    for name, help_text in presets.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="config document path")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--verify", action="store_true",
                       help="re-check Lyapunov residuals on ok rows")
        p.add_argument("--jobs", type=int,
                       help="concurrent sweep evaluations "
                            "(default: BECOM_JOBS or 1)")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    preset_outputs = {"steady": "steady", "spectrum": "spectrum",
                      "resonance": "resonance"}
    try:
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        else:
            text = ""
        # the subcommand preset overrides any outputs= in the document
        if args.command in preset_outputs:
            text += f"\noutputs={preset_outputs[args.command]}"
        config = parse_config(text)
        if args.command == "sweep" and config.sweep_variable is None:
            raise ConfigError("sweep subcommand requires sweep= in config")

        if args.out is not None:
            config = replace(config, output_path=args.out)
        if args.format is not None:
            config = replace(config, format=args.format)

        if args.jobs is not None:
            jobs = args.jobs
        else:
            env = os.environ.get("BECOM_JOBS", "1")
            try:
                jobs = int(env)
            except ValueError:
                raise ConfigError(
                    f"BECOM_JOBS must be an integer, got {env!r}") from None
        if jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {jobs}")
    except ConfigError as exc:
        print(f"becom: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    return run(config, jobs=jobs, verify=args.verify)


if __name__ == "__main__":
    sys.exit(main())
