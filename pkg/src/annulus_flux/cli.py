"""Command line experiment runner.

Subcommands:

* ``solve``    -- one nonlinear solve from a JSON config; writes report.json,
                  fields.csv and pressure.csv.
* ``sweep``    -- continuation in lambda or flux; writes trace.csv.
* ``verify``   -- the oracle/identity acceptance table; exit 0 iff all pass.
* ``diagnose`` -- apply the diagnostics to a stored velocity CSV.

Exit codes: 0 success, 1 verification failure, 2 non-convergence (the report
is still written), 3 invalid configuration or input.  Reports are written
deterministically (sorted keys, repr floats); wall-clock metadata goes to a
separate run_meta.json so repeated runs of the same configuration produce
byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .boundary import BoundaryTrace, make_trace
from .diagnostics import diagnostics_for_fields
from .fields import read_velocity_csv, write_scalar_csv, write_velocity_csv
from .grid import PolarGrid, build_grid
from .navier_stokes import ContinuationTrace, SolverConfig, solve, sweep
from .oracle import make_profile
from .stokes import pressure_from_momentum
from .verify import format_table, run_checks

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_NO_CONVERGENCE = 2
EXIT_BAD_CONFIG = 3


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a JSON run configuration."""

    grid: PolarGrid
    trace: BoundaryTrace
    solver: SolverConfig
    sweep_parameter: str | None
    sweep_values: list[float] | None
    out_dir: str
    formats: list[str]

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(raw, dict):
            raise ConfigError("top-level config must be a JSON object")
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        def section(name, default=None):
            value = raw.get(name, default)
            if value is None:
                raise ConfigError(f"missing config section {name!r}")
            if not isinstance(value, dict):
                raise ConfigError(f"config section {name!r} must be an object")
            return value

        gspec = section("grid", {"n_r": 32, "n_theta": 64, "r_inner": 1.0, "r_outer": 2.0})
        try:
            grid = build_grid(
                int(gspec.get("n_r", 32)), int(gspec.get("n_theta", 64)),
                float(gspec.get("r_inner", 1.0)), float(gspec.get("r_outer", 2.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid: {exc}") from exc

        bspec = dict(section("boundary"))
        bspec.setdefault("r_inner", grid.r_inner)
        bspec.setdefault("r_outer", grid.r_outer)
        try:
            trace = make_trace(bspec)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"boundary: {exc}") from exc

        sspec = raw.get("solver", {})
        if not isinstance(sspec, dict):
            raise ConfigError("config section 'solver' must be an object")
        try:
            solver = SolverConfig(
                nu=float(raw.get("nu", 1.0)),
                lam=float(sspec.get("lambda", 1.0)),
                method=str(sspec.get("method", "newton")),
                tol=float(sspec.get("tol", 1e-10)),
                max_iter=int(sspec.get("max_iter", 200)),
                damping=float(sspec.get("damping", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver: {exc}") from exc

        sweep_parameter = None
        sweep_values = None
        if "sweep" in raw:
            wspec = section("sweep")
            sweep_parameter = wspec.get("parameter")
            if sweep_parameter not in ("lambda", "flux"):
                raise ConfigError("sweep.parameter must be 'lambda' or 'flux'")
            values = wspec.get("values")
            if not isinstance(values, list) or not values:
                raise ConfigError("sweep.values must be a non-empty list")
            try:
                sweep_values = [float(v) for v in values]
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"sweep.values: {exc}") from exc

        if "oracle" in raw:
            try:
                make_profile(section("oracle"))
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(f"oracle: {exc}") from exc

        ospec = raw.get("output", {})
        if not isinstance(ospec, dict):
            raise ConfigError("config section 'output' must be an object")
        out_dir = str(ospec.get("directory", "."))
        formats = ospec.get("formats", ["json", "csv"])
        if not isinstance(formats, list) or not all(f in ("json", "csv") for f in formats):
            raise ConfigError("output.formats entries must be 'json' or 'csv'")
        return cls(grid=grid, trace=trace, solver=solver,
                   sweep_parameter=sweep_parameter, sweep_values=sweep_values,
                   out_dir=out_dir, formats=list(formats))


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_meta(out: Path, command: str) -> None:
    _dump_json(out / "run_meta.json", {
        "command": command,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "threads": os.environ.get("ANNULUS_FLUX_THREADS", "1"),
    })


def cmd_solve(args) -> int:
    try:
        config = RunConfig.load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    out = Path(args.out or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = solve(config.grid, config.trace, config.solver)
    if "json" in config.formats:
        _dump_json(out / "report.json", report.to_dict())
    if "csv" in config.formats:
        write_velocity_csv(out / "fields.csv", report.u)
        write_scalar_csv(out / "pressure.csv", report.p)
    _write_meta(out, "solve")
    if not args.quiet:
        state = "converged" if report.converged else "NOT converged"
        print(f"solve {state} in {report.iterations} iterations: "
              f"J = {report.J:.6e}, flux = {report.flux:.6e} -> {out}")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _trace_csv(path: Path, trace: ContinuationTrace) -> None:
    lines = ["parameter,value,J,converged,iterations"]
    for pt in trace.points:
        lines.append(f"{trace.parameter},{pt.value:.17g},{pt.J:.17g},"
                     f"{int(pt.converged)},{pt.iterations}")
    path.write_text("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    try:
        config = RunConfig.load(args.config)
        if config.sweep_parameter is None:
            raise ConfigError("sweep command requires a 'sweep' config section")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    out = Path(args.out or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace = sweep(config.grid, config.trace, config.solver,
                  config.sweep_parameter, config.sweep_values)
    _trace_csv(out / "trace.csv", trace)
    _write_meta(out, "sweep")
    if not args.quiet:
        for pt in trace.points:
            flag = "ok" if pt.converged else "DIVERGED"
            print(f"  {config.sweep_parameter} = {pt.value:+.4f}: "
                  f"J = {pt.J:.6e} ({pt.iterations} its) {flag}")
        failure = trace.first_failure()
        if failure is not None:
            print(f"first failure at {config.sweep_parameter} = {failure}")
    return EXIT_OK if trace.all_converged() else EXIT_NO_CONVERGENCE


def cmd_verify(args) -> int:
    try:
        checks = run_checks(n_r=args.n_r, n_theta=args.n_theta)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    table = format_table(checks)
    if not args.quiet:
        print(table)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY_FAILED


def cmd_diagnose(args) -> int:
    try:
        u = read_velocity_csv(args.fields)
    except (OSError, ValueError) as exc:
        print(f"cannot load fields: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.nu < 0 or not 0.0 <= args.lam <= 1.0:
        print("diagnose requires nu >= 0 and 0 <= lambda <= 1", file=sys.stderr)
        return EXIT_BAD_CONFIG
    grid = u.grid
    p = pressure_from_momentum(grid, u, args.lam, args.nu)
    record = diagnostics_for_fields(grid, u, p, args.lam, args.nu)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "diagnostics.json", record.to_dict())
    _write_meta(out, "diagnose")
    if not args.quiet:
        print(json.dumps(record.to_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annulus-flux",
        description="Steady Navier-Stokes on the annulus with net boundary flux",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one nonlinear solve from a JSON config")
    p_solve.add_argument("--config", required=True, help="path to the JSON run configuration")
    p_solve.add_argument("--out", default=None, help="output directory (overrides config)")
    p_solve.add_argument("--quiet", action="store_true")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="continuation in lambda or flux")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--quiet", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the oracle/identity acceptance table")
    p_verify.add_argument("--n-r", type=int, default=32, dest="n_r")
    p_verify.add_argument("--n-theta", type=int, default=64, dest="n_theta")
    p_verify.add_argument("--quiet", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_diag = sub.add_parser("diagnose", help="apply the diagnostics to stored fields")
    p_diag.add_argument("fields", help="velocity CSV written by solve (columns r,theta,u_r,u_theta)")
    p_diag.add_argument("--lambda", dest="lam", type=float, required=True,
                        help="homotopy factor multiplying the convective term")
    p_diag.add_argument("--nu", type=float, required=True,
                        help="viscosity (0 diagnoses an Euler candidate)")
    p_diag.add_argument("--out", default=None)
    p_diag.add_argument("--quiet", action="store_true")
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
