"""Command-line front end.

Subcommands: ``solve`` (split method), ``reference`` (unsplit 2D oracle),
``compare`` (both + relative errors against configured tolerances),
``trace-debug`` (dump the curve families).  Configuration is a flat
``key = value`` text file with expressions quoted.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure,
4 tolerance failure in ``compare``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import expr, reference, tracer, transfer
from .errors import AdrSplitError, ConfigError, ExprSyntaxError
from .field import DomainRect, inflow_boundary, require_nonempty
from .problem import ProblemConfig
from .stepper import Discretization, SchemeParams, SplitSolver

log = logging.getLogger(__name__)

_FLOAT_KEYS = {
    "x_min": 0.0, "x_max": 1.0, "y_min": 0.0, "y_max": 1.0,
    "theta": 0.5, "dt": 0.001, "eps_stat": 1e-8, "eps_field": 1e-12,
    "h_trace": None, "h_fem": None,
    "tol_linf": 0.10, "tol_l1": 0.05,
}
_INT_KEYS = {
    "steps": 50, "curves_beta": 129, "curves_gamma": 129,
    "kx": 64, "ky": 64, "edge_samples": 512, "workers": 1,
    "ref_cells_x": 15, "ref_cells_y": 15,
}
_EXPR_KEYS = {"mu": "1", "sigma": "1", "beta1": None, "beta2": None, "f": "0", "u0": None}
_STR_KEYS = {"mode": "transient"}
_REQUIRED = ("beta1", "beta2")


@dataclass
class RunConfig:
    problem: ProblemConfig
    scheme: SchemeParams
    disc: Discretization
    mode: str = "transient"
    workers: int = 1
    ref_cells_x: int = 15
    ref_cells_y: int = 15
    tol_linf: float = 0.10
    tol_l1: float = 0.05
    raw: dict = dc_field(default_factory=dict)


def _strip_comment(line):
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out)


def _unquote(value):
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_config_text(text):
    """Flat key = value lines into a raw string dict (quotes stripped)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = _unquote(value.strip())
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def config_from_mapping(raw):
    """Validate a raw string mapping and build a RunConfig with defaults."""
    known = set(_FLOAT_KEYS) | set(_INT_KEYS) | set(_EXPR_KEYS) | set(_STR_KEYS)
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    values = {}
    for key, default in _FLOAT_KEYS.items():
        if key in raw:
            try:
                values[key] = float(raw[key])
            except ValueError:
                raise ConfigError(f"key {key!r}: {raw[key]!r} is not a number")
        else:
            values[key] = default
    for key, default in _INT_KEYS.items():
        if key in raw:
            try:
                values[key] = int(raw[key])
            except ValueError:
                raise ConfigError(f"key {key!r}: {raw[key]!r} is not an integer")
        else:
            values[key] = default
    exprs = {}
    for key, default in _EXPR_KEYS.items():
        source = raw.get(key, default)
        if source is None:
            exprs[key] = None
            continue
        try:
            exprs[key] = expr.parse(source)
        except ExprSyntaxError as exc:
            raise ConfigError(f"key {key!r}: {exc}")
    mode = raw.get("mode", _STR_KEYS["mode"])
    if mode not in ("transient", "stationary"):
        raise ConfigError(f"key 'mode': must be 'transient' or 'stationary', got {mode!r}")

    try:
        domain = DomainRect(values["x_min"], values["x_max"], values["y_min"], values["y_max"])
        problem = ProblemConfig(domain=domain, mu=exprs["mu"], sigma=exprs["sigma"],
                                beta1=exprs["beta1"], beta2=exprs["beta2"], f=exprs["f"],
                                u0=exprs["u0"], eps_field=values["eps_field"])
        scheme = SchemeParams(theta=values["theta"], dt=values["dt"],
                              steps=values["steps"], eps_stat=values["eps_stat"])
        disc = Discretization(curves_beta=values["curves_beta"],
                              curves_gamma=values["curves_gamma"],
                              kx=values["kx"], ky=values["ky"],
                              h_trace=values["h_trace"], h_fem=values["h_fem"],
                              edge_samples=values["edge_samples"])
    except ValueError as exc:
        raise ConfigError(str(exc))
    if values["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    if values["ref_cells_x"] < 2 or values["ref_cells_y"] < 2:
        raise ConfigError("reference mesh needs at least 2 cells per direction")

    return RunConfig(problem=problem, scheme=scheme, disc=disc, mode=mode,
                     workers=values["workers"],
                     ref_cells_x=values["ref_cells_x"], ref_cells_y=values["ref_cells_y"],
                     tol_linf=values["tol_linf"], tol_l1=values["tol_l1"], raw=dict(raw))


def load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path!r} does not exist")
    return config_from_mapping(parse_config_text(p.read_text(encoding="utf-8")))


def _setup_logging():
    level_name = os.environ.get("ADR_SPLIT_LOG", "info").strip().lower()
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_grid(sg, out, stem, vtk):
    transfer.write_csv(sg, out / f"{stem}.csv")
    if vtk:
        transfer.write_vtk(sg, out / f"{stem}.vtk")


def _cmd_solve(args):
    cfg = load_config(args.config)
    workers = args.workers if args.workers is not None else cfg.workers
    out = _out_dir(args)
    on_step = None
    if args.snapshots:
        def on_step(j, grid):
            if j % args.snapshots == 0:
                _write_grid(grid, out, f"snapshot_{j:04d}", args.vtk)
    with SplitSolver(cfg.problem, disc=cfg.disc, workers=workers) as solver:
        grid, report = solver.run(cfg.scheme, mode=cfg.mode, on_step=on_step)
    _write_grid(grid, out, "solution", args.vtk)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    print(f"solution written to {out / 'solution.csv'} "
          f"({report.steps_run} steps, backend {report.backend})")
    return 0


def _cmd_reference(args):
    cfg = load_config(args.config)
    out = _out_dir(args)
    mesh = reference.build_tri_mesh(cfg.problem.domain, cfg.ref_cells_x, cfg.ref_cells_y)
    grid = reference.solve_stationary_2d(cfg.problem, mesh)
    _write_grid(grid, out, "reference", args.vtk)
    print(f"reference solution written to {out / 'reference.csv'} "
          f"({mesh.n_elements} elements)")
    return 0


def _cmd_compare(args):
    cfg = load_config(args.config)
    workers = args.workers if args.workers is not None else cfg.workers
    out = _out_dir(args)
    with SplitSolver(cfg.problem, disc=cfg.disc, workers=workers) as solver:
        grid, report = solver.run(cfg.scheme, mode=cfg.mode)
    mesh = reference.build_tri_mesh(cfg.problem.domain, cfg.ref_cells_x, cfg.ref_cells_y)
    ref_grid = reference.solve_stationary_2d(cfg.problem, mesh)
    resampled = transfer.resample(grid, mesh.nx, mesh.ny)
    err_inf, err_l1 = reference.compare(resampled, ref_grid)
    _write_grid(grid, out, "solution", args.vtk)
    _write_grid(ref_grid, out, "reference", args.vtk)
    ok = err_inf <= cfg.tol_linf and err_l1 <= cfg.tol_l1
    lines = [
        f"relative L_inf error: {err_inf:.6f} (tolerance {cfg.tol_linf:.6f})",
        f"relative L_1 error:   {err_l1:.6f} (tolerance {cfg.tol_l1:.6f})",
        f"result: {'PASS' if ok else 'FAIL'}",
    ]
    text = "\n".join(lines)
    print(text)
    (out / "compare_report.txt").write_text(text + "\n" + report.to_text(), encoding="utf-8")
    return 0 if ok else 4


def _cmd_trace_debug(args):
    cfg = load_config(args.config)
    out = _out_dir(args)
    problem, disc = cfg.problem, cfg.disc
    spec = problem.field
    opts = tracer.TraceOptions.for_domain(problem.domain, h_trace=disc.h_trace,
                                          eps_field=problem.eps_field)
    for family, count in (("beta", disc.curves_beta), ("gamma", disc.curves_gamma)):
        inflow = require_nonempty(
            inflow_boundary(spec, problem.domain, family, disc.edge_samples), family)
        seeds = tracer.seed_points(inflow, count)
        curves = tracer.trace_family(spec, seeds, family, problem.domain, opts)
        path = out / f"{family}_curves.csv"
        tracer.dump_family_csv(curves, path)
        print(f"{len(curves)} {family} curves written to {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adr-split",
        description="Directional diffusion splitting solver for 2D "
                    "advection-diffusion-reaction problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to the key = value config file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--vtk", action="store_true", help="also write legacy-VTK files")

    p_solve = sub.add_parser("solve", help="run the split solver")
    add_common(p_solve)
    p_solve.add_argument("--workers", type=int, default=None, help="worker thread count")
    p_solve.add_argument("--snapshots", type=int, default=0, metavar="EVERY",
                         help="write a grid snapshot every EVERY steps")
    p_solve.set_defaults(func=_cmd_solve)

    p_ref = sub.add_parser("reference", help="run the unsplit 2D oracle solver")
    add_common(p_ref)
    p_ref.set_defaults(func=_cmd_reference)

    p_cmp = sub.add_parser("compare", help="run both solvers and compare")
    add_common(p_cmp)
    p_cmp.add_argument("--workers", type=int, default=None, help="worker thread count")
    p_cmp.set_defaults(func=_cmd_compare)

    p_trace = sub.add_parser("trace-debug", help="dump traced curve families as CSV")
    add_common(p_trace)
    p_trace.set_defaults(func=_cmd_trace_debug)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AdrSplitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
