"""Orchestration of the split method.

Per run: trace both curve families once (the field is time-independent),
assemble the per-curve systems once, bootstrap the initial state, then
iterate the two-substep scheme.  Each step solves the advection-family
1D problems, scatters them onto a fresh transfer grid, restricts onto the
rotated family, solves the cross-diffusion problems, scatters again, and
restricts back.  Between steps the advection-family values and the grid
represent the same time level.

Per-curve work shares nothing mutable and can run on a thread pool; curves
are recorded into per-worker private grids merged by the order-free
reduction, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import fem1d, kernels, tracer, transfer
from .errors import NumericalError
from .field import check_divergence_free, inflow_boundary, require_nonempty

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SchemeParams:
    theta: float
    dt: float
    steps: int
    eps_stat: float = 1e-8

    def __post_init__(self):
        if not (0.0 <= self.theta < 1.0):
            raise ValueError("theta must lie in [0, 1)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("step count must be non-negative")


@dataclass(frozen=True)
class Discretization:
    curves_beta: int = 129
    curves_gamma: int = 129
    kx: int = 64
    ky: int = 64
    h_trace: float | None = None  # default: min domain extent / 1000
    h_fem: float | None = None  # default: min domain extent / 64
    edge_samples: int = 512

    def __post_init__(self):
        for name in ("curves_beta", "curves_gamma"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")
        if self.kx < 2 or self.ky < 2:
            raise ValueError("grid cell counts must be at least 2")


@dataclass
class SplitState:
    j: int
    beta_solutions: list  # CurveSolution per advection-family curve
    grid: transfer.SolutionGrid


@dataclass
class RunReport:
    mode: str = "transient"
    steps_run: int = 0
    stationary_reached: bool = False
    residual_history: list = dc_field(default_factory=list)
    fallbacks: transfer.FallbackCounts = dc_field(default_factory=transfer.FallbackCounts)
    timings: dict = dc_field(default_factory=dict)
    warnings: list = dc_field(default_factory=list)
    workers: int = 1
    backend: str = kernels.BACKEND
    curves_beta: int = 0
    curves_gamma: int = 0

    def to_text(self):
        lines = [
            "run report",
            "----------",
            f"mode:               {self.mode}",
            f"kernel backend:     {self.backend}",
            f"workers:            {self.workers}",
            f"curves (beta/gamma): {self.curves_beta}/{self.curves_gamma}",
            f"steps run:          {self.steps_run}",
            f"stationary reached: {self.stationary_reached}",
            f"node fills two-line/single-line/nearest: "
            f"{self.fallbacks.two_line}/{self.fallbacks.single_line}/{self.fallbacks.nearest_record}",
        ]
        if self.residual_history:
            lines.append(f"final residual:     {self.residual_history[-1]:.6e}")
        lines.append("phase timings (s):")
        for name, seconds in sorted(self.timings.items()):
            lines.append(f"  {name:<12} {seconds:10.3f}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


class _Timer:
    def __init__(self, report, name):
        self.report = report
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.report.timings[self.name] = (
            self.report.timings.get(self.name, 0.0) + time.perf_counter() - self.t0
        )
        return False


class SplitSolver:
    """Holds the traced curve families and their static 1D systems."""

    def __init__(self, problem, disc=None, workers=1):
        self.problem = problem
        self.disc = disc or Discretization()
        self.workers = max(1, int(workers))
        self.report = RunReport(workers=self.workers)
        self._pool = None
        self._prepare()

    # -- setup ------------------------------------------------------------

    def _prepare(self):
        problem, disc = self.problem, self.disc
        dom = problem.domain
        spec = problem.field

        div = check_divergence_free(spec, dom)
        if not div.passed:
            msg = (f"advection field is not divergence-free "
                   f"(max |div| = {div.max_divergence:.3e}); proceeding anyway")
            log.warning(msg)
            self.report.warnings.append(msg)
        self.report.warnings.extend(problem.constant_coefficient_notes())

        opts = tracer.TraceOptions.for_domain(dom, h_trace=disc.h_trace,
                                              eps_field=problem.eps_field)
        self.trace_opts = opts
        h_fem = disc.h_fem if disc.h_fem is not None else dom.min_extent / 64.0

        with _Timer(self.report, "trace"):
            inflow_b = require_nonempty(
                inflow_boundary(spec, dom, "beta", disc.edge_samples), "beta")
            inflow_g = require_nonempty(
                inflow_boundary(spec, dom, "gamma", disc.edge_samples), "gamma")
            seeds_b = tracer.seed_points(inflow_b, disc.curves_beta)
            seeds_g = tracer.seed_points(inflow_g, disc.curves_gamma)
            self.beta_curves = tracer.trace_family(spec, seeds_b, "beta", dom, opts)
            self.gamma_curves = tracer.trace_family(spec, seeds_g, "gamma", dom, opts)
        self.report.curves_beta = len(self.beta_curves)
        self.report.curves_gamma = len(self.gamma_curves)

        with _Timer(self.report, "assemble"):
            self.beta_meshes = [fem1d.build_mesh(c, h_fem) for c in self.beta_curves]
            self.gamma_meshes = [fem1d.build_mesh(c, h_fem) for c in self.gamma_curves]
            self.beta_systems = [fem1d.assemble(c, m, problem, "s")
                                 for c, m in zip(self.beta_curves, self.beta_meshes)]
            self.gamma_systems = [fem1d.assemble(c, m, problem, "m")
                                  for c, m in zip(self.gamma_curves, self.gamma_meshes)]

    # -- worker helpers ----------------------------------------------------

    def _map(self, fn, items):
        """Order-preserving map, threaded in contiguous chunks when workers > 1."""
        if self.workers == 1 or len(items) <= 1:
            return [fn(it) for it in items]
        chunks = np.array_split(np.arange(len(items)), self.workers)
        chunks = [c for c in chunks if c.size]

        def run_chunk(idx):
            return [fn(items[i]) for i in idx]

        out = []
        for part in self._map_tasks(run_chunk, chunks):
            out.extend(part)
        return out

    def _map_tasks(self, fn, tasks):
        """Order-preserving map of coarse tasks over the thread pool."""
        if self.workers == 1 or len(tasks) <= 1:
            return [fn(t) for t in tasks]
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.workers)
        return list(self._pool.map(fn, tasks))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # -- grid transfer ------------------------------------------------------

    def _bbox(self):
        dom = self.problem.domain
        return (dom.x_min, dom.x_max, dom.y_min, dom.y_max)

    def _record_family(self, solutions):
        """Scatter curve solutions onto a fresh grid and collapse to nodes.

        With several workers each chunk records into a private grid; the
        merge is the order-free min/max reduction, so the result is
        bit-identical for any worker count.  Boundary nodes are pinned to the
        Dirichlet value afterwards.
        """
        disc = self.disc
        with _Timer(self.report, "record"):
            if self.workers == 1:
                grid = transfer.TransferGrid(self._bbox(), disc.kx, disc.ky)
                grid.record_curves(solutions)
            else:
                chunks = np.array_split(np.arange(len(solutions)), self.workers)

                def record_chunk(idx):
                    g = transfer.TransferGrid(self._bbox(), disc.kx, disc.ky)
                    g.record_curves([solutions[i] for i in idx])
                    return g

                grids = self._map_tasks(record_chunk, [c for c in chunks if c.size])
                grid = grids[0]
                for g in grids[1:]:
                    grid.merge(g)
        with _Timer(self.report, "nodes"):
            sg = grid.to_grid_nodes()
            self.report.fallbacks += grid.last_fallbacks
        sg.values[0, :] = 0.0
        sg.values[-1, :] = 0.0
        sg.values[:, 0] = 0.0
        sg.values[:, -1] = 0.0
        if not np.all(np.isfinite(sg.values)):
            raise NumericalError("non-finite grid node values after transfer")
        return sg

    def _restrict(self, sg, curves, meshes):
        with _Timer(self.report, "restrict"):
            if self.workers == 1:
                return transfer.restrict_many(sg, meshes)
            chunks = np.array_split(np.arange(len(meshes)), self.workers)
            parts = self._map_tasks(
                lambda idx: transfer.restrict_many(sg, [meshes[i] for i in idx]),
                [c for c in chunks if c.size])
            return [sol for part in parts for sol in part]

    # -- scheme -------------------------------------------------------------

    def bootstrap_u0(self):
        """Initial state: the user-supplied u0 expression sampled onto the
        advection-family curves, or the per-curve stationary solve of the
        s-form system."""
        problem = self.problem
        with _Timer(self.report, "bootstrap"):
            if problem.u0 is not None:
                sols = []
                for mesh in self.beta_meshes:
                    vals = np.asarray(problem.u0(mesh.points[:, 0], mesh.points[:, 1]),
                                      dtype=np.float64)
                    vals[0] = 0.0
                    vals[-1] = 0.0
                    sols.append(fem1d.CurveSolution(vals, mesh))
            else:
                sols = self._map(fem1d.stationary_solve, self.beta_systems)
        grid = self._record_family(sols)
        return SplitState(j=0, beta_solutions=sols, grid=grid)

    def split_step(self, state, params):
        """Advance one time step (two substeps with two grid transfers)."""
        theta, dt = params.theta, params.dt

        with _Timer(self.report, "substep_a"):
            half = self._map(
                lambda su: fem1d.theta_step(su[0], su[1], theta, dt),
                list(zip(self.beta_systems, state.beta_solutions)))
        self._check_finite(half, "advection substep", state.j)
        grid_half = self._record_family(half)

        gamma_in = self._restrict(grid_half, self.gamma_curves, self.gamma_meshes)
        with _Timer(self.report, "substep_b"):
            gamma_out = self._map(
                lambda su: fem1d.theta_step(su[0], su[1], theta, dt),
                list(zip(self.gamma_systems, gamma_in)))
        self._check_finite(gamma_out, "cross-diffusion substep", state.j)
        grid_full = self._record_family(gamma_out)

        beta_next = self._restrict(grid_full, self.beta_curves, self.beta_meshes)
        return SplitState(j=state.j + 1, beta_solutions=beta_next, grid=grid_full)

    @staticmethod
    def _check_finite(solutions, label, step):
        for k, sol in enumerate(solutions):
            if not np.all(np.isfinite(sol.values)):
                raise NumericalError(f"non-finite values in {label} at step {step}, curve {k}")

    def run(self, params, mode="transient", on_step=None):
        """Run the scheme; returns (final SolutionGrid, RunReport).

        transient mode runs exactly params.steps steps; stationary mode stops
        earlier once max|u_{j+1} - u_j| / dt < params.eps_stat on grid nodes.
        """
        if mode not in ("transient", "stationary"):
            raise ValueError("mode must be 'transient' or 'stationary'")
        report = self.report
        report.mode = mode
        state = self.bootstrap_u0()
        if on_step is not None:
            on_step(0, state.grid)
        for _ in range(params.steps):
            prev_vals = state.grid.values
            state = self.split_step(state, params)
            report.steps_run = state.j
            residual = float(np.max(np.abs(state.grid.values - prev_vals))) / params.dt
            report.residual_history.append(residual)
            if on_step is not None:
                on_step(state.j, state.grid)
            if mode == "stationary" and residual < params.eps_stat:
                report.stationary_reached = True
                break
        log.info("run finished after %d steps (mode=%s, stationary=%s)",
                 report.steps_run, mode, report.stationary_reached)
        return state.grid, report


def run(problem, params, disc=None, mode="transient", workers=1, on_step=None):
    """One-call convenience wrapper around SplitSolver."""
    with SplitSolver(problem, disc=disc, workers=workers) as solver:
        return solver.run(params, mode=mode, on_step=on_step)
