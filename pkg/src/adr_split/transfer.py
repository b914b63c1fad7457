"""Coupling layer between the two curve families.

Curve solutions are scattered onto a rectangular line grid as per-segment
(min-coordinate, value) / (max-coordinate, value) intersection records,
collapsed to grid-node values by two-line averaging, and sampled anywhere by
bilinear interpolation.  The record update is an order-free reduction
(strict coordinate comparison with a seed-parameter tie-break), so the final
grid state does not depend on the order in which curves are recorded and
private per-worker grids can be merged afterwards with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import EmptyGridError, OutOfDomainError
from .fem1d import CurveSolution

_BOX_TOL = 1e-10


@dataclass
class FallbackCounts:
    """How grid nodes were filled by to_grid_nodes."""

    two_line: int = 0
    single_line: int = 0
    nearest_record: int = 0

    def __iadd__(self, other):
        self.two_line += other.two_line
        self.single_line += other.single_line
        self.nearest_record += other.nearest_record
        return self


@dataclass
class SolutionGrid:
    """Node values on the (kx+1) x (ky+1) grid over the bounding box."""

    bbox: tuple  # (a, b, c, d)
    values: np.ndarray  # (ky+1, kx+1), row-major by y then x

    @property
    def kx(self):
        return self.values.shape[1] - 1

    @property
    def ky(self):
        return self.values.shape[0] - 1

    def node_coords(self):
        a, b, c, d = self.bbox
        return (a + np.arange(self.kx + 1) * ((b - a) / self.kx),
                c + np.arange(self.ky + 1) * ((d - c) / self.ky))

    def copy(self):
        return SolutionGrid(self.bbox, self.values.copy())


def sample_bilinear_many(sg, px, py):
    """Bilinear samples at arrays of points (clamped within 1e-10 of the box)."""
    a, b, c, d = sg.bbox
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    if (np.any(px < a - _BOX_TOL) or np.any(px > b + _BOX_TOL)
            or np.any(py < c - _BOX_TOL) or np.any(py > d + _BOX_TOL)):
        bad = ((px < a - _BOX_TOL) | (px > b + _BOX_TOL)
               | (py < c - _BOX_TOL) | (py > d + _BOX_TOL))
        i = int(np.argmax(bad))
        raise OutOfDomainError(
            f"point ({px.ravel()[i]:.17g}, {py.ravel()[i]:.17g}) lies outside the bounding box"
        )
    cx = np.clip(px, a, b)
    cy = np.clip(py, c, d)
    out = np.empty(cx.shape[0])
    kernels.bilinear_sample(sg.values, a, b, c, d, sg.kx, sg.ky,
                            np.ascontiguousarray(cx), np.ascontiguousarray(cy), out)
    return out


def sample_bilinear(sg, point):
    """Bilinear sample at a single point."""
    return float(sample_bilinear_many(sg, np.array([point[0]]), np.array([point[1]]))[0])


def restrict_to_curve(sg, curve, mesh):
    """Curve solution sampled from the grid at the mesh nodes; endpoints forced to 0."""
    vals = sample_bilinear_many(sg, mesh.points[:, 0], mesh.points[:, 1])
    vals[0] = 0.0
    vals[-1] = 0.0
    return CurveSolution(vals, mesh)


def restrict_many(sg, meshes):
    """restrict_to_curve over several meshes with one sampling call."""
    if not meshes:
        return []
    sizes = [m.points.shape[0] for m in meshes]
    offsets = np.zeros(len(meshes) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    px = np.concatenate([m.points[:, 0] for m in meshes])
    py = np.concatenate([m.points[:, 1] for m in meshes])
    vals = sample_bilinear_many(sg, px, py)
    out = []
    for k, mesh in enumerate(meshes):
        v = vals[offsets[k]:offsets[k + 1]].copy()
        v[0] = 0.0
        v[-1] = 0.0
        out.append(CurveSolution(v, mesh))
    return out


class TransferGrid:
    """Per-segment min/max intersection records on an (kx, ky) line grid.

    kx+1 vertical and ky+1 horizontal lines span the bounding box; every
    horizontal line holds kx segments, every vertical line ky segments.
    """

    def __init__(self, bbox, kx, ky):
        if kx < 1 or ky < 1:
            raise ValueError("grid needs at least one cell per direction")
        self.bbox = tuple(float(v) for v in bbox)
        self.kx = int(kx)
        self.ky = int(ky)
        ny, nx = self.ky + 1, self.kx + 1
        self.hmin_c = np.full((ny, kx), np.inf)
        self.hmin_v = np.zeros((ny, kx))
        self.hmin_s = np.full((ny, kx), np.inf)
        self.hmax_c = np.full((ny, kx), -np.inf)
        self.hmax_v = np.zeros((ny, kx))
        self.hmax_s = np.full((ny, kx), np.inf)
        self.vmin_c = np.full((nx, ky), np.inf)
        self.vmin_v = np.zeros((nx, ky))
        self.vmin_s = np.full((nx, ky), np.inf)
        self.vmax_c = np.full((nx, ky), -np.inf)
        self.vmax_v = np.zeros((nx, ky))
        self.vmax_s = np.full((nx, ky), np.inf)
        self.last_fallbacks = FallbackCounts()

    @property
    def has_records(self):
        return bool(np.any(self.hmin_c != np.inf) or np.any(self.vmin_c != np.inf))

    def record_polyline(self, xs, ys, values, seed_param):
        """Record every grid-line crossing of a polyline with nodal values."""
        a, b, c, d = self.bbox
        if (np.any(xs < a - _BOX_TOL) or np.any(xs > b + _BOX_TOL)
                or np.any(ys < c - _BOX_TOL) or np.any(ys > d + _BOX_TOL)):
            raise OutOfDomainError("curve leaves the transfer bounding box")
        kernels.record_crossings(
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ys, dtype=np.float64),
            np.ascontiguousarray(values, dtype=np.float64),
            float(seed_param), a, b, c, d, self.kx, self.ky,
            self.hmin_c, self.hmin_v, self.hmin_s,
            self.hmax_c, self.hmax_v, self.hmax_s,
            self.vmin_c, self.vmin_v, self.vmin_s,
            self.vmax_c, self.vmax_v, self.vmax_s)

    def record_curve(self, sol):
        """Record a curve solution: values at mesh nodes are carried to the
        trace-resolution polyline by linear interpolation, then every polyline
        edge is intersected with the grid lines."""
        mesh = sol.mesh
        curve = mesh.curve
        vals = curve.values_at_arclen(mesh.coords, sol.values)
        self.record_polyline(curve.nodes[:, 0], curve.nodes[:, 1], vals, curve.seed_param)

    def record_curves(self, solutions):
        """Record a batch of curve solutions in one kernel invocation."""
        if not solutions:
            return
        a, b, c, d = self.bbox
        sizes = [sol.mesh.curve.nodes.shape[0] for sol in solutions]
        offsets = np.zeros(len(solutions) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        total = int(offsets[-1])
        xs = np.empty(total)
        ys = np.empty(total)
        vals = np.empty(total)
        seeds = np.empty(len(solutions))
        for k, sol in enumerate(solutions):
            curve = sol.mesh.curve
            lo, hi = offsets[k], offsets[k + 1]
            xs[lo:hi] = curve.nodes[:, 0]
            ys[lo:hi] = curve.nodes[:, 1]
            vals[lo:hi] = curve.values_at_arclen(sol.mesh.coords, sol.values)
            seeds[k] = curve.seed_param
        if (np.any(xs < a - _BOX_TOL) or np.any(xs > b + _BOX_TOL)
                or np.any(ys < c - _BOX_TOL) or np.any(ys > d + _BOX_TOL)):
            raise OutOfDomainError("curve leaves the transfer bounding box")
        kernels.record_crossings_batch(
            xs, ys, vals, seeds, offsets, a, b, c, d, self.kx, self.ky,
            self.hmin_c, self.hmin_v, self.hmin_s,
            self.hmax_c, self.hmax_v, self.hmax_s,
            self.vmin_c, self.vmin_v, self.vmin_s,
            self.vmax_c, self.vmax_v, self.vmax_s)

    def merge(self, other):
        """Fold another grid's records into this one (order-free reduction)."""

        def fold(sc, sv, ss, oc, ov, osd, is_min):
            if is_min:
                better = (oc < sc) | ((oc == sc) & (osd < ss))
            else:
                better = (oc > sc) | ((oc == sc) & (osd < ss))
            sc[better] = oc[better]
            sv[better] = ov[better]
            ss[better] = osd[better]

        fold(self.hmin_c, self.hmin_v, self.hmin_s,
             other.hmin_c, other.hmin_v, other.hmin_s, True)
        fold(self.hmax_c, self.hmax_v, self.hmax_s,
             other.hmax_c, other.hmax_v, other.hmax_s, False)
        fold(self.vmin_c, self.vmin_v, self.vmin_s,
             other.vmin_c, other.vmin_v, other.vmin_s, True)
        fold(self.vmax_c, self.vmax_v, self.vmax_s,
             other.vmax_c, other.vmax_v, other.vmax_s, False)

    def to_grid_nodes(self):
        """Collapse records to node values by two-line averaging.

        Nodes whose horizontal or vertical line carries no records fall back
        per the ladder (other line alone, then nearest record anywhere);
        counts are exposed via ``last_fallbacks``.
        """
        if not self.has_records:
            raise EmptyGridError("transfer grid holds no intersection records")
        a, b, c, d = self.bbox
        vals = np.empty((self.ky + 1, self.kx + 1))
        status = np.empty((self.ky + 1, self.kx + 1), dtype=np.int8)
        kernels.grid_node_values(
            self.hmin_c, self.hmin_v, self.hmax_c, self.hmax_v,
            self.vmin_c, self.vmin_v, self.vmax_c, self.vmax_v,
            a, b, c, d, self.kx, self.ky, vals, status)
        self.last_fallbacks = FallbackCounts(
            two_line=int(np.sum(status == 0)),
            single_line=int(np.sum(status == 1)),
            nearest_record=int(np.sum(status == 2)),
        )
        return SolutionGrid(self.bbox, vals)


def resample(sg, kx, ky):
    """SolutionGrid resampled bilinearly onto a coarser/finer node grid."""
    a, b, c, d = sg.bbox
    xs = a + np.arange(kx + 1) * ((b - a) / kx)
    ys = c + np.arange(ky + 1) * ((d - c) / ky)
    X, Y = np.meshgrid(xs, ys)
    vals = sample_bilinear_many(sg, X.ravel(), Y.ravel()).reshape(ky + 1, kx + 1)
    return SolutionGrid(sg.bbox, vals)


def write_csv(sg, path):
    """x,y,u rows, row-major by y then x, 17 significant digits."""
    xs, ys = sg.node_coords()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,u\n")
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                fh.write(f"{x:.17g},{y:.17g},{sg.values[j, i]:.17g}\n")


def write_vtk(sg, path, name="u"):
    """Legacy-VTK structured points (ASCII) for external plotting."""
    a, b, c, d = sg.bbox
    nx, ny = sg.kx + 1, sg.ky + 1
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("adr-split solution grid\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} 1\n")
        fh.write(f"ORIGIN {a:.17g} {c:.17g} 0\n")
        fh.write(f"SPACING {(b - a) / sg.kx:.17g} {(d - c) / sg.ky:.17g} 1\n")
        fh.write(f"POINT_DATA {nx * ny}\n")
        fh.write(f"SCALARS {name} double 1\n")
        fh.write("LOOKUP_TABLE default\n")
        for j in range(ny):
            fh.write(" ".join(f"{v:.17g}" for v in sg.values[j]) + "\n")
