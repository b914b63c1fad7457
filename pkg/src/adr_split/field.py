"""Geometry of the advection field.

Normalization, the orthogonal rotation, the pointwise projection
decomposition b b^T + p p^T = I, a sampled divergence check, and
identification of the inflow parts of the rectangle boundary for either the
advection field or its rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DegenerateFieldError, EmptyInflowError

EDGE_ORDER = ("bottom", "right", "top", "left")

# outward unit normal per edge of an axis-aligned rectangle
_EDGE_NORMALS = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}


@dataclass(frozen=True)
class DomainRect:
    """Axis-aligned rectangle (x_min, x_max) x (y_min, y_max)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("domain rectangle must satisfy x_min < x_max and y_min < y_max")

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def perimeter(self):
        return 2.0 * (self.width + self.height)

    @property
    def min_extent(self):
        return min(self.width, self.height)

    @property
    def corners(self):
        return (
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        )

    def contains(self, x, y, tol=0.0):
        return (
            (self.x_min - tol <= x <= self.x_max + tol)
            and (self.y_min - tol <= y <= self.y_max + tol)
        )

    def strictly_inside(self, x, y):
        return self.x_min < x < self.x_max and self.y_min < y < self.y_max

    def edge_length(self, edge):
        return self.width if edge in ("bottom", "top") else self.height

    def edge_point(self, edge, t):
        """Point at parameter t in [0, 1] along an edge (increasing coordinate)."""
        if edge == "bottom":
            return (self.x_min + t * self.width, self.y_min)
        if edge == "top":
            return (self.x_min + t * self.width, self.y_max)
        if edge == "left":
            return (self.x_min, self.y_min + t * self.height)
        if edge == "right":
            return (self.x_max, self.y_min + t * self.height)
        raise ValueError(f"unknown edge {edge!r}")

    def edge_normal(self, edge):
        return _EDGE_NORMALS[edge]


@dataclass(frozen=True)
class VectorFieldSpec:
    """Advection field (beta1(x, y), beta2(x, y)) with a degeneracy threshold."""

    beta1: object  # Expression
    beta2: object  # Expression
    eps_field: float = 1e-12

    def beta(self, x, y):
        return self.beta1(x, y), self.beta2(x, y)

    def gamma(self, x, y):
        """Orthogonal rotation (beta2, -beta1); same norm as beta everywhere."""
        b1, b2 = self.beta(x, y)
        return b2, -np.asarray(b1) if np.ndim(b1) else -b1

    def norm(self, x, y):
        b1, b2 = self.beta(x, y)
        return np.hypot(b1, b2)


@dataclass(frozen=True)
class BoundarySegmentSet:
    """Subset of the rectangle boundary as per-edge parameter subintervals.

    Segments are stored in fixed edge order (bottom, right, top, left) with
    disjoint, ascending subintervals inside each edge, so arc-length
    positions along the set are well defined and deterministic.
    """

    domain: DomainRect
    segments: tuple = dc_field(default_factory=tuple)  # ((edge, (t0, t1)), ...)

    @property
    def empty(self):
        return len(self.segments) == 0

    def edges(self):
        return {edge for edge, _ in self.segments}

    def segment_lengths(self):
        return [self.domain.edge_length(e) * (t1 - t0) for e, (t0, t1) in self.segments]

    def total_length(self):
        return float(sum(self.segment_lengths()))

    def point_at(self, s):
        """Map arc length s (from the start of the set) to a boundary point."""
        remaining = s
        lengths = self.segment_lengths()
        for (edge, (t0, t1)), seg_len in zip(self.segments, lengths):
            if remaining <= seg_len or (edge, (t0, t1)) == self.segments[-1]:
                frac = remaining / seg_len if seg_len > 0 else 0.0
                frac = min(max(frac, 0.0), 1.0)
                return self.domain.edge_point(edge, t0 + frac * (t1 - t0))
            remaining -= seg_len
        raise ValueError("arc length outside the segment set")

    def covers(self, edge, t0, t1, tol=1e-9):
        """True if [t0, t1] on the given edge lies inside the set (tests helper)."""
        for e, (a, b) in self.segments:
            if e == edge and a - tol <= t0 and t1 <= b + tol:
                return True
        return False


def unit_fields(spec, point):
    """Unit advection direction b and unit cross direction p at a point.

    b = beta/|beta| and p is the normalized rotation (beta2, -beta1)/|beta|;
    together they satisfy b b^T + p p^T = I.
    """
    x, y = point
    b1 = spec.beta1(x, y)
    b2 = spec.beta2(x, y)
    n = np.hypot(b1, b2)
    if n < spec.eps_field:
        raise DegenerateFieldError(
            f"advection field norm {n:.3e} below threshold {spec.eps_field:.3e} at ({x}, {y})"
        )
    b = np.array([b1 / n, b2 / n])
    p = np.array([b2 / n, -b1 / n])
    return b, p


def _edge_signed_flux(spec, domain, which, edge, t):
    """n . field on an edge at parameter(s) t; which selects beta or gamma."""
    pts = domain.edge_point(edge, np.asarray(t, dtype=np.float64))
    x, y = pts
    b1 = spec.beta1(x, y)
    b2 = spec.beta2(x, y)
    if which == "gamma":
        b1, b2 = b2, -np.asarray(b1) if np.ndim(b1) else -b1
    nx, ny = domain.edge_normal(edge)
    return nx * np.asarray(b1) + ny * np.asarray(b2)


def _refine_transition(spec, domain, which, edge, t_neg, t_other, iters=60):
    """Bisect between a parameter with n.field < 0 and one without."""
    for _ in range(iters):
        mid = 0.5 * (t_neg + t_other)
        if _edge_signed_flux(spec, domain, which, edge, mid) < 0.0:
            t_neg = mid
        else:
            t_other = mid
    return 0.5 * (t_neg + t_other)


def inflow_boundary(spec, domain, which="beta", samples=512):
    """Boundary subset where the outward normal dotted with the field is negative.

    Resolved by dense sampling per edge with bisection refinement at sign
    changes.  An empty result is legal (e.g. a purely outflowing field).
    """
    if which not in ("beta", "gamma"):
        raise ValueError("which must be 'beta' or 'gamma'")
    segments = []
    ts = np.linspace(0.0, 1.0, samples)
    for edge in EDGE_ORDER:
        flux = _edge_signed_flux(spec, domain, which, edge, ts)
        neg = flux < 0.0
        open_at = None
        for k in range(samples):
            if neg[k] and open_at is None:
                if k == 0:
                    open_at = 0.0
                else:
                    open_at = _refine_transition(spec, domain, which, edge, ts[k], ts[k - 1])
            elif not neg[k] and open_at is not None:
                close_at = _refine_transition(spec, domain, which, edge, ts[k - 1], ts[k])
                if close_at > open_at:
                    segments.append((edge, (open_at, close_at)))
                open_at = None
        if open_at is not None:
            segments.append((edge, (open_at, 1.0)))
    return BoundarySegmentSet(domain, tuple(segments))


@dataclass(frozen=True)
class DivergenceReport:
    max_divergence: float
    tol: float
    passed: bool

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"divergence check: max |div beta| = {self.max_divergence:.3e} (tol {self.tol:.1e}) -> {status}"


def check_divergence_free(spec, domain, tol=1e-8, lattice=32, h=1e-4):
    """Central-difference estimate of div(beta) on an interior sample lattice.

    Failure is reported, not raised; the caller decides whether to proceed.
    """
    xs = domain.x_min + (np.arange(lattice) + 0.5) / lattice * domain.width
    ys = domain.y_min + (np.arange(lattice) + 0.5) / lattice * domain.height
    X, Y = np.meshgrid(xs, ys)
    d1 = (spec.beta1(X + h, Y) - spec.beta1(X - h, Y)) / (2.0 * h)
    d2 = (spec.beta2(X, Y + h) - spec.beta2(X, Y - h)) / (2.0 * h)
    max_div = float(np.max(np.abs(d1 + d2)))
    return DivergenceReport(max_div, tol, max_div <= tol)


def require_nonempty(inflow, which):
    if inflow.empty:
        raise EmptyInflowError(f"the {which} inflow boundary set is empty")
    return inflow
