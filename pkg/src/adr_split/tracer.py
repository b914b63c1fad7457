"""Integral-curve families of the advection field and its rotation.

Curves are traced from inflow-boundary seeds with classic 4th-order
one-step integration of the *normalized* field, so the integration
parameter is arc length and no reparameterization pass is needed.  A whole
family is advanced in lockstep (one vectorized field evaluation per stage
for all still-active curves), which keeps expression evaluation off the
per-curve hot path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFieldError, EmptyInflowError, MaxArcLengthError

log = logging.getLogger(__name__)


class Seed(NamedTuple):
    param: float  # position along the inflow set, normalized to [0, 1]
    x: float
    y: float


@dataclass
class TraceOptions:
    h_trace: float
    eps_field: float = 1e-12
    max_arc_length: float | None = None  # default: 10 x domain perimeter
    bisect_iters: int = 60
    min_steps: int = 3  # curves shorter than min_steps * h_trace are discarded

    @staticmethod
    def for_domain(domain, h_trace=None, eps_field=1e-12):
        h = h_trace if h_trace is not None else domain.min_extent / 1000.0
        return TraceOptions(h_trace=h, eps_field=eps_field,
                            max_arc_length=10.0 * domain.perimeter)


@dataclass
class IntegralCurve:
    """Arc-length-parameterized polyline inside the domain.

    First and last nodes sit on the boundary; interior nodes are strictly
    inside; arclen is strictly increasing from 0.
    """

    nodes: np.ndarray  # (K, 2)
    arclen: np.ndarray  # (K,)
    family: str  # "beta" | "gamma"
    seed_param: float

    @property
    def length(self):
        return float(self.arclen[-1])

    def values_at_arclen(self, coords, values):
        """Linear interpolation of (coords, values) samples onto polyline nodes."""
        return np.interp(self.arclen, coords, values)


def seed_points(inflow, count):
    """Seeds uniformly spaced by arc length along the inflow set.

    Uses the midpoint convention ((k + 1/2)/count positions), allocating
    across edges proportionally to their inflow length.  Seeds that land
    exactly on a domain corner are nudged half a spacing inward along the
    boundary.
    """
    if inflow.empty:
        raise EmptyInflowError("cannot seed curves: inflow set is empty")
    if count < 2:
        raise ValueError("need at least 2 seed points to cover the domain")
    total = inflow.total_length()
    spacing = total / count
    seeds = []
    corners = inflow.domain.corners
    for k in range(count):
        s = (k + 0.5) * spacing
        x, y = inflow.point_at(s)
        if any(abs(x - cx) < 1e-12 and abs(y - cy) < 1e-12 for cx, cy in corners):
            s_nudged = s - 0.5 * spacing
            if s_nudged <= 0.0:
                s_nudged = s + 0.5 * spacing
            x, y = inflow.point_at(s_nudged)
        seeds.append(Seed(s / total, x, y))
    return seeds


def _unit_rhs(spec, family, x, y, eps_field):
    """Normalized advection direction (family 'beta') or its rotation ('gamma')."""
    b1 = np.asarray(spec.beta1(x, y), dtype=np.float64)
    b2 = np.asarray(spec.beta2(x, y), dtype=np.float64)
    n = np.hypot(b1, b2)
    small = n < eps_field
    if np.any(small):
        xb, yb = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        idx = np.argmax(np.asarray(small).ravel())
        raise DegenerateFieldError(
            f"field norm below {eps_field:.1e} near "
            f"({xb.ravel()[idx]:.6g}, {yb.ravel()[idx]:.6g})"
        )
    if family == "beta":
        return b1 / n, b2 / n
    return b2 / n, -b1 / n


def _rk4(spec, family, x, y, h, eps_field):
    k1x, k1y = _unit_rhs(spec, family, x, y, eps_field)
    k2x, k2y = _unit_rhs(spec, family, x + 0.5 * h * k1x, y + 0.5 * h * k1y, eps_field)
    k3x, k3y = _unit_rhs(spec, family, x + 0.5 * h * k2x, y + 0.5 * h * k2y, eps_field)
    k4x, k4y = _unit_rhs(spec, family, x + h * k3x, y + h * k3y, eps_field)
    return (x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y))


def _bisect_exit(spec, family, domain, x, y, h, opts):
    """Step length in (0, h] whose endpoint is the boundary crossing."""
    lo, hi = 0.0, h
    for _ in range(opts.bisect_iters):
        mid = 0.5 * (lo + hi)
        mx, my = _rk4(spec, family, x, y, mid, opts.eps_field)
        if domain.strictly_inside(mx, my):
            lo = mid
        else:
            hi = mid
    ex, ey = _rk4(spec, family, x, y, hi, opts.eps_field)
    # snap onto the rectangle; the bisection residual is far below 1e-10
    ex = min(max(ex, domain.x_min), domain.x_max)
    ey = min(max(ey, domain.y_min), domain.y_max)
    return hi, ex, ey


def trace_family(spec, seeds, family, domain, opts):
    """Trace all seeds of one family in lockstep; returns curves in seed order.

    Curves shorter than min_steps * h_trace (corner grazers) are dropped with
    a warning.
    """
    n = len(seeds)
    if n == 0:
        return []
    h = opts.h_trace
    max_len = opts.max_arc_length if opts.max_arc_length is not None else 10.0 * domain.perimeter
    max_steps = int(np.ceil(max_len / h))

    xs = np.array([s.x for s in seeds])
    ys = np.array([s.y for s in seeds])
    node_lists = [[(s.x, s.y)] for s in seeds]
    final_step = np.full(n, -1.0)  # clipped length of the exit step
    active = np.arange(n)

    for step in range(max_steps):
        if active.size == 0:
            break
        cx, cy = _rk4(spec, family, xs[active], ys[active], h, opts.eps_field)
        inside = (domain.x_min < cx) & (cx < domain.x_max) & (domain.y_min < cy) & (cy < domain.y_max)
        for local, curve_idx in enumerate(active):
            if inside[local]:
                node_lists[curve_idx].append((cx[local], cy[local]))
            else:
                lam, ex, ey = _bisect_exit(spec, family, domain,
                                           xs[active][local], ys[active][local], h, opts)
                node_lists[curve_idx].append((ex, ey))
                final_step[curve_idx] = lam
        xs[active] = cx
        ys[active] = cy
        active = active[inside]
    if active.size:
        bad = seeds[int(active[0])]
        raise MaxArcLengthError(
            f"{family} curve from seed ({bad.x:.6g}, {bad.y:.6g}) exceeded the "
            f"arc-length cutoff {max_len:.3g}; the field may have closed or "
            "trapped integral curves"
        )

    curves = []
    for k, seed in enumerate(seeds):
        nodes = np.asarray(node_lists[k])
        m = nodes.shape[0]
        arclen = np.empty(m)
        arclen[:-1] = np.arange(m - 1) * h
        arclen[-1] = arclen[-2] + final_step[k] if m >= 2 else 0.0
        if m >= 2 and arclen[-1] <= arclen[-2]:
            # exit landed immediately after the last interior node; merge them
            nodes = np.vstack((nodes[:-2], nodes[-1:]))
            arclen = np.concatenate((arclen[:-2], arclen[-1:]))
            m -= 1
        if arclen[-1] < opts.min_steps * h:
            log.warning("discarding %s curve at seed param %.6f: length %.3g "
                        "below %d trace steps", family, seed.param, arclen[-1],
                        opts.min_steps)
            continue
        curves.append(IntegralCurve(nodes=nodes, arclen=arclen, family=family,
                                    seed_param=seed.param))
    return curves


def trace(spec, seed, family, domain, opts):
    """Trace a single curve (thin wrapper over the family tracer)."""
    if isinstance(seed, Seed):
        s = seed
    else:
        s = Seed(0.0, seed[0], seed[1])
    curves = trace_family(spec, [s], family, domain, opts)
    if not curves:
        raise ValueError("traced curve was too short and has been discarded")
    return curves[0]


def dump_family_csv(curves, path):
    """Debug dump: one CSV per family with curve index, seed param, and nodes."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("curve,seed_param,arclen,x,y\n")
        for k, curve in enumerate(curves):
            for l, (x, y) in zip(curve.arclen, curve.nodes):
                fh.write(f"{k},{curve.seed_param:.17g},{l:.17g},{x:.17g},{y:.17g}\n")
