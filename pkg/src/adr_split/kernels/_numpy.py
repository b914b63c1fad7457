"""Pure-numpy implementations of the hot kernels.

These are the fallback twins of the numba-jitted kernels in ``_numba``;
both backends implement identical arithmetic (same formulas, same
comparison-based reductions), so results are bit-identical across backends.
The vectorized reductions here replace the sequential scans of the jitted
lane without changing which candidate wins a min/max slot.
"""

from __future__ import annotations

import numpy as np


def thomas(lower, diag, upper, rhs, out):
    """Direct elimination for a tridiagonal system; writes the solution to out.

    Returns the index of a zero pivot, or -1 on success.  lower[i] sits at
    (i+1, i), upper[i] at (i, i+1).
    """
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    piv = float(diag[0])
    if piv == 0.0:
        return 0
    if n > 1:
        cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = float(diag[i]) - float(lower[i - 1]) * float(cp[i - 1])
        if piv == 0.0:
            return i
        if i < n - 1:
            cp[i] = float(upper[i]) / piv
        dp[i] = (float(rhs[i]) - float(lower[i - 1]) * float(dp[i - 1])) / piv
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = float(dp[i]) - float(cp[i]) * float(out[i + 1])
    return -1


def _expand_windows(lo, hi):
    """Flatten per-edge inclusive index windows [lo, hi] into (edge_idx, idx)."""
    counts = np.maximum(hi - lo + 1, 0)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    edge_idx = np.repeat(np.arange(lo.shape[0], dtype=np.int64), counts)
    starts = np.repeat(lo, counts)
    shift = np.repeat(np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    idx = starts + (np.arange(total, dtype=np.int64) - shift)
    return edge_idx, idx


def _apply_candidates(keys, coords, vals, seeds, edge_order, n_seg,
                      min_c, min_v, min_s, max_c, max_v, max_s):
    """Reduce crossing candidates per (line, segment) key and update records.

    Winner selection matches the sequential strict-compare scan of the jitted
    lane: the smallest (coordinate, seed) pair wins the min slot, the largest
    coordinate with the smallest seed wins the max slot; stored records are
    replaced only on a strictly better coordinate or an equal coordinate from
    a smaller seed.
    """
    if keys.shape[0] == 0:
        return
    for which in ("min", "max"):
        if which == "min":
            order = np.lexsort((edge_order, seeds, coords, keys))
        else:
            order = np.lexsort((edge_order, seeds, -coords, keys))
        sk = keys[order]
        first = np.empty(sk.shape[0], dtype=bool)
        first[0] = True
        first[1:] = sk[1:] != sk[:-1]
        ck = sk[first]
        cc = coords[order][first]
        cv = vals[order][first]
        cs = seeds[order][first]
        rows = ck // n_seg
        cols = ck % n_seg
        if which == "min":
            sc, sv, ss = min_c, min_v, min_s
            better = (cc < sc[rows, cols]) | ((cc == sc[rows, cols]) & (cs < ss[rows, cols]))
        else:
            sc, sv, ss = max_c, max_v, max_s
            better = (cc > sc[rows, cols]) | ((cc == sc[rows, cols]) & (cs < ss[rows, cols]))
        r = rows[better]
        s = cols[better]
        sc[r, s] = cc[better]
        sv[r, s] = cv[better]
        ss[r, s] = cs[better]


def record_crossings_batch(xs, ys, vals, seeds, offsets, a, b, c, d, kx, ky,
                           hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                           vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s):
    """Record all grid-line crossings of a batch of concatenated polylines.

    Polyline k occupies nodes [offsets[k], offsets[k+1]) with seed seeds[k].
    Edges exactly collinear with a grid line contribute no crossing to that
    line (no unique intersection point); transversal touches at t=0 or t=1 do.
    """
    x0, x1 = xs[:-1], xs[1:]
    y0, y1 = ys[:-1], ys[1:]
    v0, v1 = vals[:-1], vals[1:]
    n_edges = x0.shape[0]
    # mark the artificial edges joining consecutive polylines as unusable
    counts = np.diff(offsets)
    edge_seed = np.repeat(seeds, counts)[:-1]
    joint = np.zeros(n_edges, dtype=bool)
    joint[offsets[1:-1] - 1] = True
    dy_line = (d - c) / ky
    dx_line = (b - a) / kx

    # crossings with horizontal lines y = c + j*dy_line, recorded by x
    dy_e = y1 - y0
    moving = (dy_e != 0.0) & ~joint
    y_lo = np.minimum(y0, y1)
    y_hi = np.maximum(y0, y1)
    j_lo = np.where(moving, np.ceil((y_lo - c) / dy_line), 1.0).astype(np.int64)
    j_hi = np.where(moving, np.floor((y_hi - c) / dy_line), 0.0).astype(np.int64)
    j_lo = np.maximum(j_lo, 0)
    j_hi = np.minimum(j_hi, ky)
    edge_idx, j = _expand_windows(j_lo, j_hi)
    if edge_idx.shape[0]:
        y_line = c + j * dy_line
        t = np.clip((y_line - y0[edge_idx]) / dy_e[edge_idx], 0.0, 1.0)
        xc = x0[edge_idx] + t * (x1[edge_idx] - x0[edge_idx])
        vc = v0[edge_idx] + t * (v1[edge_idx] - v0[edge_idx])
        seg = np.clip(np.floor((xc - a) / dx_line).astype(np.int64), 0, kx - 1)
        _apply_candidates(j * kx + seg, xc, vc, edge_seed[edge_idx], edge_idx, kx,
                          hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s)

    # crossings with vertical lines x = a + i*dx_line, recorded by y
    dx_e = x1 - x0
    moving = (dx_e != 0.0) & ~joint
    x_lo = np.minimum(x0, x1)
    x_hi = np.maximum(x0, x1)
    i_lo = np.where(moving, np.ceil((x_lo - a) / dx_line), 1.0).astype(np.int64)
    i_hi = np.where(moving, np.floor((x_hi - a) / dx_line), 0.0).astype(np.int64)
    i_lo = np.maximum(i_lo, 0)
    i_hi = np.minimum(i_hi, kx)
    edge_idx, i = _expand_windows(i_lo, i_hi)
    if edge_idx.shape[0]:
        x_line = a + i * dx_line
        t = np.clip((x_line - x0[edge_idx]) / dx_e[edge_idx], 0.0, 1.0)
        yc = y0[edge_idx] + t * (y1[edge_idx] - y0[edge_idx])
        vc = v0[edge_idx] + t * (v1[edge_idx] - v0[edge_idx])
        seg = np.clip(np.floor((yc - c) / dy_line).astype(np.int64), 0, ky - 1)
        _apply_candidates(i * ky + seg, yc, vc, edge_seed[edge_idx], edge_idx, ky,
                          vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s)


def record_crossings(xs, ys, vals, seed, a, b, c, d, kx, ky,
                     hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                     vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s):
    """Single-polyline form of record_crossings_batch."""
    offsets = np.array([0, xs.shape[0]], dtype=np.int64)
    record_crossings_batch(xs, ys, vals, np.array([seed]), offsets,
                           a, b, c, d, kx, ky,
                           hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                           vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s)


def _gather_line(min_c, min_v, max_c, max_v):
    """Sorted, coordinate-deduplicated records of one grid line."""
    n_seg = min_c.shape[0]
    cs = np.empty(2 * n_seg)
    vs = np.empty(2 * n_seg)
    m = 0
    last = np.inf
    for s in range(n_seg):
        cm = min_c[s]
        if cm != np.inf:
            if m == 0 or cm != last:
                cs[m] = cm
                vs[m] = min_v[s]
                last = cm
                m += 1
            cM = max_c[s]
            if cM != last:
                cs[m] = cM
                vs[m] = max_v[s]
                last = cM
                m += 1
    return cs, vs, m


def _line_estimates(cs, vs, m, qs):
    """Linear inter/extrapolation from the two nearest records for each query."""
    if m == 1:
        return np.full(qs.shape[0], vs[0])
    pos = np.searchsorted(cs[:m], qs)
    i1 = np.clip(pos, 1, m - 1)
    i0 = i1 - 1
    c0 = cs[i0]
    c1 = cs[i1]
    t = (qs - c0) / (c1 - c0)
    return vs[i0] + t * (vs[i1] - vs[i0])


def grid_node_values(hmin_c, hmin_v, hmax_c, hmax_v,
                     vmin_c, vmin_v, vmax_c, vmax_v,
                     a, b, c, d, kx, ky, out_vals, out_status):
    """Per-node two-line averaging with the fallback ladder.

    Status per node: 0 = both lines contributed, 1 = single-line fallback,
    2 = nearest-record fallback (no records on either of the node's lines).
    """
    nx = kx + 1
    ny = ky + 1
    qx = a + np.arange(nx) * ((b - a) / kx)
    qy = c + np.arange(ny) * ((d - c) / ky)

    est_h = np.zeros((ny, nx))
    has_h = np.zeros(ny, dtype=bool)
    for j in range(ny):
        cs, vs, m = _gather_line(hmin_c[j], hmin_v[j], hmax_c[j], hmax_v[j])
        if m > 0:
            est_h[j, :] = _line_estimates(cs, vs, m, qx)
            has_h[j] = True

    est_v = np.zeros((ny, nx))
    has_v = np.zeros(nx, dtype=bool)
    for i in range(nx):
        cs, vs, m = _gather_line(vmin_c[i], vmin_v[i], vmax_c[i], vmax_v[i])
        if m > 0:
            est_v[:, i] = _line_estimates(cs, vs, m, qy)
            has_v[i] = True

    both = has_h[:, None] & has_v[None, :]
    only_h = has_h[:, None] & ~has_v[None, :]
    only_v = ~has_h[:, None] & has_v[None, :]
    neither = ~(has_h[:, None] | has_v[None, :])

    out_vals[both] = 0.5 * (est_h[both] + est_v[both])
    out_vals[only_h] = est_h[only_h]
    out_vals[only_v] = est_v[only_v]
    out_status[...] = 0
    out_status[only_h | only_v] = 1
    out_status[neither] = 2

    if np.any(neither):
        rx, ry, rv = _all_record_points(hmin_c, hmin_v, hmax_c, hmax_v,
                                        vmin_c, vmin_v, vmax_c, vmax_v,
                                        a, b, c, d, kx, ky)
        jj, ii = np.nonzero(neither)
        for j, i in zip(jj, ii):
            d2 = (rx - qx[i]) ** 2 + (ry - qy[j]) ** 2
            out_vals[j, i] = rv[np.argmin(d2)]


def _all_record_points(hmin_c, hmin_v, hmax_c, hmax_v,
                       vmin_c, vmin_v, vmax_c, vmax_v,
                       a, b, c, d, kx, ky):
    """All records as 2D points in the canonical (h-family then v-family) order.

    Unpopulated slots get +inf coordinates so they never win a nearest-point
    scan; ordering matches the sequential scan of the jitted lane so distance
    ties resolve identically.
    """
    ny, nx = ky + 1, kx + 1
    y_lines = c + np.arange(ny) * ((d - c) / ky)
    x_lines = a + np.arange(nx) * ((b - a) / kx)

    h_x = np.stack((hmin_c, hmax_c), axis=-1).ravel()
    h_y = np.repeat(np.repeat(y_lines, kx), 2)
    h_v = np.stack((hmin_v, hmax_v), axis=-1).ravel()
    h_ok = np.stack((hmin_c != np.inf, hmax_c != -np.inf), axis=-1).ravel()

    v_y = np.stack((vmin_c, vmax_c), axis=-1).ravel()
    v_x = np.repeat(np.repeat(x_lines, ky), 2)
    v_v = np.stack((vmin_v, vmax_v), axis=-1).ravel()
    v_ok = np.stack((vmin_c != np.inf, vmax_c != -np.inf), axis=-1).ravel()

    rx = np.concatenate((np.where(h_ok, h_x, np.inf), np.where(v_ok, v_x, np.inf)))
    ry = np.concatenate((np.where(h_ok, h_y, np.inf), np.where(v_ok, v_y, np.inf)))
    rv = np.concatenate((h_v, v_v))
    return rx, ry, rv


def bilinear_sample(values, a, b, c, d, kx, ky, px, py, out):
    """Bilinear interpolation at prepared (in-box) points.

    Cell index via the ceiling rule clamped to [1, k]; a fractional offset of
    exactly 0 at a lattice point resolves to the lower cell with weight 1.
    """
    sx = (px - a) / (b - a) * kx
    sy = (py - c) / (d - c) * ky
    ix = np.clip(np.ceil(sx).astype(np.int64), 1, kx)
    iy = np.clip(np.ceil(sy).astype(np.int64), 1, ky)
    lx = sx - (ix - 1)
    ly = sy - (iy - 1)
    p11 = values[iy - 1, ix - 1]
    p12 = values[iy - 1, ix]
    p21 = values[iy, ix - 1]
    p22 = values[iy, ix]
    out[...] = ((1.0 - ly) * (1.0 - lx) * p11 + (1.0 - ly) * lx * p12
                + ly * (1.0 - lx) * p21 + ly * lx * p22)
