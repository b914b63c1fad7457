"""Numba-jitted implementations of the hot kernels.

Loop form of the kernels in ``_numpy``; arithmetic and tie-breaking are kept
expression-for-expression identical so both backends return bit-identical
results.  Compiled lazily with on-disk caching; threads may call these
concurrently (nogil).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_JIT = {"cache": True, "nogil": True}


@njit(**_JIT)
def thomas(lower, diag, upper, rhs, out):
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    piv = diag[0]
    if piv == 0.0:
        return 0
    if n > 1:
        cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if piv == 0.0:
            return i
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return -1


@njit(**_JIT)
def record_crossings_batch(xs, ys, vals, seeds, offsets, a, b, c, d, kx, ky,
                           hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                           vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s):
    dy_line = (d - c) / ky
    dx_line = (b - a) / kx
    for k in range(offsets.shape[0] - 1):
        seed = seeds[k]
        start = offsets[k]
        stop = offsets[k + 1]
        _record_polyline(xs, ys, vals, start, stop, seed, a, b, c, d, kx, ky,
                         dx_line, dy_line,
                         hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                         vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s)


@njit(**_JIT)
def _record_polyline(xs, ys, vals, start, stop, seed, a, b, c, d, kx, ky,
                     dx_line, dy_line,
                     hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                     vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s):
    for e in range(start, stop - 1):
        x0 = xs[e]
        x1 = xs[e + 1]
        y0 = ys[e]
        y1 = ys[e + 1]
        v0 = vals[e]
        v1 = vals[e + 1]

        if y1 != y0:
            y_lo = y0 if y0 < y1 else y1
            y_hi = y1 if y0 < y1 else y0
            j_lo = int(math.ceil((y_lo - c) / dy_line))
            j_hi = int(math.floor((y_hi - c) / dy_line))
            if j_lo < 0:
                j_lo = 0
            if j_hi > ky:
                j_hi = ky
            for j in range(j_lo, j_hi + 1):
                y_line = c + j * dy_line
                t = (y_line - y0) / (y1 - y0)
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                xc = x0 + t * (x1 - x0)
                vc = v0 + t * (v1 - v0)
                s = int(math.floor((xc - a) / dx_line))
                if s < 0:
                    s = 0
                elif s > kx - 1:
                    s = kx - 1
                if xc < hmin_c[j, s] or (xc == hmin_c[j, s] and seed < hmin_s[j, s]):
                    hmin_c[j, s] = xc
                    hmin_v[j, s] = vc
                    hmin_s[j, s] = seed
                if xc > hmax_c[j, s] or (xc == hmax_c[j, s] and seed < hmax_s[j, s]):
                    hmax_c[j, s] = xc
                    hmax_v[j, s] = vc
                    hmax_s[j, s] = seed

        if x1 != x0:
            x_lo = x0 if x0 < x1 else x1
            x_hi = x1 if x0 < x1 else x0
            i_lo = int(math.ceil((x_lo - a) / dx_line))
            i_hi = int(math.floor((x_hi - a) / dx_line))
            if i_lo < 0:
                i_lo = 0
            if i_hi > kx:
                i_hi = kx
            for i in range(i_lo, i_hi + 1):
                x_line = a + i * dx_line
                t = (x_line - x0) / (x1 - x0)
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                yc = y0 + t * (y1 - y0)
                vc = v0 + t * (v1 - v0)
                s = int(math.floor((yc - c) / dy_line))
                if s < 0:
                    s = 0
                elif s > ky - 1:
                    s = ky - 1
                if yc < vmin_c[i, s] or (yc == vmin_c[i, s] and seed < vmin_s[i, s]):
                    vmin_c[i, s] = yc
                    vmin_v[i, s] = vc
                    vmin_s[i, s] = seed
                if yc > vmax_c[i, s] or (yc == vmax_c[i, s] and seed < vmax_s[i, s]):
                    vmax_c[i, s] = yc
                    vmax_v[i, s] = vc
                    vmax_s[i, s] = seed


@njit(**_JIT)
def record_crossings(xs, ys, vals, seed, a, b, c, d, kx, ky,
                     hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                     vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s):
    offsets = np.empty(2, dtype=np.int64)
    offsets[0] = 0
    offsets[1] = xs.shape[0]
    seeds = np.empty(1)
    seeds[0] = seed
    record_crossings_batch(xs, ys, vals, seeds, offsets, a, b, c, d, kx, ky,
                           hmin_c, hmin_v, hmin_s, hmax_c, hmax_v, hmax_s,
                           vmin_c, vmin_v, vmin_s, vmax_c, vmax_v, vmax_s)


@njit(**_JIT)
def _gather_line(min_c, min_v, max_c, max_v, cs, vs):
    n_seg = min_c.shape[0]
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
    return m


@njit(**_JIT)
def _line_estimate(cs, vs, m, q):
    if m == 1:
        return vs[0]
    pos = np.searchsorted(cs[:m], q)
    i1 = pos
    if i1 < 1:
        i1 = 1
    elif i1 > m - 1:
        i1 = m - 1
    i0 = i1 - 1
    c0 = cs[i0]
    c1 = cs[i1]
    t = (q - c0) / (c1 - c0)
    return vs[i0] + t * (vs[i1] - vs[i0])


@njit(**_JIT)
def grid_node_values(hmin_c, hmin_v, hmax_c, hmax_v,
                     vmin_c, vmin_v, vmax_c, vmax_v,
                     a, b, c, d, kx, ky, out_vals, out_status):
    nx = kx + 1
    ny = ky + 1
    dxn = (b - a) / kx
    dyn = (d - c) / ky

    est_h = np.zeros((ny, nx))
    has_h = np.zeros(ny, dtype=np.bool_)
    cs = np.empty(2 * max(kx, ky))
    vs = np.empty(2 * max(kx, ky))
    for j in range(ny):
        m = _gather_line(hmin_c[j], hmin_v[j], hmax_c[j], hmax_v[j], cs, vs)
        if m > 0:
            has_h[j] = True
            for i in range(nx):
                est_h[j, i] = _line_estimate(cs, vs, m, a + i * dxn)

    est_v = np.zeros((ny, nx))
    has_v = np.zeros(nx, dtype=np.bool_)
    for i in range(nx):
        m = _gather_line(vmin_c[i], vmin_v[i], vmax_c[i], vmax_v[i], cs, vs)
        if m > 0:
            has_v[i] = True
            for j in range(ny):
                est_v[j, i] = _line_estimate(cs, vs, m, c + j * dyn)

    for j in range(ny):
        for i in range(nx):
            if has_h[j] and has_v[i]:
                out_vals[j, i] = 0.5 * (est_h[j, i] + est_v[j, i])
                out_status[j, i] = 0
            elif has_h[j]:
                out_vals[j, i] = est_h[j, i]
                out_status[j, i] = 1
            elif has_v[i]:
                out_vals[j, i] = est_v[j, i]
                out_status[j, i] = 1
            else:
                out_vals[j, i] = _nearest_record(
                    hmin_c, hmin_v, hmax_c, hmax_v,
                    vmin_c, vmin_v, vmax_c, vmax_v,
                    a + i * dxn, c + j * dyn, dxn, dyn, a, c)
                out_status[j, i] = 2


@njit(**_JIT)
def _nearest_record(hmin_c, hmin_v, hmax_c, hmax_v,
                    vmin_c, vmin_v, vmax_c, vmax_v,
                    qx, qy, dxn, dyn, a, c):
    # canonical scan order: horizontal family (line, segment, min, max), then
    # vertical; strict < keeps the first record among distance ties, matching
    # the argmin of the numpy lane
    best = np.inf
    best_v = 0.0
    ny = hmin_c.shape[0]
    for j in range(ny):
        y_line = c + j * dyn
        for s in range(hmin_c.shape[1]):
            cm = hmin_c[j, s]
            if cm != np.inf:
                d2 = (cm - qx) ** 2 + (y_line - qy) ** 2
                if d2 < best:
                    best = d2
                    best_v = hmin_v[j, s]
                cM = hmax_c[j, s]
                d2 = (cM - qx) ** 2 + (y_line - qy) ** 2
                if d2 < best:
                    best = d2
                    best_v = hmax_v[j, s]
    nx = vmin_c.shape[0]
    for i in range(nx):
        x_line = a + i * dxn
        for s in range(vmin_c.shape[1]):
            cm = vmin_c[i, s]
            if cm != np.inf:
                d2 = (x_line - qx) ** 2 + (cm - qy) ** 2
                if d2 < best:
                    best = d2
                    best_v = vmin_v[i, s]
                cM = vmax_c[i, s]
                d2 = (x_line - qx) ** 2 + (cM - qy) ** 2
                if d2 < best:
                    best = d2
                    best_v = vmax_v[i, s]
    return best_v


@njit(**_JIT)
def bilinear_sample(values, a, b, c, d, kx, ky, px, py, out):
    n = px.shape[0]
    for k in range(n):
        sx = (px[k] - a) / (b - a) * kx
        sy = (py[k] - c) / (d - c) * ky
        ix = int(math.ceil(sx))
        if ix < 1:
            ix = 1
        elif ix > kx:
            ix = kx
        iy = int(math.ceil(sy))
        if iy < 1:
            iy = 1
        elif iy > ky:
            iy = ky
        lx = sx - (ix - 1)
        ly = sy - (iy - 1)
        p11 = values[iy - 1, ix - 1]
        p12 = values[iy - 1, ix]
        p21 = values[iy, ix - 1]
        p22 = values[iy, ix]
        out[k] = ((1.0 - ly) * (1.0 - lx) * p11 + (1.0 - ly) * lx * p12
                  + ly * (1.0 - lx) * p21 + ly * lx * p22)
