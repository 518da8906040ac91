"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

The numba path is the default. Set FOAMLAB_NUMBA=0 to force the numpy
fallback (used by the benchmark in benchmarks/bench_kernels.py and as an
escape hatch on platforms where numba is unavailable). Both paths compute
the same quantities; tiny floating-point differences from summation order
are possible, so cross-path comparisons in tests are tolerance-based.
"""

import os

import numpy as np

_flag = os.environ.get("FOAMLAB_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "off", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

__all__ = [
    "USE_NUMBA",
    "frame_coo_values",
    "paint_segments",
    "periodic_too_close",
]


# ---------------------------------------------------------------------------
# 2D Timoshenko frame element: 6x6 global stiffness values for COO assembly
# ---------------------------------------------------------------------------

def _frame_coo_values_numpy(xy, conn, t_arr, w_arr, E, G, k_shear):
    """Per-element global 6x6 stiffness, flattened to (n_elem, 36)."""
    pi = xy[conn[:, 0]]
    pj = xy[conn[:, 1]]
    d = pj - pi
    L = np.hypot(d[:, 0], d[:, 1])
    c = d[:, 0] / L
    s = d[:, 1] / L
    A = t_arr * w_arr
    I = w_arr * t_arr**3 / 12.0
    phi = 12.0 * E * I / (k_shear * G * A * L * L)
    kb = E * I / ((1.0 + phi) * L**3)
    ka = E * A / L
    m = conn.shape[0]

    kl = np.zeros((m, 6, 6))
    kl[:, 0, 0] = ka
    kl[:, 0, 3] = -ka
    kl[:, 3, 0] = -ka
    kl[:, 3, 3] = ka
    kl[:, 1, 1] = 12.0 * kb
    kl[:, 1, 4] = -12.0 * kb
    kl[:, 4, 1] = -12.0 * kb
    kl[:, 4, 4] = 12.0 * kb
    kl[:, 1, 2] = 6.0 * kb * L
    kl[:, 2, 1] = 6.0 * kb * L
    kl[:, 1, 5] = 6.0 * kb * L
    kl[:, 5, 1] = 6.0 * kb * L
    kl[:, 2, 4] = -6.0 * kb * L
    kl[:, 4, 2] = -6.0 * kb * L
    kl[:, 4, 5] = -6.0 * kb * L
    kl[:, 5, 4] = -6.0 * kb * L
    kl[:, 2, 2] = (4.0 + phi) * kb * L * L
    kl[:, 5, 5] = (4.0 + phi) * kb * L * L
    kl[:, 2, 5] = (2.0 - phi) * kb * L * L
    kl[:, 5, 2] = (2.0 - phi) * kb * L * L

    T = np.zeros((m, 6, 6))
    for off in (0, 3):
        T[:, off + 0, off + 0] = c
        T[:, off + 0, off + 1] = s
        T[:, off + 1, off + 0] = -s
        T[:, off + 1, off + 1] = c
        T[:, off + 2, off + 2] = 1.0
    kg = np.einsum("mji,mjk,mkl->mil", T, kl, T)
    # exact symmetry regardless of rounding in the triple product
    kg = 0.5 * (kg + np.transpose(kg, (0, 2, 1)))
    return kg.reshape(m, 36)


def _frame_coo_values_loop(xy, conn, t_arr, w_arr, E, G, k_shear):
    m = conn.shape[0]
    out = np.empty((m, 36))
    kl = np.zeros((6, 6))
    T = np.zeros((6, 6))
    kg = np.zeros((6, 6))
    for e in range(m):
        i = conn[e, 0]
        j = conn[e, 1]
        dx = xy[j, 0] - xy[i, 0]
        dy = xy[j, 1] - xy[i, 1]
        L = np.sqrt(dx * dx + dy * dy)
        c = dx / L
        s = dy / L
        t = t_arr[e]
        w = w_arr[e]
        A = t * w
        I = w * t**3 / 12.0
        phi = 12.0 * E * I / (k_shear * G * A * L * L)
        kb = E * I / ((1.0 + phi) * L**3)
        ka = E * A / L
        for a in range(6):
            for b in range(6):
                kl[a, b] = 0.0
                T[a, b] = 0.0
        kl[0, 0] = ka
        kl[0, 3] = -ka
        kl[3, 0] = -ka
        kl[3, 3] = ka
        kl[1, 1] = 12.0 * kb
        kl[1, 4] = -12.0 * kb
        kl[4, 1] = -12.0 * kb
        kl[4, 4] = 12.0 * kb
        kl[1, 2] = 6.0 * kb * L
        kl[2, 1] = 6.0 * kb * L
        kl[1, 5] = 6.0 * kb * L
        kl[5, 1] = 6.0 * kb * L
        kl[2, 4] = -6.0 * kb * L
        kl[4, 2] = -6.0 * kb * L
        kl[4, 5] = -6.0 * kb * L
        kl[5, 4] = -6.0 * kb * L
        kl[2, 2] = (4.0 + phi) * kb * L * L
        kl[5, 5] = (4.0 + phi) * kb * L * L
        kl[2, 5] = (2.0 - phi) * kb * L * L
        kl[5, 2] = (2.0 - phi) * kb * L * L
        for off in (0, 3):
            T[off + 0, off + 0] = c
            T[off + 0, off + 1] = s
            T[off + 1, off + 0] = -s
            T[off + 1, off + 1] = c
            T[off + 2, off + 2] = 1.0
        for a in range(6):
            for b in range(6):
                acc = 0.0
                for p in range(6):
                    tp = T[p, a]
                    if tp != 0.0:
                        for q in range(6):
                            acc += tp * kl[p, q] * T[q, b]
                kg[a, b] = acc
        for a in range(6):
            for b in range(6):
                out[e, 6 * a + b] = 0.5 * (kg[a, b] + kg[b, a])
    return out


# ---------------------------------------------------------------------------
# Raster painting: blacken pixels within `radius` device px of any segment
# ---------------------------------------------------------------------------

def _paint_segments_numpy(img, segs, radius):
    px = img.shape[0]
    r2 = radius * radius
    for k in range(segs.shape[0]):
        x0, y0, x1, y1 = segs[k]
        cmin = max(0, int(np.floor(min(x0, x1) - radius - 1)))
        cmax = min(px - 1, int(np.ceil(max(x0, x1) + radius + 1)))
        rmin = max(0, int(np.floor(min(y0, y1) - radius - 1)))
        rmax = min(px - 1, int(np.ceil(max(y0, y1) + radius + 1)))
        if cmin > cmax or rmin > rmax:
            continue
        cs = np.arange(cmin, cmax + 1) + 0.5
        rs = np.arange(rmin, rmax + 1) + 0.5
        gx, gy = np.meshgrid(cs, rs)
        dx = x1 - x0
        dy = y1 - y0
        L2 = dx * dx + dy * dy
        if L2 == 0.0:
            qx, qy = x0, y0
        else:
            tt = np.clip(((gx - x0) * dx + (gy - y0) * dy) / L2, 0.0, 1.0)
            qx = x0 + tt * dx
            qy = y0 + tt * dy
        hit = (gx - qx) ** 2 + (gy - qy) ** 2 <= r2
        sub = img[rmin : rmax + 1, cmin : cmax + 1]
        sub[hit] = 0


def _paint_segments_loop(img, segs, radius):
    px = img.shape[0]
    r2 = radius * radius
    for k in range(segs.shape[0]):
        x0 = segs[k, 0]
        y0 = segs[k, 1]
        x1 = segs[k, 2]
        y1 = segs[k, 3]
        cmin = int(np.floor(min(x0, x1) - radius - 1.0))
        cmax = int(np.ceil(max(x0, x1) + radius + 1.0))
        rmin = int(np.floor(min(y0, y1) - radius - 1.0))
        rmax = int(np.ceil(max(y0, y1) + radius + 1.0))
        if cmin < 0:
            cmin = 0
        if rmin < 0:
            rmin = 0
        if cmax > px - 1:
            cmax = px - 1
        if rmax > px - 1:
            rmax = px - 1
        dx = x1 - x0
        dy = y1 - y0
        L2 = dx * dx + dy * dy
        for rr in range(rmin, rmax + 1):
            cy = rr + 0.5
            for cc in range(cmin, cmax + 1):
                cx = cc + 0.5
                if L2 == 0.0:
                    qx = x0
                    qy = y0
                else:
                    tt = ((cx - x0) * dx + (cy - y0) * dy) / L2
                    if tt < 0.0:
                        tt = 0.0
                    elif tt > 1.0:
                        tt = 1.0
                    qx = x0 + tt * dx
                    qy = y0 + tt * dy
                ex = cx - qx
                ey = cy - qy
                if ex * ex + ey * ey <= r2:
                    img[rr, cc] = 0


# ---------------------------------------------------------------------------
# Periodic minimum-separation check for seed rejection sampling
# ---------------------------------------------------------------------------

def _periodic_too_close_numpy(pts, count, x, y, H, dmin2):
    if count == 0:
        return False
    d = pts[:count] - np.array([x, y])
    d -= H * np.round(d / H)
    return bool(np.any(d[:, 0] ** 2 + d[:, 1] ** 2 < dmin2))


def _periodic_too_close_loop(pts, count, x, y, H, dmin2):
    for k in range(count):
        dx = pts[k, 0] - x
        dy = pts[k, 1] - y
        dx -= H * np.round(dx / H)
        dy -= H * np.round(dy / H)
        if dx * dx + dy * dy < dmin2:
            return True
    return False


if USE_NUMBA:
    frame_coo_values = njit(cache=True)(_frame_coo_values_loop)
    paint_segments = njit(cache=True)(_paint_segments_loop)
    periodic_too_close = njit(cache=True)(_periodic_too_close_loop)
else:
    frame_coo_values = _frame_coo_values_numpy
    paint_segments = _paint_segments_numpy
    periodic_too_close = _periodic_too_close_numpy

# fallback implementations kept importable for the benchmark
frame_coo_values_numpy = _frame_coo_values_numpy
paint_segments_numpy = _paint_segments_numpy
periodic_too_close_numpy = _periodic_too_close_numpy
