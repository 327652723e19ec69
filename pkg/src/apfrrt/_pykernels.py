"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx``. The arithmetic is
written in the same order on both sides so the two backends return
bit-identical results; the planner's determinism guarantee depends on it.

Obstacle tables are column arrays: ``kind`` (0 circle, 1 rect), ``geom``
(k, 4) holding ``(cx, cy, r, 0)`` or ``(xmin, ymin, xmax, ymax)``, ``imp``
(1 for impermeable) and ``cost``.
"""

import math

import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi
INF = math.inf


def _diffs(X, n, q, wrap):
    D = X[:n] - q
    for j in range(q.shape[0]):
        if wrap[j]:
            col = D[:, j]
            col[col > PI] -= TWO_PI
            col[col <= -PI] += TWO_PI
    return D


def _sqdist(D):
    d2 = D[:, 0] * D[:, 0]
    for j in range(1, D.shape[1]):
        d2 += D[:, j] * D[:, j]
    return d2


def nearest(X, n, q, wrap):
    """Index of the row of ``X[:n]`` closest to ``q`` (lowest index on ties)."""
    if n <= 0:
        raise ValueError("empty point set")
    return int(np.argmin(_sqdist(_diffs(X, n, q, wrap))))


def within_radius(X, n, q, wrap, r):
    """Rows of ``X[:n]`` within distance r of ``q``: (ascending indices, distances)."""
    if n <= 0:
        return np.empty(0, dtype=np.intp), np.empty(0)
    d = np.sqrt(_sqdist(_diffs(X, n, q, wrap)))
    ids = np.nonzero(d <= r)[0].astype(np.intp)
    return ids, d[ids]


def classify_groups(P, kind, geom, imp, cost):
    """Worst classification per group of points.

    ``P`` has shape (m, npts, 2). Returns ``(status, cost)`` arrays of length
    m with status 0 free, 1 permeable, 2 impermeable; the cost is the
    maximum permeable cost touched (0 unless status is 1).
    """
    m, npts = P.shape[0], P.shape[1]
    status = np.zeros(m, dtype=np.int8)
    costs = np.zeros(m)
    k = kind.shape[0]
    if k == 0:
        return status, costs
    x = P[:, :, 0]
    y = P[:, :, 1]
    hit_imp = np.zeros(m, dtype=bool)
    best = np.zeros(m)
    hit_perm = np.zeros(m, dtype=bool)
    for o in range(k):
        g = geom[o]
        if kind[o] == 0:
            dx = x - g[0]
            dy = y - g[1]
            ins = (dx * dx + dy * dy <= g[2] * g[2]).any(axis=1)
        else:
            ins = ((x >= g[0]) & (x <= g[2]) & (y >= g[1]) & (y <= g[3])).any(axis=1)
        if imp[o]:
            hit_imp |= ins
        else:
            hit_perm |= ins
            best = np.where(ins & (cost[o] > best), cost[o], best)
    status[hit_perm] = 1
    costs[hit_perm] = best[hit_perm]
    status[hit_imp] = 2
    costs[hit_imp] = 0.0
    return status, costs


def clearance_groups(P, kind, geom, imp):
    """Per-class minimum distance per group; ``inf`` when a class is empty."""
    m = P.shape[0]
    dp = np.full(m, INF)
    di = np.full(m, INF)
    x = P[:, :, 0]
    y = P[:, :, 1]
    for o in range(kind.shape[0]):
        g = geom[o]
        if kind[o] == 0:
            dx = x - g[0]
            dy = y - g[1]
            d = np.sqrt(dx * dx + dy * dy) - g[2]
            d = np.where(d > 0.0, d, 0.0)
        else:
            ex = np.maximum(g[0] - x, x - g[2])
            ey = np.maximum(g[1] - y, y - g[3])
            ex = np.where(ex < 0.0, 0.0, ex)
            ey = np.where(ey < 0.0, 0.0, ey)
            d = np.sqrt(ex * ex + ey * ey)
        dmin = d.min(axis=1)
        if imp[o]:
            di = np.minimum(di, dmin)
        else:
            dp = np.minimum(dp, dmin)
    return dp, di


def clearance_grad(x, y, kind, geom, imp):
    """Nearest distance and its spatial gradient for each obstacle class.

    Returns ``(d_perm, gx_perm, gy_perm, d_imp, gx_imp, gy_imp)``. Distances
    are ``inf`` for an empty class; the gradient is zero where the distance
    is zero (inside or on a shape) and is taken from the lowest-index
    obstacle on ties.
    """
    out = [INF, 0.0, 0.0, INF, 0.0, 0.0]
    for o in range(kind.shape[0]):
        g = geom[o]
        base = 3 if imp[o] else 0
        if kind[o] == 0:
            dx = x - g[0]
            dy = y - g[1]
            nrm = math.sqrt(dx * dx + dy * dy)
            d = nrm - g[2]
            if d > 0.0:
                gx = dx / nrm
                gy = dy / nrm
            else:
                d = 0.0
                gx = gy = 0.0
        else:
            cx = min(max(x, g[0]), g[2])
            cy = min(max(y, g[1]), g[3])
            ex = x - cx
            ey = y - cy
            d = math.sqrt(ex * ex + ey * ey)
            if d > 0.0:
                gx = ex / d
                gy = ey / d
            else:
                gx = gy = 0.0
        if d < out[base]:
            out[base] = d
            out[base + 1] = gx
            out[base + 2] = gy
    return tuple(float(v) for v in out)
