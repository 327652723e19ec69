# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the functions in ``_pykernels``.

Arithmetic order matches the Python fallback exactly; do not reorder sums.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef double PI = 3.141592653589793
cdef double TWO_PI = 2.0 * 3.141592653589793


cdef inline double _wdiff(double a, double b, unsigned char w) noexcept nogil:
    cdef double d = a - b
    if w:
        if d > PI:
            d -= TWO_PI
        elif d <= -PI:
            d += TWO_PI
    return d


cdef inline double _sq(const double[:, ::1] X, Py_ssize_t i, const double[::1] q,
                       const unsigned char[::1] wrap) noexcept nogil:
    cdef Py_ssize_t j, dim = q.shape[0]
    cdef double d = _wdiff(X[i, 0], q[0], wrap[0])
    cdef double s = d * d
    for j in range(1, dim):
        d = _wdiff(X[i, j], q[j], wrap[j])
        s += d * d
    return s


def nearest(const double[:, ::1] X, Py_ssize_t n, const double[::1] q,
            const unsigned char[::1] wrap):
    if n <= 0:
        raise ValueError("empty point set")
    cdef Py_ssize_t i, best = 0
    cdef double s, bs
    with nogil:
        bs = _sq(X, 0, q, wrap)
        for i in range(1, n):
            s = _sq(X, i, q, wrap)
            if s < bs:
                bs = s
                best = i
    return best


def within_radius(const double[:, ::1] X, Py_ssize_t n, const double[::1] q,
                  const unsigned char[::1] wrap, double r):
    out = np.empty(n if n > 0 else 0, dtype=np.intp)
    dist = np.empty(n if n > 0 else 0)
    cdef Py_ssize_t[::1] o = out
    cdef double[::1] dd = dist
    cdef Py_ssize_t i, c = 0
    cdef double d
    with nogil:
        for i in range(n):
            d = sqrt(_sq(X, i, q, wrap))
            if d <= r:
                o[c] = i
                dd[c] = d
                c += 1
    return out[:c], dist[:c]


def classify_groups(const double[:, :, ::1] P, const signed char[::1] kind,
                    const double[:, ::1] geom, const unsigned char[::1] imp,
                    const double[::1] cost):
    cdef Py_ssize_t m = P.shape[0], npts = P.shape[1], k = kind.shape[0]
    status = np.zeros(m, dtype=np.int8)
    costs = np.zeros(m)
    cdef signed char[::1] st = status
    cdef double[::1] cs = costs
    cdef Py_ssize_t g, p, o
    cdef double x, y, dx, dy, best
    cdef bint ins, hit_perm, hit_imp
    with nogil:
        for g in range(m):
            hit_perm = False
            hit_imp = False
            best = 0.0
            for o in range(k):
                ins = False
                for p in range(npts):
                    x = P[g, p, 0]
                    y = P[g, p, 1]
                    if kind[o] == 0:
                        dx = x - geom[o, 0]
                        dy = y - geom[o, 1]
                        if dx * dx + dy * dy <= geom[o, 2] * geom[o, 2]:
                            ins = True
                            break
                    elif geom[o, 0] <= x and x <= geom[o, 2] and geom[o, 1] <= y and y <= geom[o, 3]:
                        ins = True
                        break
                if ins:
                    if imp[o]:
                        hit_imp = True
                    else:
                        hit_perm = True
                        if cost[o] > best:
                            best = cost[o]
            if hit_imp:
                st[g] = 2
            elif hit_perm:
                st[g] = 1
                cs[g] = best
    return status, costs


cdef inline double _dist(signed char kind, const double[:, ::1] geom, Py_ssize_t o,
                         double x, double y) noexcept nogil:
    cdef double dx, dy, d, ex, ey
    if kind == 0:
        dx = x - geom[o, 0]
        dy = y - geom[o, 1]
        d = sqrt(dx * dx + dy * dy) - geom[o, 2]
        return d if d > 0.0 else 0.0
    ex = geom[o, 0] - x
    if x - geom[o, 2] > ex:
        ex = x - geom[o, 2]
    ey = geom[o, 1] - y
    if y - geom[o, 3] > ey:
        ey = y - geom[o, 3]
    if ex < 0.0:
        ex = 0.0
    if ey < 0.0:
        ey = 0.0
    return sqrt(ex * ex + ey * ey)


def clearance_groups(const double[:, :, ::1] P, const signed char[::1] kind,
                     const double[:, ::1] geom, const unsigned char[::1] imp):
    cdef Py_ssize_t m = P.shape[0], npts = P.shape[1], k = kind.shape[0]
    dp_arr = np.full(m, np.inf)
    di_arr = np.full(m, np.inf)
    cdef double[::1] dp = dp_arr
    cdef double[::1] di = di_arr
    cdef Py_ssize_t g, p, o
    cdef double d, dmin
    with nogil:
        for g in range(m):
            for o in range(k):
                dmin = INFINITY
                for p in range(npts):
                    d = _dist(kind[o], geom, o, P[g, p, 0], P[g, p, 1])
                    if d < dmin:
                        dmin = d
                if imp[o]:
                    if dmin < di[g]:
                        di[g] = dmin
                elif dmin < dp[g]:
                    dp[g] = dmin
    return dp_arr, di_arr


def clearance_grad(double x, double y, const signed char[::1] kind,
                   const double[:, ::1] geom, const unsigned char[::1] imp):
    cdef double out[6]
    out[0] = INFINITY
    out[1] = 0.0
    out[2] = 0.0
    out[3] = INFINITY
    out[4] = 0.0
    out[5] = 0.0
    cdef Py_ssize_t o, base
    cdef double dx, dy, nrm, d, gx, gy, cx, cy
    for o in range(kind.shape[0]):
        base = 3 if imp[o] else 0
        if kind[o] == 0:
            dx = x - geom[o, 0]
            dy = y - geom[o, 1]
            nrm = sqrt(dx * dx + dy * dy)
            d = nrm - geom[o, 2]
            if d > 0.0:
                gx = dx / nrm
                gy = dy / nrm
            else:
                d = 0.0
                gx = 0.0
                gy = 0.0
        else:
            cx = x
            if cx < geom[o, 0]:
                cx = geom[o, 0]
            if cx > geom[o, 2]:
                cx = geom[o, 2]
            cy = y
            if cy < geom[o, 1]:
                cy = geom[o, 1]
            if cy > geom[o, 3]:
                cy = geom[o, 3]
            dx = x - cx
            dy = y - cy
            d = sqrt(dx * dx + dy * dy)
            if d > 0.0:
                gx = dx / d
                gy = dy / d
            else:
                gx = 0.0
                gy = 0.0
        if d < out[base]:
            out[base] = d
            out[base + 1] = gx
            out[base + 2] = gy
    return (out[0], out[1], out[2], out[3], out[4], out[5])
