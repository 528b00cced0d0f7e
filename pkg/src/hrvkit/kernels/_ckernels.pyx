# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled counting kernels.

Bit-for-bit twin of the numpy fallback: drivers pass fully transformed
float64 arrays, and every reduction below is the same strict left fold
(or global running sum minus path offset) the fallback performs.  Change
either backend only together with the other.
"""

from libc.stdlib cimport free, malloc

import numpy as np


def rect_hits(x, thresholds):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] thr = np.ascontiguousarray(thresholds, dtype=np.float64)
    if thr.shape[0] != xv.shape[1]:
        raise ValueError("thresholds must match the column count")
    cdef Py_ssize_t n = xv.shape[0], m = xv.shape[1], i, k
    cdef long long hits = 0
    cdef bint ok
    for i in range(n):
        ok = True
        for k in range(m):
            if not (xv[i, k] > thr[k]):
                ok = False
                break
        if ok:
            hits += 1
    return int(hits)


def sum_tail_hits(x, cutoff):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = xv.shape[1], i, k
    if m == 0:
        raise ValueError("need at least one column")
    cdef double c = cutoff
    cdef double s
    cdef long long hits = 0
    for i in range(n):
        s = 0.0
        for k in range(m):
            s = s + xv[i, k]
        if s > c:
            hits += 1
    return int(hits)


def ordered_rect_hits(e, gamma_bounds):
    cdef double[:, ::1] ev = np.ascontiguousarray(e, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(gamma_bounds, dtype=np.float64)
    if g.shape[0] != ev.shape[1]:
        raise ValueError("gamma_bounds must match the column count")
    cdef Py_ssize_t n = ev.shape[0], m = ev.shape[1], i, k
    cdef double run
    cdef long long hits = 0
    cdef bint ok
    for i in range(n):
        run = 0.0
        ok = True
        for k in range(m):
            run = run + ev[i, k]
            if not (run < g[k]):
                ok = False
                break
        if ok:
            hits += 1
    return int(hits)


def jumpset_hits(e, u, gamma_bounds, rho):
    cdef double[:, ::1] ev = np.ascontiguousarray(e, dtype=np.float64)
    cdef double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(gamma_bounds, dtype=np.float64)
    if uv.shape[0] != ev.shape[0] or uv.shape[1] != ev.shape[1]:
        raise ValueError("e and u must have equal shapes")
    if g.shape[0] != ev.shape[1]:
        raise ValueError("gamma_bounds must match the column count")
    cdef Py_ssize_t n = ev.shape[0], m = ev.shape[1], i, k, l
    if m > 64:
        raise ValueError("at most 64 columns supported")
    cdef double r = rho
    cdef double run, key
    cdef double buf[64]
    cdef long long hits = 0
    cdef bint ok
    for i in range(n):
        run = 0.0
        ok = True
        for k in range(m):
            run = run + ev[i, k]
            if not (run < g[k]):
                ok = False
                break
        if not ok:
            continue
        if m >= 2 and r > 0.0:
            for k in range(m):
                key = uv[i, k]
                l = k
                while l > 0 and buf[l - 1] > key:
                    buf[l] = buf[l - 1]
                    l -= 1
                buf[l] = key
            for k in range(m - 1):
                if not (buf[k + 1] - buf[k] >= r):
                    ok = False
                    break
        if ok:
            hits += 1
    return int(hits)


def smalljump_sup_hits(counts, e_flat, s_flat, comp, threshold):
    cdef long long[::1] cv = np.ascontiguousarray(counts, dtype=np.int64)
    cdef double[::1] ev = np.ascontiguousarray(e_flat, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s_flat, dtype=np.float64)
    cdef Py_ssize_t npaths = cv.shape[0], i, k, n
    cdef long long total = 0
    cdef long long maxc = 1
    for i in range(npaths):
        if cv[i] < 0:
            raise ValueError("counts must be nonnegative")
        total += cv[i]
        if cv[i] > maxc:
            maxc = cv[i]
    if ev.shape[0] != total + npaths:
        raise ValueError("e_flat must hold counts[i] + 1 entries per path")
    if sv.shape[0] != total:
        raise ValueError("s_flat must hold counts[i] entries per path")
    cdef double c = comp
    cdef double thr = threshold
    cdef double eg = 0.0, sg = 0.0
    cdef double e_off, s_off, div, t, a, b, amax, bmin, terminal, sup
    cdef Py_ssize_t epos = 0, spos = 0
    cdef long long hits = 0
    cdef double* gbuf = <double*> malloc(<size_t> maxc * sizeof(double))
    if gbuf == NULL:
        raise MemoryError()
    try:
        for i in range(npaths):
            n = <Py_ssize_t> cv[i]
            e_off = eg
            for k in range(n):
                eg = eg + ev[epos]
                epos += 1
                gbuf[k] = eg - e_off
            eg = eg + ev[epos]
            epos += 1
            div = eg - e_off
            s_off = sg
            amax = 0.0
            bmin = 0.0
            for k in range(n):
                t = gbuf[k] / div
                b = (sg - s_off) - c * t
                if b < bmin:
                    bmin = b
                sg = sg + sv[spos]
                spos += 1
                a = (sg - s_off) - c * t
                if a > amax:
                    amax = a
            terminal = (sg - s_off) - c
            if terminal < bmin:
                bmin = terminal
            sup = amax
            if -bmin > sup:
                sup = -bmin
            if sup > thr:
                hits += 1
    finally:
        free(gbuf)
    return int(hits)
