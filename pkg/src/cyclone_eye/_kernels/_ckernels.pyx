# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Must stay behaviourally identical to ``_pure``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()

BACKEND = "cython"


cdef inline double _dmin(double a, double b) nogil:
    return a if a < b else b


def aggregate(const double[:, ::1] terms, const double[::1] strengths):
    cdef Py_ssize_t t, s
    cdef Py_ssize_t T = terms.shape[0], S = terms.shape[1]
    cdef double v
    out = np.zeros(S, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for t in range(T):
            if strengths[t] <= 0.0:
                continue
            for s in range(S):
                v = _dmin(terms[t, s], strengths[t])
                if v > o[s]:
                    o[s] = v
    return out


cdef inline double _w(Py_ssize_t s, Py_ssize_t S) nogil:
    # trapezoid weights: the two end samples count half
    return 0.5 if (s == 0 or s == S - 1) else 1.0


cdef double _coa(const double[::1] xs, const double[::1] mu) nogil:
    cdef Py_ssize_t s, S = xs.shape[0]
    cdef double num = 0.0, den = 0.0, w
    for s in range(S):
        w = _w(s, S) * mu[s]
        num += xs[s] * w
        den += w
    if den <= 0.0:
        return NAN
    return num / den


def coa(const double[::1] xs, const double[::1] mu):
    return _coa(xs, mu)


def aggregate_coa_batch(const double[:, ::1] terms, const double[::1] xs,
                        const double[:, ::1] strengths):
    cdef Py_ssize_t n, t, s
    cdef Py_ssize_t N = strengths.shape[0], T = terms.shape[0], S = terms.shape[1]
    cdef double v, h, num, den
    out = np.empty(N, dtype=np.float64)
    buf = np.empty(S, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] m = buf
    with nogil:
        for n in range(N):
            for s in range(S):
                m[s] = 0.0
            for t in range(T):
                h = strengths[n, t]
                if h <= 0.0:
                    continue
                for s in range(S):
                    v = _dmin(terms[t, s], h)
                    m[s] = v if v > m[s] else m[s]
            num = 0.0
            den = 0.0
            for s in range(1, S - 1):
                num += xs[s] * m[s]
                den += m[s]
            if S > 1:
                num += 0.5 * (xs[0] * m[0] + xs[S - 1] * m[S - 1])
                den += 0.5 * (m[0] + m[S - 1])
            elif S == 1:
                num += 0.5 * xs[0] * m[0]
                den += 0.5 * m[0]
            o[n] = num / den if den > 0.0 else NAN
    return out


cdef void _window_pass(const unsigned char[:, ::1] src, unsigned char[:, ::1] dst,
                       Py_ssize_t r, bint along_rows, bint want_all) nogil:
    # Sliding count of ones over a (2r+1) window; out-of-bounds pixels count as 0.
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1]
    cdef Py_ssize_t outer = H if along_rows else W
    cdef Py_ssize_t L = W if along_rows else H
    cdef Py_ssize_t side = 2 * r + 1
    cdef Py_ssize_t o, k, count, lo, hi
    for o in range(outer):
        count = 0
        for k in range(0, r if r < L else L):
            count += src[o, k] if along_rows else src[k, o]
        for k in range(L):
            hi = k + r
            if hi < L:
                count += src[o, hi] if along_rows else src[hi, o]
            lo = k - r - 1
            if lo >= 0:
                count -= src[o, lo] if along_rows else src[lo, o]
            if along_rows:
                dst[o, k] = (count == side) if want_all else (count > 0)
            else:
                dst[k, o] = (count == side) if want_all else (count > 0)


def _separable(img, Py_ssize_t r, bint want_all):
    src = np.ascontiguousarray(img, dtype=np.uint8)
    tmp = np.zeros_like(src)
    out = np.zeros_like(src)
    cdef const unsigned char[:, ::1] s = src
    cdef unsigned char[:, ::1] tv = tmp
    cdef unsigned char[:, ::1] ov = out
    with nogil:
        _window_pass(s, tv, r, True, want_all)
        _window_pass(tv, ov, r, False, want_all)
    return out


def erode(img, Py_ssize_t radius):
    return _separable(img, radius, True)


def dilate(img, Py_ssize_t radius):
    return _separable(img, radius, False)


def mass_moments(img):
    """(mass, sum of 1-based column index, sum of 1-based row index)."""
    src = np.ascontiguousarray(img, dtype=np.uint8)
    cdef const unsigned char[:, ::1] a = src
    cdef Py_ssize_t i, j
    cdef long long mass = 0, sx = 0, sy = 0, rowmass, rowx, v
    with nogil:
        for j in range(a.shape[0]):
            rowmass = 0
            rowx = 0
            for i in range(a.shape[1]):
                v = a[j, i] != 0  # branchless: random masks defeat prediction
                rowmass += v
                rowx += v * (i + 1)
            mass += rowmass
            sx += rowx
            sy += rowmass * (j + 1)
    return int(mass), int(sx), int(sy)
