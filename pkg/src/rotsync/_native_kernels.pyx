# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shrinkage kernels: single-pass, temporary-free versions of the
entrywise and 3x3-blockwise soft-threshold operators, plus fused variants
that also accumulate the residual statistics the solvers need."""

from libc.math cimport fabs, sqrt


def soft_threshold(double[:, ::1] m, double lam, double[:, ::1] out):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef double v
    for i in range(rows):
        for j in range(cols):
            v = m[i, j]
            if v > lam:
                out[i, j] = v - lam
            elif v < -lam:
                out[i, j] = v + lam
            else:
                out[i, j] = 0.0


def soft_threshold_masked(double[:, ::1] m, double[:, ::1] mask,
                          double lam, double[:, ::1] out):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef double v
    for i in range(rows):
        for j in range(cols):
            v = m[i, j] * mask[i, j]
            if v > lam:
                out[i, j] = v - lam
            elif v < -lam:
                out[i, j] = v + lam
            else:
                out[i, j] = 0.0


def block_soft_threshold(double[:, ::1] m, double lam, double[:, ::1] out):
    cdef Py_ssize_t bi, bj, a, b, r0, c0
    cdef Py_ssize_t nb = m.shape[0] // 3, mb = m.shape[1] // 3
    cdef double acc, f, v
    for bi in range(nb):
        r0 = 3 * bi
        for bj in range(mb):
            c0 = 3 * bj
            acc = 0.0
            for a in range(3):
                for b in range(3):
                    v = m[r0 + a, c0 + b]
                    acc += v * v
            if acc == 0.0:
                f = 0.0
            else:
                f = 1.0 - lam / sqrt(acc)
                if f < 0.0:
                    f = 0.0
            for a in range(3):
                for b in range(3):
                    out[r0 + a, c0 + b] = m[r0 + a, c0 + b] * f


def block_soft_threshold_masked(double[:, ::1] m, double[:, ::1] mask,
                                double lam, double[:, ::1] out):
    cdef Py_ssize_t bi, bj, a, b, r0, c0
    cdef Py_ssize_t nb = m.shape[0] // 3, mb = m.shape[1] // 3
    cdef double acc, f, v
    for bi in range(nb):
        r0 = 3 * bi
        for bj in range(mb):
            c0 = 3 * bj
            acc = 0.0
            for a in range(3):
                for b in range(3):
                    v = m[r0 + a, c0 + b] * mask[r0 + a, c0 + b]
                    acc += v * v
            if acc == 0.0:
                f = 0.0
            else:
                f = 1.0 - lam / sqrt(acc)
                if f < 0.0:
                    f = 0.0
            for a in range(3):
                for b in range(3):
                    out[r0 + a, c0 + b] = m[r0 + a, c0 + b] * mask[r0 + a, c0 + b] * f


def soft_threshold_stats(double[:, ::1] m, double lam, double[:, ::1] out):
    """Entrywise shrinkage; returns (fit, shrunk_sum) where fit is
    sum(min(lam, |x|)^2) and shrunk_sum is the L1 norm of the output."""
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef double v, a, kept
    cdef double fit = 0.0, shrunk = 0.0
    for i in range(rows):
        for j in range(cols):
            v = m[i, j]
            a = fabs(v)
            kept = a if a < lam else lam
            fit += kept * kept
            if v > lam:
                out[i, j] = v - lam
                shrunk += v - lam
            elif v < -lam:
                out[i, j] = v + lam
                shrunk += -(v + lam)
            else:
                out[i, j] = 0.0
    return fit, shrunk


def soft_threshold_stats_masked(double[:, ::1] m, double[:, ::1] mask,
                                double lam, double[:, ::1] out):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef double v, a, kept
    cdef double fit = 0.0, shrunk = 0.0
    for i in range(rows):
        for j in range(cols):
            v = m[i, j] * mask[i, j]
            a = fabs(v)
            kept = a if a < lam else lam
            fit += kept * kept
            if v > lam:
                out[i, j] = v - lam
                shrunk += v - lam
            elif v < -lam:
                out[i, j] = v + lam
                shrunk += -(v + lam)
            else:
                out[i, j] = 0.0
    return fit, shrunk


def block_soft_threshold_stats(double[:, ::1] m, double lam, double[:, ::1] out):
    """Blockwise shrinkage; returns (fit, shrunk_sum) where fit is
    sum(min(lam, ||B||)^2) and shrunk_sum is sum(max(||B|| - lam, 0))."""
    cdef Py_ssize_t bi, bj, a, b, r0, c0
    cdef Py_ssize_t nb = m.shape[0] // 3, mb = m.shape[1] // 3
    cdef double acc, f, v, norm, kept
    cdef double fit = 0.0, shrunk = 0.0
    for bi in range(nb):
        r0 = 3 * bi
        for bj in range(mb):
            c0 = 3 * bj
            acc = 0.0
            for a in range(3):
                for b in range(3):
                    v = m[r0 + a, c0 + b]
                    acc += v * v
            norm = sqrt(acc)
            kept = norm if norm < lam else lam
            fit += kept * kept
            if norm > lam:
                f = (norm - kept) / norm
                shrunk += norm - kept
            else:
                f = 0.0
            for a in range(3):
                for b in range(3):
                    out[r0 + a, c0 + b] = m[r0 + a, c0 + b] * f
    return fit, shrunk


def block_soft_threshold_stats_masked(double[:, ::1] m, double[:, ::1] mask,
                                      double lam, double[:, ::1] out):
    cdef Py_ssize_t bi, bj, a, b, r0, c0
    cdef Py_ssize_t nb = m.shape[0] // 3, mb = m.shape[1] // 3
    cdef double acc, f, v, norm, kept
    cdef double fit = 0.0, shrunk = 0.0
    for bi in range(nb):
        r0 = 3 * bi
        for bj in range(mb):
            c0 = 3 * bj
            acc = 0.0
            for a in range(3):
                for b in range(3):
                    v = m[r0 + a, c0 + b] * mask[r0 + a, c0 + b]
                    acc += v * v
            norm = sqrt(acc)
            kept = norm if norm < lam else lam
            fit += kept * kept
            if norm > lam:
                f = (norm - kept) / norm
                shrunk += norm - kept
            else:
                f = 0.0
            for a in range(3):
                for b in range(3):
                    out[r0 + a, c0 + b] = m[r0 + a, c0 + b] * mask[r0 + a, c0 + b] * f
    return fit, shrunk


def build_residual_target(double[:, ::1] x, double[:, ::1] s1,
                          double[:, ::1] lcomp, double[:, ::1] out):
    """out = x - s1 + lcomp, returning its squared Frobenius norm."""
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef double v, acc = 0.0
    for i in range(rows):
        for j in range(cols):
            v = x[i, j] - s1[i, j] + lcomp[i, j]
            out[i, j] = v
            acc += v * v
    return acc
