# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Same signatures and semantics as ``_pycore``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, copysign, INFINITY

cnp.import_array()

BACKEND = "cython"


def pairwise_dist(x):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], i, j, k
    out = np.zeros((n, n))
    cdef double[:, ::1] o = out
    cdef double s, t
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                t = xv[i, k] - xv[j, k]
                s += t * t
            s = sqrt(s)
            o[i, j] = s
            o[j, i] = s
    return out


def laplacian_drift(w, x):
    cdef double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], i, j, k
    out = np.zeros((n, d))
    cdef double[:, ::1] o = out
    cdef double wij, inv = 1.0 / n
    for i in range(n):
        for j in range(n):
            wij = wv[i, j]
            if wij != 0.0:
                for k in range(d):
                    o[i, k] += wij * (xv[j, k] - xv[i, k])
        for k in range(d):
            o[i, k] *= inv
    return out


def pair_overlap_min(rows, double n_total, double best=INFINITY):
    cdef double[:, ::1] r = np.ascontiguousarray(rows, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0], n = r.shape[1], p, q, k
    cdef double s, lim, a, b
    for p in range(m - 1):
        if best <= 0.0:
            break
        for q in range(p + 1, m):
            lim = best * n_total
            s = 0.0
            for k in range(n):
                a = r[p, k]
                b = r[q, k]
                s += a if a < b else b
                if s >= lim:
                    break
            if s < lim:
                best = s / n_total
                if best <= 0.0:
                    break
    return best


def self_overlap(row, double n_total):
    cdef double[::1] r = np.ascontiguousarray(row, dtype=np.float64)
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(r.shape[0]):
        s += r[k]
    return s / n_total


def jacobi_eigenvalues(m, double tol=1e-12, int max_sweeps=100):
    a_arr = np.array(m, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0], p, q, r
    cdef int sweep
    cdef double off, apq, theta, t, c, s, tau, g, h
    if n <= 1:
        return np.diag(a_arr).copy()
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                if fabs(a[p, q]) > off:
                    off = fabs(a[p, q])
        if off < tol:
            return np.diag(a_arr).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta  # theta**2 would overflow
                else:
                    t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = a[p, p] - t * apq
                a[q, q] = a[q, q] + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    g = a[r, p]
                    h = a[r, q]
                    a[r, p] = g - s * (h + g * tau)
                    a[r, q] = h + s * (g - h * tau)
                    a[p, r] = a[r, p]
                    a[q, r] = a[r, q]
    raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")


def perron_iterate(a, double tol=1e-12, long max_iter=100000):
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], i, j
    cdef long it
    deg_arr = np.asarray(a, dtype=np.float64).sum(axis=1)
    cdef double[::1] deg = deg_arr
    v_arr = np.ones(n)
    f_arr = np.zeros(n)
    cdef double[::1] v = v_arr
    cdef double[::1] f = f_arr
    cdef double err, mean, s
    for it in range(1, max_iter + 1):
        err = 0.0
        mean = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += av[j, i] * v[j]
            f[i] = s / deg[i]
            mean += f[i]
            if fabs(v[i] - f[i]) > err:
                err = fabs(v[i] - f[i])
        mean /= n
        for i in range(n):
            v[i] = f[i] / mean
        if err < tol:
            return v_arr, True, it
    return v_arr, False, max_iter
