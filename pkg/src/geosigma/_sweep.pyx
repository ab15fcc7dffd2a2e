# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gauss-Seidel fast sweeping for one half of a strip grid."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cdef double BIG = 1e30


cdef inline double _godunov(double a, double b, double f, double ds, double dt,
                            double alpha, double beta) nogil:
    cdef double u, disc
    if a <= b:
        u = a + f * ds
    else:
        u = b + f * dt
    if u <= (b if a <= b else a):
        return u
    disc = (alpha + beta) * f * f - alpha * beta * (a - b) * (a - b)
    if disc < 0.0:
        disc = 0.0
    return (alpha * a + beta * b + sqrt(disc)) / (alpha + beta)


def sweep_half(double[:, ::1] speed, double ds, double dt, bint periodic,
               double tol, int max_iter):
    """Solve |grad d| = speed with d = 0 on row 0, rows spaced ds, columns dt.

    Returns ``(d, iterations, last_change)``.
    """
    cdef Py_ssize_t M1 = speed.shape[0], L = speed.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.full((M1, L), BIG)
    cdef double[:, ::1] d = arr
    cdef Py_ssize_t ii, jj, i, j, jl, jr
    cdef int it, order, sdir, tdir
    cdef double a, b, u, change = 0.0, old
    cdef double alpha = 1.0 / (ds * ds), beta = 1.0 / (dt * dt)
    for j in range(L):
        d[0, j] = 0.0
    it = 0
    while it < max_iter:
        it += 1
        change = 0.0
        for order in range(4):
            sdir = 1 if order < 2 else -1
            tdir = 1 if order % 2 == 0 else -1
            for ii in range(1, M1):
                i = ii if sdir > 0 else M1 - ii
                for jj in range(L):
                    j = jj if tdir > 0 else L - 1 - jj
                    a = d[i - 1, j]
                    if i + 1 < M1 and d[i + 1, j] < a:
                        a = d[i + 1, j]
                    if periodic:
                        jl = j - 1 if j > 0 else L - 1
                        jr = j + 1 if j < L - 1 else 0
                        b = d[i, jl]
                        if d[i, jr] < b:
                            b = d[i, jr]
                    else:
                        b = BIG
                        if j > 0:
                            b = d[i, j - 1]
                        if j < L - 1 and d[i, j + 1] < b:
                            b = d[i, j + 1]
                    u = _godunov(a, b, speed[i, j], ds, dt, alpha, beta)
                    old = d[i, j]
                    if u < old:
                        if old - u > change:
                            change = old - u
                        d[i, j] = u
        if change < tol:
            break
    return arr, it, change
