# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dual-homodyne photocount sampler.

Draw order and arithmetic match ``flqkd._fallback.sample_block`` exactly, so
both paths yield identical samples from the same bit generator.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_poisson, random_standard_normal

cnp.import_array()

cdef double INV_SQRT2 = 0.70710678118654752440


def sample_block(bit_generator, Py_ssize_t n, Py_ssize_t M, double sb, double cr, double ci,
                 double s, double q):
    """Return int64 arrays (I, Q) for ``n`` symbols of ``M`` mode pairs each.

    Per mode, with xi1, xi2 standard complex normals, the return field is
    b = sb * xi1 and the LO field is r = (cr + i ci) * xi1 + s * xi2.  Each
    detector's photocount is Poisson with mean q * sum_m |b +- r|^2 (I arm) or
    q * sum_m |b +- i r|^2 (Q arm).
    """
    cdef bitgen_t *rng
    cdef const char *name = "BitGenerator"
    capsule = bit_generator.capsule
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, name)

    cdef cnp.ndarray[double, ndim=2] lam = np.empty((n, 4), dtype=np.float64)
    cdef double[:, ::1] lv = lam
    cdef int64_t[::1] Iv
    cdef int64_t[::1] Qv
    I_out = np.empty(n, dtype=np.int64)
    Q_out = np.empty(n, dtype=np.int64)
    Iv = I_out
    Qv = Q_out

    cdef Py_ssize_t t, m
    cdef double g0, g1, g2, g3, x1r, x1i, x2r, x2i, br, bi, rr, ri
    cdef double ui, vi, uq, vq, a0, a1, a2, a3
    cdef int64_t n0, n1, n2, n3

    with bit_generator.lock, nogil:
        for t in range(n):
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            for m in range(M):
                g0 = random_standard_normal(rng)
                g1 = random_standard_normal(rng)
                g2 = random_standard_normal(rng)
                g3 = random_standard_normal(rng)
                x1r = g0 * INV_SQRT2
                x1i = g1 * INV_SQRT2
                x2r = g2 * INV_SQRT2
                x2i = g3 * INV_SQRT2
                br = sb * x1r
                bi = sb * x1i
                rr = (cr * x1r - ci * x1i) + s * x2r
                ri = (cr * x1i + ci * x1r) + s * x2i
                ui = br + rr
                vi = bi + ri
                a0 = a0 + (ui * ui + vi * vi)
                ui = br - rr
                vi = bi - ri
                a1 = a1 + (ui * ui + vi * vi)
                uq = br - ri
                vq = bi + rr
                a2 = a2 + (uq * uq + vq * vq)
                uq = br + ri
                vq = bi - rr
                a3 = a3 + (uq * uq + vq * vq)
            lv[t, 0] = q * a0
            lv[t, 1] = q * a1
            lv[t, 2] = q * a2
            lv[t, 3] = q * a3
        for t in range(n):
            n0 = random_poisson(rng, lv[t, 0])
            n1 = random_poisson(rng, lv[t, 1])
            n2 = random_poisson(rng, lv[t, 2])
            n3 = random_poisson(rng, lv[t, 3])
            Iv[t] = n0 - n1
            Qv[t] = n2 - n3
    return I_out, Q_out
