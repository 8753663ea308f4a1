# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Sturm-sequence kernels.

Operation order matches ``_pykernels`` exactly so both backends produce
bitwise identical results (the extension is built without FMA contraction).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef inline long _count(const double[:] d, const double[:] e2, double s, double pivmin) noexcept nogil:
    cdef Py_ssize_t i, n = d.shape[0]
    cdef long c = 0
    cdef double q = d[0] - s
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        c += 1
    for i in range(1, n):
        q = (d[i] - s) - e2[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            c += 1
    return c


def sturm_counts(const double[:] d, const double[:] e2, shifts, double pivmin):
    """Number of eigenvalues strictly below each shift."""
    cdef const double[:] s = np.ascontiguousarray(shifts, dtype=np.float64).ravel()
    cdef Py_ssize_t j, m = s.shape[0]
    out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    with nogil:
        for j in range(m):
            o[j] = _count(d, e2, s[j], pivmin)
    return out


def bisect_indices(const double[:] d, const double[:] e2, indices, double lo0, double hi0,
                   double pivmin, double abstol, int max_iter):
    """Bisect the eigenvalues with the given 0-based indices inside ``[lo0, hi0]``."""
    cdef const cnp.int64_t[:] k = np.ascontiguousarray(indices, dtype=np.int64).ravel()
    cdef Py_ssize_t j, m = k.shape[0]
    cdef int it
    cdef double lo, hi, mid
    out = np.empty(m, dtype=np.float64)
    cdef double[:] o = out
    with nogil:
        for j in range(m):
            lo = lo0
            hi = hi0
            mid = 0.5 * (lo + hi)
            for it in range(max_iter):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi or hi - lo <= abstol:
                    break
                if _count(d, e2, mid, pivmin) > k[j]:
                    hi = mid
                else:
                    lo = mid
            o[j] = 0.5 * (lo + hi)
    return out
