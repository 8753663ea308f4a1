"""Pure numpy Sturm-sequence kernels (fallback backend).

The recurrences are vectorized across shifts rather than along the matrix.
Arithmetic is performed in the same order as the compiled kernels, so the
two backends agree bit for bit.
"""

import numpy as np


def sturm_counts(d, e2, shifts, pivmin):
    """Number of eigenvalues strictly below each shift."""
    d = np.asarray(d, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    s = np.ascontiguousarray(shifts, dtype=np.float64).ravel()
    q = d[0] - s
    q[np.abs(q) < pivmin] = -pivmin
    c = (q < 0.0).astype(np.int64)
    for i in range(1, d.size):
        q = (d[i] - s) - e2[i - 1] / q
        q[np.abs(q) < pivmin] = -pivmin
        c += q < 0.0
    return c


def bisect_indices(d, e2, indices, lo0, hi0, pivmin, abstol, max_iter):
    """Bisect the eigenvalues with the given 0-based indices inside ``[lo0, hi0]``."""
    k = np.ascontiguousarray(indices, dtype=np.int64).ravel()
    lo = np.full(k.size, float(lo0))
    hi = np.full(k.size, float(hi0))
    active = np.ones(k.size, dtype=bool)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active &= (mid > lo) & (mid < hi) & ~(hi - lo <= abstol)
        if not active.any():
            break
        idx = np.flatnonzero(active)
        above = sturm_counts(d, e2, mid[idx], pivmin) > k[idx]
        hi[idx[above]] = mid[idx[above]]
        lo[idx[~above]] = mid[idx[~above]]
    return 0.5 * (lo + hi)
