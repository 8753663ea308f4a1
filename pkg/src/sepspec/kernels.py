"""Backend selection for the Sturm kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SEPSPEC_PURE_PYTHON=1`` is set, the numpy fallback.
``SEPSPEC_THREADS`` caps the worker pool used by :func:`bisect_indices`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("SEPSPEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

__all__ = ["BACKEND", "sturm_counts", "bisect_indices", "thread_count", "get_backend"]


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def thread_count() -> int:
    env = os.environ.get("SEPSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sturm_counts(d, e2, shifts, pivmin, backend=None):
    return get_backend(backend).sturm_counts(d, e2, shifts, pivmin)


def bisect_indices(d, e2, indices, lo, hi, pivmin, abstol=0.0, max_iter=128,
                   threads=None, backend=None):
    """Eigenvalues by global index, each bisected independently.

    Work is split into contiguous chunks over a thread pool. Every index
    follows its own fixed bisection schedule, so the result does not depend
    on the number of workers.
    """
    impl = get_backend(backend)
    d = np.ascontiguousarray(d, dtype=np.float64)
    e2 = np.ascontiguousarray(e2, dtype=np.float64)
    k = np.ascontiguousarray(indices, dtype=np.int64)
    n = threads or thread_count()
    if n <= 1 or k.size < 2:
        return impl.bisect_indices(d, e2, k, lo, hi, pivmin, abstol, max_iter)
    chunks = np.array_split(k, min(n, k.size))
    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = pool.map(lambda c: impl.bisect_indices(d, e2, c, lo, hi, pivmin, abstol, max_iter), chunks)
        return np.concatenate(list(parts))
