import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh_tridiagonal

from sepspec import kernels


def _random_tridiagonal(seed, n):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    return d, e


needs_cython = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


def test_backend_names():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 60))
def test_counts_match_dense_solver(seed, n):
    d, e = _random_tridiagonal(seed, n)
    ev = eigh_tridiagonal(d, e, eigvals_only=True)
    shifts = np.linspace(ev[0] - 1, ev[-1] + 1, 37)
    counts = kernels.sturm_counts(d, e * e, shifts, 1e-300, backend="python")
    assert np.array_equal(counts, np.searchsorted(ev, shifts))


def test_counts_are_monotone():
    d, e = _random_tridiagonal(1, 400)
    shifts = np.sort(np.random.default_rng(2).uniform(-6, 6, 500))
    for be in ("python", None):
        c = kernels.sturm_counts(d, e * e, shifts, 1e-300, backend=be)
        assert np.all(np.diff(c) >= 0)


def test_bisection_matches_dense_solver():
    d, e = _random_tridiagonal(3, 200)
    ev = eigh_tridiagonal(d, e, eigvals_only=True)
    lo, hi = ev[0] - 1.0, ev[-1] + 1.0
    got = kernels.bisect_indices(d, e * e, np.arange(200), lo, hi, 1e-300, backend="python")
    assert np.max(np.abs(got - ev)) < 1e-13


@needs_cython
def test_backends_bitwise_identical():
    d, e = _random_tridiagonal(4, 1000)
    e2 = e * e
    shifts = np.linspace(-5, 5, 301)
    a = kernels.sturm_counts(d, e2, shifts, 1e-300, backend="python")
    b = kernels.sturm_counts(d, e2, shifts, 1e-300, backend="cython")
    assert np.array_equal(a, b)
    idx = np.arange(100, 400)
    x = kernels.bisect_indices(d, e2, idx, -10.0, 10.0, 1e-300, backend="python", threads=1)
    y = kernels.bisect_indices(d, e2, idx, -10.0, 10.0, 1e-300, backend="cython", threads=1)
    assert x.tobytes() == y.tobytes()


@pytest.mark.parametrize("backend", ["python", None])
def test_thread_count_does_not_change_results(backend):
    d, e = _random_tridiagonal(5, 500)
    idx = np.arange(500)
    ref = kernels.bisect_indices(d, e * e, idx, -10.0, 10.0, 1e-300, threads=1, backend=backend)
    for n in (2, 3, 7):
        got = kernels.bisect_indices(d, e * e, idx, -10.0, 10.0, 1e-300, threads=n, backend=backend)
        assert got.tobytes() == ref.tobytes()


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("SEPSPEC_THREADS", "3")
    assert kernels.thread_count() == 3
    monkeypatch.setenv("SEPSPEC_THREADS", "junk")
    assert kernels.thread_count() >= 1
