import math

import numpy as np
import pytest

from sepspec import oracle
from sepspec.potential import PotentialModel


@pytest.fixture(scope="module")
def harmonic():
    return PotentialModel((0.0, 0.0, 0.5))


def test_grid_is_symmetric():
    g = oracle.Grid(2.0, 9)
    assert g.step == pytest.approx(0.4)
    assert np.array_equal(g.x, -g.x[::-1])
    with pytest.raises(ValueError):
        oracle.Grid(0.0, 9)


def test_discretize_matches_dense(quartic):
    T = oracle.discretize(quartic, 0.1, oracle.Grid(1.5, 101))
    dense = np.linalg.eigvalsh(T.dense())
    got = oracle.eigen_window(T, (-0.3, 0.5))
    ref = dense[(dense >= -0.3) & (dense < 0.5)]
    assert np.max(np.abs(got - ref)) < 1e-12
    lo, hi = T.gershgorin()
    assert lo <= dense[0] and dense[-1] <= hi
    assert oracle.sturm_count(T, 0.5) == int(np.sum(dense < 0.5))


def test_harmonic_levels(harmonic):
    h = 0.1
    spec = oracle.solve(harmonic, h, (0.0, 0.5), tol=1e-9)
    assert spec.converged
    n = np.arange(spec.eigenvalues.size)
    assert np.max(np.abs(spec.eigenvalues - h * (n + 0.5))) < 1e-5


def test_convergence_ratios_near_four(quartic):
    r = oracle.convergence_ratios(quartic, 0.02, (-0.26, 0.3), 1024)
    assert np.all((r > 3.5) & (r < 4.5))


def test_half_width_rule(quartic):
    L = oracle.choose_half_width(quartic, 0.01, 0.1)
    assert quartic(L) > 0.1
    assert L > oracle.choose_half_width(quartic, 0.001, 0.1) * 0.5


def test_parity_blocks_partition_spectrum(quartic):
    grid = oracle.Grid(1.5, 801)
    T = oracle.discretize(quartic, 0.02, grid)
    even, odd = oracle.parity_spectrum(quartic, 0.02, grid, (-0.26, 0.2))
    full = oracle.eigen_window(T, (-0.26, 0.2))
    assert np.max(np.abs(np.sort(np.concatenate([even, odd])) - full)) < 1e-13
    # ground state is even
    assert even[0] <= odd[0]
    u = oracle.eigenvector(T, full[-1])
    assert oracle.parity(u) in (1, -1)


def test_quasi_doublets_reported_as_clusters(quartic):
    spec = oracle.solve(quartic, 0.02, (-0.26, 0.0), tol=1e-9)
    assert (0, 1) in spec.clusters
    rows = list(spec.rows())
    assert rows[0] == ("n", "eigenvalue", "richardson_error")


def test_window_validation(quartic):
    with pytest.raises(ValueError):
        oracle.solve(quartic, 0.01, (0.1, -0.1))


def test_unconverged_is_flagged(quartic, caplog):
    with caplog.at_level("WARNING", logger="sepspec.oracle"):
        spec = oracle.solve(quartic, 0.01, (-0.1, 0.1), tol=1e-14, max_intervals=4096)
    assert not spec.converged
    assert np.all(np.isfinite(spec.eigenvalues))
    assert "did not converge" in caplog.text


def test_determinism_across_threads(quartic, monkeypatch):
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("SEPSPEC_THREADS", n)
        out.append(oracle.solve(quartic, 0.01, (-0.1, 0.1)).eigenvalues.tobytes())
    assert out[0] == out[1]
    assert math.isfinite(np.frombuffer(out[0])[0])
