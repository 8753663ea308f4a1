"""Finite-difference reference eigenvalues of ``-(h^2/2) d^2/dx^2 + V``.

The operator is discretized with the three-point stencil on ``[-L, L]`` with
Dirichlet ends. Eigenvalues are located by Sturm-sequence bisection, each one
by its global index, and the grid is refined by factors of two with
Richardson extrapolation of the ``O(step^2)`` error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .potential import PotentialModel

log = logging.getLogger(__name__)

__all__ = [
    "Grid",
    "TridiagonalOperator",
    "OracleSpectrum",
    "discretize",
    "sturm_count",
    "eigen_window",
    "choose_half_width",
    "solve",
    "eigenvector",
    "parity",
    "parity_blocks",
    "parity_spectrum",
    "convergence_ratios",
    "MAX_EIGENVALUES",
]

MAX_EIGENVALUES = 10 ** 6
MAX_INTERVALS = 2 ** 20


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid ``x_i = -L + i*step``, ``i = 1..N``."""

    half_width: float
    points: int

    def __post_init__(self):
        if not self.half_width > 0 or self.points < 3:
            raise ValueError("need L > 0 and N >= 3")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.points + 1)

    @property
    def x(self) -> np.ndarray:
        i = np.arange(1, self.points + 1)
        # symmetric about 0 by construction: x_i = -x_{N+1-i}
        return self.step * (i - 0.5 * (self.points + 1))


@dataclass(frozen=True)
class TridiagonalOperator:
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    off2: np.ndarray = field(repr=False)
    pivmin: float = field(repr=False)

    @property
    def size(self) -> int:
        return self.diagonal.size

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros_like(self.diagonal)
        r[:-1] += np.abs(self.offdiagonal)
        r[1:] += np.abs(self.offdiagonal)
        return float(np.min(self.diagonal - r)), float(np.max(self.diagonal + r))

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)


@dataclass
class OracleSpectrum:
    """Converged eigenvalues in a window, sorted ascending."""

    eigenvalues: np.ndarray
    grid: Grid
    richardson_error: np.ndarray
    converged: bool
    window: tuple[float, float]
    levels: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @property
    def clusters(self) -> list[tuple[int, int]]:
        """Index pairs of neighbours that are equal in floating point."""
        ev = self.eigenvalues
        return [(i, i + 1) for i in range(ev.size - 1) if not ev[i + 1] > ev[i]]

    def rows(self):
        yield ("n", "eigenvalue", "richardson_error")
        for n, (e, r) in enumerate(zip(self.eigenvalues, self.richardson_error)):
            yield (n, float(e), float(r))


def discretize(V, h: float, grid: Grid) -> TridiagonalOperator:
    """Three-point stencil of ``-(h^2/2) u'' + V u`` with Dirichlet ends.

    ``V`` may be a :class:`PotentialModel` or any vectorized callable.
    """
    x = grid.x
    step = grid.step
    diag = h * h / (step * step) + np.asarray(V(x), dtype=float)
    off = np.full(grid.points - 1, -h * h / (2.0 * step * step))
    off2 = off * off
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(off2)))
    return TridiagonalOperator(diag, off, off2, pivmin)


def sturm_count(T: TridiagonalOperator, mu) -> int:
    """Number of eigenvalues of ``T`` strictly below ``mu``."""
    c = kernels.sturm_counts(T.diagonal, T.off2, np.atleast_1d(mu), T.pivmin)
    return int(c[0]) if np.ndim(mu) == 0 else c


def eigen_window(T: TridiagonalOperator, window, tol: float = 0.0) -> np.ndarray:
    """All eigenvalues in ``[a, b)``, bisected to width ``tol`` (0 = to full precision)."""
    a, b = map(float, window)
    if not a < b:
        raise ValueError("window must satisfy a < b")
    ka, kb = kernels.sturm_counts(T.diagonal, T.off2, np.array([a, b]), T.pivmin)
    if kb - ka > MAX_EIGENVALUES:
        raise ValueError(f"window holds {kb - ka} eigenvalues (limit {MAX_EIGENVALUES})")
    idx = np.arange(ka, kb, dtype=np.int64)
    if idx.size == 0:
        return np.empty(0)
    return kernels.bisect_indices(T.diagonal, T.off2, idx, a, b, T.pivmin, abstol=tol)


def _eig_by_index(T: TridiagonalOperator, idx: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return kernels.bisect_indices(T.diagonal, T.off2, idx, lo, hi, T.pivmin)


def choose_half_width(V: PotentialModel, h: float, e_max: float, decay: float = 35.0) -> float:
    """Half-width ``L`` for Dirichlet truncation.

    Requires ``V(+-L) >= e_max + 10 h`` and, in addition, a WKB decay exponent
    ``int sqrt(2 (V - e_max)) dx / h >= decay`` past the outer turning points,
    so the truncation error is below roundoff even when ``10 h`` is a thin
    margin.
    """
    out = 0.0
    for W in (V, V.mirrored()):
        # outer turning point: V is increasing beyond the last critical point
        lo = max((c for c in W.critical_points), default=0.0)
        lo = max(lo, 0.0)
        hi = max(2.0 * lo, 1.0)
        while W(hi) <= e_max:
            hi *= 1.5
        if W(lo) < e_max:
            for _ in range(200):
                m = 0.5 * (lo + hi)
                if m <= lo or m >= hi:
                    break
                if W(m) < e_max:
                    lo = m
                else:
                    hi = m
        xt = hi
        dx = 1e-3 * max(1.0, xt)
        s, xx = 0.0, xt
        while s < decay * h or W(xx) < e_max + 10.0 * h:
            s += dx * math.sqrt(max(2.0 * (W(xx + 0.5 * dx) - e_max), 0.0))
            xx += dx
        out = max(out, xx)
    return out


def _initial_intervals(V: PotentialModel, h: float, L: float, e_max: float) -> int:
    # about 24 points per local wavelength at the deepest point of the window
    xs = np.linspace(-L, L, 2001)
    pmax = math.sqrt(max(2.0 * (e_max - float(np.min(V(xs)))), 1e-30))
    m = 24.0 * 2.0 * L * pmax / (2.0 * math.pi * h)
    return int(2 ** math.ceil(math.log2(max(m, 512.0))))


def solve(V: PotentialModel, h: float, window, tol: float = 1e-9, half_width: float | None = None,
          intervals: int | None = None, max_intervals: int = MAX_INTERVALS) -> OracleSpectrum:
    """Reference eigenvalues of ``P_h`` in ``window`` with error control.

    The grid is refined by doubling the number of intervals ``M = N + 1``.
    Levels ``M`` and ``2M`` give the Richardson value ``(4 E_2M - E_M)/3``; the
    error estimate is the change of that value between consecutive pairs of
    levels. Eigenvalues are tracked by global index, so a level whose count
    in the window differs from the previous one restarts the comparison.

    Parameters
    ----------
    V : PotentialModel
    h : float
    window : (a, b)
    tol : float
        Target absolute error of each extrapolated eigenvalue.
    """
    a, b = map(float, window)
    if not a < b:
        raise ValueError("window must satisfy a < b")
    L = half_width or choose_half_width(V, h, b)
    M = intervals or _initial_intervals(V, h, L, b)
    levels = []
    prev_R = None
    best = None
    converged = False
    while M <= max_intervals:
        grid = Grid(L, M - 1)
        T = discretize(V, h, grid)
        # widen slightly so indices near the edges survive small level shifts
        pad = 0.05 * (b - a)
        ka, kb = sturm_count(T, np.array([a - pad, b + pad]))
        idx = np.arange(ka, kb, dtype=np.int64)
        ev = _eig_by_index(T, idx, a - pad, b + pad)
        levels.append((M, idx, ev))
        log.debug("oracle level M=%d: %d eigenvalues", M, idx.size)
        if len(levels) >= 2:
            R = _richardson(levels[-2], levels[-1])
            if R is not None and prev_R is not None:
                common = np.intersect1d(R[0], prev_R[0])
                if common.size:
                    r_now = R[1][np.searchsorted(R[0], common)]
                    r_old = prev_R[1][np.searchsorted(prev_R[0], common)]
                    err = np.abs(r_now - r_old)
                    best = (common, r_now, err, grid)
                    inside = (r_now >= a) & (r_now < b)
                    if np.all(err[inside] < tol):
                        converged = True
                        break
            prev_R = R
        M *= 2
    if best is None:
        # not enough levels: report the finest raw eigenvalues without extrapolation
        M_last, idx, ev = levels[-1]
        err = np.full(ev.size, np.inf)
        best = (idx, ev, err, Grid(L, M_last - 1))
    common, vals, err, grid = best
    inside = (vals >= a) & (vals < b)
    spec = OracleSpectrum(vals[inside], grid, err[inside], converged, (a, b),
                          levels=[(m, i.size) for m, i, _ in levels])
    spec.raw = {"indices": common[inside]}
    if not converged:
        log.warning("oracle did not converge to tol=%g (max error %g)", tol,
                    float(np.max(err[inside])) if np.any(inside) else float("nan"))
    return spec


def convergence_ratios(V: PotentialModel, h: float, window, intervals: int,
                       half_width: float | None = None) -> np.ndarray:
    """Observed ratios ``(E_M - E_2M) / (E_2M - E_4M)`` per eigenvalue.

    A second-order scheme in its asymptotic range gives ratios near 4.
    """
    a, b = map(float, window)
    L = half_width or choose_half_width(V, h, b)
    vals = []
    for M in (intervals, 2 * intervals, 4 * intervals):
        T = discretize(V, h, Grid(L, M - 1))
        ka, kb = sturm_count(T, np.array([a, b]))
        vals.append((np.arange(ka, kb), _eig_by_index(T, np.arange(ka, kb, dtype=np.int64), a, b)))
    common = np.intersect1d(np.intersect1d(vals[0][0], vals[1][0]), vals[2][0])
    e = [v[np.searchsorted(i, common)] for i, v in vals]
    return (e[0] - e[1]) / (e[1] - e[2])


def _richardson(coarse, fine):
    (Mc, ic, ec), (Mf, jf, ef) = coarse, fine
    if Mf != 2 * Mc:
        return None
    # eigenvalues with the same global index on both levels
    common, ia, ib = np.intersect1d(ic, jf, return_indices=True)
    if common.size == 0:
        return None
    return common, (4.0 * ef[ib] - ec[ia]) / 3.0


def eigenvector(T: TridiagonalOperator, lam: float, iters: int = 3) -> np.ndarray:
    """Eigenvector for an eigenvalue estimate ``lam`` by inverse iteration."""
    n = T.size
    shift = lam + 1e-13 * max(1.0, abs(lam))
    ab = np.zeros((3, n))
    ab[0, 1:] = T.offdiagonal
    ab[1] = T.diagonal - shift
    ab[2, :-1] = T.offdiagonal
    u = np.random.default_rng(0).standard_normal(n)
    for _ in range(iters):
        u = solve_banded((1, 1), ab, u)
        u /= np.linalg.norm(u)
    return u


def parity(u: np.ndarray) -> int:
    """+1 for an even grid function, -1 for odd (grid symmetric about 0)."""
    return 1 if float(np.dot(u, u[::-1])) >= 0.0 else -1


def parity_blocks(T: TridiagonalOperator) -> tuple[TridiagonalOperator, TridiagonalOperator]:
    """Even and odd reductions of a mirror-symmetric operator.

    For an odd number of points and a diagonal symmetric about the centre
    ``c``, even grid functions reduce to indices ``0..c`` (the coupling to the
    centre picks up a factor ``sqrt 2`` after symmetrizing) and odd ones to
    ``0..c-1`` with ``u_c = 0``. Sturm counts on the blocks give exact parities
    even for quasi-degenerate doublets.
    """
    n = T.size
    if n % 2 == 0:
        raise ValueError("parity blocks need an odd number of points")
    d, e = T.diagonal, T.offdiagonal
    if not np.array_equal(d, d[::-1]):
        raise ValueError("operator is not mirror symmetric")
    c = n // 2
    de, ee = d[:c + 1].copy(), e[:c].copy()
    ee[-1] *= math.sqrt(2.0)
    do, eo = d[:c].copy(), e[:c - 1].copy()
    blocks = []
    for dd, oo in ((de, ee), (do, eo)):
        o2 = oo * oo
        blocks.append(TridiagonalOperator(dd, oo, o2, np.finfo(float).tiny * max(1.0, float(np.max(o2)))))
    return blocks[0], blocks[1]


def parity_spectrum(V: PotentialModel, h: float, grid: Grid, window) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in ``window`` of the even and of the odd block."""
    if grid.points % 2 == 0:
        grid = Grid(grid.half_width, grid.points + 1)
    even, odd = parity_blocks(discretize(V, h, grid))
    return eigen_window(even, window), eigen_window(odd, window)
