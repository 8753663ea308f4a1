"""Confronting the semiclassical engine with the reference oracle.

Calibration of the constant phases, order-preserving matching of spectra,
scaling fits for gaps and counts, the consecutive-difference profile, the
zero-set comparison of the two forms of the quantization condition, and the
comparison with the regular Bohr-Sommerfeld rules away from the barrier.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import oracle as _oracle
from .classical import _omega
from .potential import PotentialModel
from .quantization import (
    TWO_PI,
    SemiclassicalParams,
    SpectrumWindow,
    cdvp_residual,
    enumerate_energies,
    enumerate_window,
    regular_bs_bottom,
    regular_bs_top,
    signed_det,
    transfer_t,
    phase_data,
)

log = logging.getLogger(__name__)

__all__ = [
    "CalibrationResult",
    "ComparisonReport",
    "ScalingFit",
    "InsufficientLevels",
    "monotone_match",
    "calibrate",
    "compare",
    "family_gaps",
    "gap_scaling",
    "count_scaling",
    "count_brackets",
    "gap_interval",
    "doublet_profile",
    "alternation_ratio",
    "smoothed_minimum",
    "find_zeros",
    "dual_sweep",
    "regular_limit",
    "implied_maslov",
    "linear_fit",
]


class InsufficientLevels(ValueError):
    pass


@dataclass
class CalibrationResult:
    mu_plus: float
    mu_minus: float
    matching_rms: float
    h_calibration: float
    per_level_residuals: np.ndarray
    uncalibrated_rms: float = float("nan")
    evaluations: int = 0


@dataclass
class ComparisonReport:
    pairs: list
    max_abs_diff: float
    rms_diff: float
    unmatched: tuple
    gap_stats: dict
    counts: tuple
    window: SpectrumWindow | None = None
    oracle: object = None

    @property
    def count_mismatch(self) -> int:
        return abs(self.counts[0] - self.counts[1])

    def rows(self):
        yield ("semiclassical", "oracle", "difference")
        for p in self.pairs:
            yield p


@dataclass
class ScalingFit:
    h_values: list
    quantity: str
    slope: float
    intercept: float
    r2: float
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    y: np.ndarray = field(default_factory=lambda: np.empty(0))
    extras: dict = field(default_factory=dict)

    @property
    def residuals(self) -> np.ndarray:
        return self.y - (self.slope * self.x + self.intercept)

    def rows(self):
        yield ("h", "x", "y", "fit_residual")
        for h, x, y, r in zip(self.h_values, self.x, self.y, self.residuals):
            yield (h, float(x), float(y), float(r))


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least squares line; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


# -------------------------------------------------------- matching

def monotone_match(a, b) -> tuple[np.ndarray, np.ndarray, int]:
    """Order-preserving pairing of two sorted sequences.

    The shorter sequence is aligned against a contiguous run of the longer
    one; among the possible offsets the one with the smallest rms difference
    wins (the first one on ties). Returns ``(a_matched, b_matched, offset)``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n = min(a.size, b.size)
    if n == 0:
        return a[:0], b[:0], 0
    swap = a.size > b.size
    s, l = (b, a) if swap else (a, b)
    best, best_d = math.inf, 0
    for d in range(l.size - s.size + 1):
        r = float(np.mean((l[d:d + s.size] - s) ** 2))
        if r < best:
            best, best_d = r, d
    lm = l[best_d:best_d + s.size]
    return (lm, s, best_d) if swap else (s, lm, best_d)


def _rms(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x))) if x.size else math.inf


# ------------------------------------------------------ calibration

def _half_gap_vec(g: np.ndarray, y: np.ndarray) -> np.ndarray:
    c, s = np.cos(g), np.sin(g)
    neg = y <= 0
    out = np.empty_like(g)
    e = np.exp(TWO_PI * np.minimum(y, 0.0))
    out[neg] = np.arctan2(np.sqrt(s[neg] ** 2 + e[neg]), c[neg])
    k = np.exp(-math.pi * np.maximum(y, 0.0))
    pos = ~neg
    out[pos] = np.arctan2(np.sqrt(s[pos] ** 2 * k[pos] ** 2 + 1.0), c[pos] * k[pos])
    return out


class _Table(NamedTuple):
    lam: np.ndarray
    f0: np.ndarray
    g0: np.ndarray
    y: np.ndarray


def _tabulate(V: PotentialModel, params: SemiclassicalParams, n: int) -> _Table:
    """``f`` and ``g`` at ``mu = 0`` on a uniform grid of ``lambda``."""
    p0 = params.with_mu(0.0, 0.0)
    lam = np.linspace(-1.0, 1.0, n)
    omega = _omega(V)
    f0, g0, y = np.empty(n), np.empty(n), np.empty(n)
    for i, L in enumerate(lam):
        d = phase_data(p0.window * L, V, p0)
        f0[i], g0[i], y[i] = d.f, d.g, d.eps / p0.h
    return _Table(lam, f0, g0, y)


def _fast_roots(tab: _Table, params: SemiclassicalParams, mu_plus: float, mu_minus: float) -> np.ndarray | None:
    """Approximate window roots by inverting tabulated ``Y`` and ``Z``."""
    sig = 0.5 * (mu_plus + mu_minus)
    dlt = 0.5 * (mu_plus - mu_minus)
    w = _half_gap_vec(tab.g0 + dlt, tab.y)
    out = []
    for fam in (tab.f0 - sig - w, tab.f0 - sig + w):
        if not np.all(np.diff(fam) < 0):
            return None
        ks = np.arange(math.ceil(fam[-1] / TWO_PI), math.floor(fam[0] / TWO_PI) + 1)
        out.append(np.interp(TWO_PI * ks, fam[::-1], tab.lam[::-1]))
    lam = np.sort(np.concatenate(out))
    return params.window * lam


def _exact_roots(V, params, mu_plus, mu_minus) -> np.ndarray:
    return enumerate_window(V, params.with_mu(mu_plus, mu_minus)).energies


def _golden(fun, a: float, b: float, xtol: float) -> tuple[float, float]:
    res = minimize_scalar(fun, bounds=(a, b), method="bounded", options={"xatol": xtol})
    return float(res.x), float(res.fun)


def calibrate(V: PotentialModel, h0: float, params: SemiclassicalParams | None = None,
              oracle_spec=None, resolution: int = 512, table_points: int = 8001,
              oracle_tol: float = 1e-10) -> CalibrationResult:
    """Fit the constant phases so the semiclassical window matches the oracle.

    A grid search over ``[0, 2 pi)`` (``resolution`` points per axis, a quarter
    of that per axis for asymmetric potentials) on tabulated phases is
    followed by bounded golden-section refinement with exact root
    enumeration. Even potentials use one parameter ``mu_plus = mu_minus``.
    """
    params = (params or SemiclassicalParams(h0)).with_h(h0).with_mu(0.0, 0.0)
    s = params.window
    if oracle_spec is None:
        oracle_spec = _oracle.solve(V, h0, (-s, s), tol=oracle_tol)
    ref = np.asarray(oracle_spec.eigenvalues)
    ref = ref[(ref >= -s) & (ref <= s)]
    if ref.size < 4:
        raise InsufficientLevels(f"only {ref.size} oracle levels in the window")
    tab = _tabulate(V, params, table_points)
    calls = [0]

    def score(roots):
        if roots is None or roots.size == 0:
            return math.inf
        a, b, _ = monotone_match(roots, ref)
        return _rms(a - b)

    def exact(mp, mm):
        calls[0] += 1
        return score(_exact_roots(V, params, mp, mm))

    step = TWO_PI / resolution
    if V.is_even:
        grid = np.arange(resolution) * step
        vals = np.array([score(_fast_roots(tab, params, m, m)) for m in grid])
        m0 = float(grid[int(np.argmin(vals))])
        mu, _ = _golden(lambda m: exact(m, m), m0 - step, m0 + step, 1e-7)
        mu_p = mu_m = mu % TWO_PI
    else:
        res2 = max(resolution // 4, 16)
        step = TWO_PI / res2
        grid = np.arange(res2) * step
        vals = np.array([[score(_fast_roots(tab, params, mp, mm)) for mm in grid] for mp in grid])
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        mu_p, mu_m = float(grid[i]), float(grid[j])
        for _ in range(3):
            mu_p, _ = _golden(lambda m: exact(m, mu_m), mu_p - step, mu_p + step, 1e-7)
            mu_m, _ = _golden(lambda m: exact(mu_p, m), mu_m - step, mu_m + step, 1e-7)
            step *= 0.5
        mu_p, mu_m = mu_p % TWO_PI, mu_m % TWO_PI
    roots = _exact_roots(V, params, mu_p, mu_m)
    a, b, _ = monotone_match(roots, ref)
    uncal = score(_exact_roots(V, params, 0.0, 0.0))
    return CalibrationResult(mu_p, mu_m, _rms(a - b), h0, a - b, uncal, calls[0])


# ------------------------------------------------------- comparison

def family_gaps(window: SpectrumWindow) -> np.ndarray:
    """Consecutive same-family gaps, both families pooled."""
    out = []
    for fam in (window.family_a, window.family_b):
        e = np.sort([r.energy for r in fam])
        out.append(np.diff(e))
    return np.concatenate(out) if out else np.empty(0)


def compare(V: PotentialModel, h: float, params: SemiclassicalParams, tol: float = 1e-9,
            oracle_spec=None) -> ComparisonReport:
    """Semiclassical window against the oracle on ``[-h^alpha, h^alpha]``."""
    params = params.with_h(h)
    s = params.window
    win = enumerate_window(V, params)
    if oracle_spec is None:
        oracle_spec = _oracle.solve(V, h, (-s, s), tol=tol)
    ref = np.asarray(oracle_spec.eigenvalues)
    ref = ref[(ref >= -s) & (ref <= s)]
    sc = win.energies
    a, b, _ = monotone_match(sc, ref)
    d = a - b
    gaps = family_gaps(win)
    stats = {
        "median_gap": float(np.median(gaps)) if gaps.size else math.nan,
        "min_gap": float(np.min(gaps)) if gaps.size else math.nan,
        "max_gap": float(np.max(gaps)) if gaps.size else math.nan,
        "count_a": len(win.family_a),
        "count_b": len(win.family_b),
    }
    rep = ComparisonReport(
        pairs=[(float(x), float(y), float(x - y)) for x, y in zip(a, b)],
        max_abs_diff=float(np.max(np.abs(d))) if d.size else math.nan,
        rms_diff=_rms(d),
        unmatched=(sc.size - a.size, ref.size - a.size),
        gap_stats=stats,
        counts=(sc.size, ref.size),
        window=win,
        oracle=oracle_spec,
    )
    if rep.count_mismatch > 2:
        log.error("count mismatch %d: semiclassical %d vs oracle %d", rep.count_mismatch, sc.size, ref.size)
    return rep


# ---------------------------------------------------------- scaling

def gap_interval(V: PotentialModel, alpha: float, delta: float = 0.5) -> tuple[float, float]:
    """Interval expected for ``gap |ln h| / h``.

    The slope bounds of ``Y`` in energy, ``alpha |ln h|/(h omega)`` to
    ``|ln h|/(h omega)``, turn a phase step of ``2 pi`` into
    ``[2 pi omega, 2 pi omega / alpha]``; ``delta`` widens both ends.
    """
    w = _omega(V)
    return TWO_PI * w * (1.0 - delta), TWO_PI * w / alpha * (1.0 + delta)


def gap_scaling(V: PotentialModel, params: SemiclassicalParams, h_list) -> ScalingFit:
    """Fit ``log(median gap)`` against ``log(h / |ln h|)``."""
    hs = sorted(map(float, h_list), reverse=True)
    med, lo, hi, norm_all = [], [], [], []
    for h in hs:
        g = family_gaps(enumerate_window(V, params.with_h(h)))
        med.append(float(np.median(g)))
        lo.append(float(np.min(g)))
        hi.append(float(np.max(g)))
        norm_all.append(g * abs(math.log(h)) / h)
    hs_a = np.array(hs)
    x = np.log(hs_a / np.abs(np.log(hs_a)))
    y = np.log(np.array(med))
    slope, icpt, r2 = linear_fit(x, y)
    norm = np.array(med) * np.abs(np.log(hs_a)) / hs_a
    return ScalingFit(hs, "gap", slope, icpt, r2, x, y,
                      {"median_gap": med, "min_gap": lo, "max_gap": hi,
                       "normalized_median": norm.tolist(),
                       "normalized_min": [float(v.min()) for v in norm_all],
                       "normalized_max": [float(v.max()) for v in norm_all],
                       "max_over_min": [b / a for a, b in zip(lo, hi)]})


def count_brackets(V: PotentialModel, h: float, alpha: float = 0.5, delta: float = 0.5) -> tuple[int, int]:
    """Per-family count bounds with slack ``delta``."""
    w = _omega(V)
    base = h ** (alpha - 1.0) * abs(math.log(h)) / (math.pi * w)
    return math.floor(alpha * base * (1.0 - delta)), math.ceil(base * (1.0 + delta)) + 1


def count_scaling(V: PotentialModel, params: SemiclassicalParams, h_list, delta: float = 0.5) -> ScalingFit:
    """Fit the total root count against ``|ln h| / sqrt(h)``."""
    if params.alpha != 0.5:
        raise ValueError("count scaling is defined for alpha = 1/2")
    hs = sorted(map(float, h_list), reverse=True)
    ca, cb, inside = [], [], []
    for h in hs:
        win = enumerate_window(V, params.with_h(h))
        lo, hi = count_brackets(V, h, params.alpha, delta)
        ca.append(len(win.family_a))
        cb.append(len(win.family_b))
        inside.append(lo <= ca[-1] <= hi and lo <= cb[-1] <= hi)
    hs_a = np.array(hs)
    x = np.abs(np.log(hs_a)) / np.sqrt(hs_a)
    y = np.array(ca, dtype=float) + np.array(cb, dtype=float)
    slope, icpt, r2 = linear_fit(x, y)
    return ScalingFit(hs, "count", slope, icpt, r2, x, y,
                      {"count_a": ca, "count_b": cb, "within_brackets": inside,
                       "brackets": [count_brackets(V, h, params.alpha, delta) for h in hs]})


# ---------------------------------------------- consecutive differences

def doublet_profile(oracle_spec) -> list[tuple[int, float]]:
    """``(n, E_{n+1} - E_n)`` for the oracle eigenvalues."""
    ev = np.asarray(oracle_spec.eigenvalues if hasattr(oracle_spec, "eigenvalues") else oracle_spec)
    return [(i, float(d)) for i, d in enumerate(np.diff(ev))]


def alternation_ratio(eigenvalues, E: float) -> float:
    """Small-over-large ratio of alternating gaps near ``E``.

    The four consecutive differences whose midpoints are nearest ``E`` are
    split into even and odd positions; the ratio of the smaller to the larger
    mean is returned. Quasi-doublets give values near 0, regular spacing 1.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    d = np.diff(ev)
    if d.size < 4:
        raise InsufficientLevels("need at least five eigenvalues")
    mid = 0.5 * (ev[1:] + ev[:-1])
    i = int(np.argmin(np.abs(mid - E)))
    i = min(max(i - 1, 0), d.size - 4)
    q = d[i:i + 4]
    even, odd = 0.5 * (q[0] + q[2]), 0.5 * (q[1] + q[3])
    return float(min(even, odd) / max(even, odd))


def smoothed_minimum(eigenvalues) -> tuple[float, float]:
    """Location and value of the minimum of the pairwise-averaged differences."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    d = np.diff(ev)
    sm = 0.5 * (d[1:] + d[:-1])
    centre = ev[1:-1]
    i = int(np.argmin(sm))
    return float(centre[i]), float(sm[i])


# ------------------------------------------------ zero-set comparison

def find_zeros(func, grid, root_tol: float = 1e-8, touch_tol: float = 1e-12) -> list[tuple[float, int]]:
    """Zeros of a real function sampled on ``grid``.

    Sign changes between samples are refined with Brent's method. At
    sampled local minima of ``|F|`` with no adjacent sign change, the
    extremum is located; if ``F`` changes sign there the two zeros are
    refined separately, and if it only touches zero (within ``touch_tol``)
    the touching point is reported with multiplicity 2. Returns a sorted list
    of ``(location, multiplicity)``.
    """
    x = np.asarray(grid, dtype=float)
    v = np.array([func(t) for t in x])
    out = []
    for i in range(x.size - 1):
        if v[i] == 0.0:
            out.append((float(x[i]), 1))
        elif v[i] * v[i + 1] < 0:
            out.append((brentq(func, x[i], x[i + 1], xtol=root_tol * 1e-3), 1))
    if v[-1] == 0.0:
        out.append((float(x[-1]), 1))
    for i in range(1, x.size - 1):
        if v[i] == 0.0 or v[i - 1] * v[i] <= 0 or v[i] * v[i + 1] <= 0:
            continue
        if not (abs(v[i]) <= abs(v[i - 1]) and abs(v[i]) <= abs(v[i + 1])):
            continue
        sgn = 1.0 if v[i] > 0 else -1.0
        res = minimize_scalar(lambda t: sgn * func(t), bounds=(x[i - 1], x[i + 1]), method="bounded",
                              options={"xatol": root_tol * 1e-3})
        xm, fm = float(res.x), sgn * float(res.fun)
        if fm * sgn < 0:
            out.append((brentq(func, x[i - 1], xm, xtol=root_tol * 1e-3), 1))
            out.append((brentq(func, xm, x[i + 1], xtol=root_tol * 1e-3), 1))
        elif abs(fm) <= touch_tol:
            out.append((xm, 2))
    return sorted(out)


class DualSweep(NamedTuple):
    residual_zeros: list
    det_zeros: list
    matched: bool
    max_distance: float
    max_unitarity_defect: float
    energies: np.ndarray


def _expand(zs):
    return [z for z, m in zs for _ in range(m)]


def dual_sweep(V: PotentialModel, params: SemiclassicalParams, e_range=None, points: int = 500,
               root_tol: float = 1e-8) -> DualSweep:
    """Zeros of the cosine residual and of the determinant form on one sweep.

    The determinant is made real by dividing by a continuous branch of
    ``sqrt(det T)``; the branch is tracked along the sweep grid and, between
    grid points, continued from the nearest grid value.
    """
    s = params.window
    lo, hi = e_range or (-s, s)
    E = np.linspace(lo, hi, points)
    roots_ref = {}
    ref = None
    defect = 0.0
    for e in E:
        t = transfer_t(phase_data(e, V, params), params)
        defect = max(defect, t.unitarity_defect())
        _, ref = signed_det(e, V, params, ref)
        roots_ref[float(e)] = ref

    def det_fun(e):
        j = int(np.clip(np.searchsorted(E, e), 0, E.size - 1))
        if j > 0 and abs(E[j - 1] - e) < abs(E[j] - e):
            j -= 1
        return signed_det(e, V, params, roots_ref[float(E[j])])[0]

    zr = find_zeros(lambda e: cdvp_residual(e, V, params), E, root_tol)
    zd = find_zeros(det_fun, E, root_tol)
    a, b = _expand(zr), _expand(zd)
    matched = len(a) == len(b)
    dist = max((abs(x - y) for x, y in zip(a, b)), default=0.0) if matched else math.inf
    return DualSweep(zr, zd, matched and dist <= root_tol, dist, defect, E)


# ------------------------------------------------------ regular limits

class RegularLimit(NamedTuple):
    region: str
    h: float
    max_normalized: float
    median_normalized: float
    singular_count: int
    regular_count: int


def _normalized_distance(sing: np.ndarray, lists) -> np.ndarray:
    """Distance to the nearest regular root over each list's local spacing."""
    best = np.full(sing.size, math.inf)
    for reg in lists:
        reg = np.unique(np.asarray(reg, dtype=float))
        if reg.size < 2:
            continue
        gaps = np.diff(reg)
        for n, e in enumerate(sing):
            k = int(np.argmin(np.abs(reg - e)))
            spacing = gaps[min(k, gaps.size - 1)] if k in (0, reg.size - 1) else 0.5 * (gaps[k - 1] + gaps[k])
            best[n] = min(best[n], abs(e - reg[k]) / spacing)
    return best


def implied_maslov(params: SemiclassicalParams, region: str):
    """Maslov constants of the regular rules that the phases ``mu_+-`` reduce to.

    Far above the barrier the singular condition tends to
    ``A_+ + A_- = 2 pi h (n + c)`` with ``c = -(mu_+ + mu_-)/(2 pi) mod 1``;
    deep in the wells it tends to ``A_+- = 2 pi h (n + c_+-)`` with
    ``c_+- = (pi/2 - mu_+-)/(2 pi) mod 1``. Both give 1/2 at ``mu = 3 pi/2``.
    Returns a float for ``'top'`` and ``(c_+, c_-)`` for ``'bottom'``.
    """
    if region == "top":
        return (-(params.mu_plus + params.mu_minus) / TWO_PI) % 1.0
    if region == "bottom":
        return tuple(((0.5 * math.pi - m) / TWO_PI) % 1.0 for m in (params.mu_plus, params.mu_minus))
    raise ValueError("region must be 'top' or 'bottom'")


def regular_limit(V: PotentialModel, params: SemiclassicalParams, region: str, e_range,
                  maslov=0.5, pad: float = 0.02) -> RegularLimit:
    """Distance between singular roots and regular Bohr-Sommerfeld roots.

    Singular roots in ``e_range`` are compared with the nearest regular root
    (computed on a range padded by ``pad`` so edge roots have neighbours);
    the distance is divided by the local regular spacing, per well below the
    barrier. For ``'bottom'``, ``maslov`` may be a pair ``(right, left)``.
    """
    lo, hi = map(float, e_range)
    sing = enumerate_energies(V, params, lo, hi).energies
    if region == "top":
        lists = [regular_bs_top(V, params.h, (max(lo - pad, 1e-9), hi + pad), maslov)]
    elif region == "bottom":
        c_r, c_l = maslov if isinstance(maslov, tuple) else (maslov, maslov)
        rng = (lo - pad, min(hi + pad, -1e-9))
        lists = [regular_bs_bottom(V, params.h, rng, c_r)[0], regular_bs_bottom(V, params.h, rng, c_l)[1]]
    else:
        raise ValueError("region must be 'top' or 'bottom'")
    nd = _normalized_distance(sing, lists)
    n_reg = sum(int(np.sum((np.asarray(r) >= lo) & (np.asarray(r) <= hi))) for r in lists)
    return RegularLimit(region, params.h, float(np.max(nd)) if nd.size else math.nan,
                        float(np.median(nd)) if nd.size else math.nan, sing.size, n_reg)
