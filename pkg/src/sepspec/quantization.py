"""Singular Bohr-Sommerfeld quantization near the barrier top.

With ``omega = sqrt(-V''(0))``, ``eps = E/omega`` and ``y = eps/h`` the
singular actions are ``S_+- = A_+-(E) + eps ln|eps| - eps + h mu_+-`` and
``theta_+- = S_+-/h``. Energies of the semiclassical spectrum are the zeros of

    cos f - cos g / sqrt(1 + exp(2 pi y))

with ``f = -(theta_+ + theta_-)/2 + pi/2 + y ln h + arg Gamma(1/2 + iy)`` and
``g = (theta_+ - theta_-)/2``. Writing ``w = arccos(cos g / sqrt(1 + e^{2 pi y}))``
the zeros split into the two families ``Y = f - w = 2 pi k`` (branch A) and
``Z = f + w = 2 pi l`` (branch B).

In ``f`` the ``y ln h`` and ``y ln|y|`` pieces cancel analytically against
parts of ``theta``; ``f`` is evaluated in the cancelled form

    f = -(A_+ + A_-)/(2h) - (mu_+ + mu_-)/2 + pi/2 + arg Gamma(1/2+iy) - (y ln|y| - y)

which avoids losing digits to terms of size ``|y ln h|``.
"""

from __future__ import annotations

import cmath
import functools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .classical import _omega, well_action, _mirror
from .potential import PotentialModel
from .special import arg_gamma_half, stirling_arg

log = logging.getLogger(__name__)

__all__ = [
    "SemiclassicalParams",
    "SingularPhaseData",
    "TransferMatrix",
    "BranchRoot",
    "SpectrumWindow",
    "RootAnomaly",
    "phase_data",
    "cdvp_residual",
    "half_gap",
    "y_of_lambda",
    "z_of_lambda",
    "enumerate_window",
    "enumerate_energies",
    "transfer_q",
    "transfer_t",
    "det_condition",
    "signed_det",
    "check_interleaving",
    "regular_bs_top",
    "regular_bs_bottom",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SemiclassicalParams:
    """Parameters of the semiclassical engine.

    ``mu_plus`` and ``mu_minus`` are constant phase offsets added to the
    singular actions (in units of ``h``). They stand in for the higher-order
    action corrections, which are not computed.
    """

    h: float
    alpha: float = 0.5
    mu_plus: float = math.pi
    mu_minus: float = math.pi
    quad_tol: float = 1e-13
    root_tol: float = 1e-12

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not 0.5 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [1/2, 1)")
        if self.h > 0.1:
            warnings.warn(f"h={self.h} is large for semiclassical asymptotics", stacklevel=2)

    @property
    def window(self) -> float:
        """Half-width ``h**alpha`` of the singular energy window."""
        return self.h ** self.alpha

    def with_mu(self, mu_plus: float, mu_minus: float | None = None) -> SemiclassicalParams:
        return SemiclassicalParams(self.h, self.alpha, mu_plus,
                                   mu_plus if mu_minus is None else mu_minus, self.quad_tol, self.root_tol)

    def with_h(self, h: float) -> SemiclassicalParams:
        return SemiclassicalParams(h, self.alpha, self.mu_plus, self.mu_minus, self.quad_tol, self.root_tol)


class SingularPhaseData(NamedTuple):
    energy: float
    eps: float
    a_plus: float
    a_minus: float
    s_plus: float
    s_minus: float
    theta_plus: float
    theta_minus: float
    f: float
    g: float


@dataclass(frozen=True)
class TransferMatrix:
    entries: np.ndarray
    e_factor: complex
    kind: str

    def unitarity_defect(self) -> float:
        m = self.entries
        return float(np.max(np.abs(m @ m.conj().T - np.eye(2))))


@dataclass(frozen=True)
class BranchRoot:
    """One root ``Y(lam) = 2 pi k`` (branch A) or ``Z(lam) = 2 pi k`` (branch B).

    ``lam_lo <= lam <= lam_hi`` is a verified sign-change bracket.
    ``half_gap`` is ``w = (Z - Y)/2`` at the root.
    """

    branch: str
    index: int
    lam: float
    energy: float
    residual: float
    half_gap: float
    lam_lo: float
    lam_hi: float


class RootAnomaly(NamedTuple):
    branch: str
    index: int
    crossings: int


@dataclass
class SpectrumWindow:
    params: SemiclassicalParams
    family_a: list
    family_b: list
    merged: list
    anomalies: list = field(default_factory=list)
    lam_range: tuple = (-1.0, 1.0)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.merged])

    def rows(self):
        yield ("branch", "index", "lambda", "energy", "residual")
        for r in self.merged:
            yield (r.branch, r.index, r.lam, r.energy, r.residual)


# ------------------------------------------------------------ phases

def _eps_log_term(eps: float) -> float:
    return eps * math.log(abs(eps)) - eps if eps != 0.0 else 0.0


def _phi(y: float) -> float:
    # arg Gamma(1/2 + iy) minus its leading Stirling part; smooth and odd
    return float(arg_gamma_half(y)) - float(stirling_arg(y))


@functools.lru_cache(maxsize=4096)
def _actions(V: PotentialModel, E: float, rtol: float) -> tuple[float, float]:
    a_plus = well_action(V, E, "right", rtol)
    a_minus = a_plus if V.is_even else well_action(V, E, "left", rtol)
    return a_plus, a_minus


def phase_data(E: float, V: PotentialModel, params: SemiclassicalParams) -> SingularPhaseData:
    """All singular-phase quantities at energy ``E``."""
    h = params.h
    E = float(E)
    omega = _omega(V)
    eps = E / omega
    y = eps / h
    a_plus, a_minus = _actions(V, E, params.quad_tol)
    sing = _eps_log_term(eps)
    s_plus = a_plus + sing + h * params.mu_plus
    s_minus = a_minus + sing + h * params.mu_minus
    theta_plus, theta_minus = s_plus / h, s_minus / h
    f = (-(a_plus + a_minus) / (2.0 * h) - 0.5 * (params.mu_plus + params.mu_minus)
         + 0.5 * math.pi + _phi(y))
    g = (a_plus - a_minus) / (2.0 * h) + 0.5 * (params.mu_plus - params.mu_minus)
    return SingularPhaseData(E, eps, a_plus, a_minus, s_plus, s_minus, theta_plus, theta_minus, f, g)


def _log_r(y: float) -> float:
    """``log(1 / sqrt(1 + exp(2 pi y)))`` without overflow."""
    return -0.5 * float(np.logaddexp(0.0, TWO_PI * y))


def half_gap(g: float, y: float) -> float:
    """``w = arccos(cos g / sqrt(1 + e^{2 pi y}))`` evaluated without cancellation.

    With ``r = (1 + e^{2 pi y})^{-1/2}`` one has ``sin w = sqrt(sin^2 g + e^{2 pi y}) * r``
    and ``cos w = cos g * r``; the common factor drops out of ``atan2``. The
    result lies in ``(0, pi)`` and needs no clamping.
    """
    c, s = math.cos(g), math.sin(g)
    if y <= 0.0:
        return math.atan2(math.sqrt(s * s + math.exp(TWO_PI * y)), c)
    k = math.exp(-math.pi * y)
    return math.atan2(math.sqrt(s * s * k * k + 1.0), c * k)


def _residual_from(f: float, g: float, y: float) -> float:
    return math.cos(f) - math.cos(g) * math.exp(_log_r(y))


def cdvp_residual(E: float, V: PotentialModel, params: SemiclassicalParams) -> float:
    """``cos f - cos g / sqrt(1 + e^{2 pi eps/h})``; zero on the semiclassical spectrum."""
    d = phase_data(E, V, params)
    return _residual_from(d.f, d.g, d.eps / params.h)


def _yz(E: float, V: PotentialModel, params: SemiclassicalParams) -> tuple[float, float, float]:
    d = phase_data(E, V, params)
    w = half_gap(d.g, d.eps / params.h)
    return d.f - w, d.f + w, w


def y_of_lambda(lam: float, V: PotentialModel, params: SemiclassicalParams) -> float:
    return _yz(params.window * lam, V, params)[0]


def z_of_lambda(lam: float, V: PotentialModel, params: SemiclassicalParams) -> float:
    return _yz(params.window * lam, V, params)[1]


# ------------------------------------------------------ enumeration

def _bracket(func, root: float, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Verified sign-change bracket of width about ``2 tol`` around ``root``."""
    d = max(tol, 4.0 * np.spacing(abs(root) + 1e-300))
    for _ in range(40):
        a, b = max(lo, root - d), min(hi, root + d)
        fa, fb = func(a), func(b)
        if fa == 0.0 or fb == 0.0 or (fa > 0) != (fb > 0):
            return a, b
        d *= 4.0
    return lo, hi


def _solve_family(branch, func, lams, vals, params, V, anomalies):
    """Roots of ``func(lam) = 2 pi k`` for every admissible ``k``."""
    h_a = params.window
    out = []
    lo_k = math.ceil(min(vals) / TWO_PI)
    hi_k = math.floor(max(vals) / TWO_PI)
    for k in range(lo_k, hi_k + 1):
        target = TWO_PI * k
        shifted = vals - target
        cells = np.flatnonzero(((shifted[:-1] > 0) & (shifted[1:] <= 0))
                               | ((shifted[:-1] < 0) & (shifted[1:] >= 0)))
        # a zero exactly on a left sample belongs to the cell on its right
        if cells.size == 0:
            exact = np.flatnonzero(shifted == 0)
            cells = exact[:1] if exact.size else cells
        if cells.size != 1:
            anomalies.append(RootAnomaly(branch, k, int(cells.size)))
            if cells.size == 0:
                continue
        for c in cells:
            fn = lambda lam, t=target: func(lam) - t  # noqa: E731
            a, b = float(lams[c]), float(lams[c + 1])
            if shifted[c] == 0.0:
                lam = a
            elif shifted[c + 1] == 0.0:
                lam = b
            else:
                lam = brentq(fn, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)
            lam_lo, lam_hi = _bracket(fn, lam, a, b, params.root_tol * 1e-3)
            E = h_a * lam
            d = phase_data(E, V, params)
            y = d.eps / params.h
            out.append(BranchRoot(branch, k, lam, E, _residual_from(d.f, d.g, y),
                                  half_gap(d.g, y), lam_lo, lam_hi))
    # strictly decreasing in energy as the index increases
    out.sort(key=lambda r: -r.index)
    return out


def _enumerate(V: PotentialModel, params: SemiclassicalParams, lam_lo: float, lam_hi: float,
               samples: int = 64, max_samples: int = 4096) -> SpectrumWindow:
    h_a = params.window
    n = samples
    while True:
        lams = np.linspace(lam_lo, lam_hi, n + 1)
        yz = np.array([_yz(h_a * lam, V, params) for lam in lams])
        Y, Z = yz[:, 0], yz[:, 1]
        monotone = bool(np.all(np.diff(Y) < 0) and np.all(np.diff(Z) < 0))
        if monotone or n >= max_samples:
            break
        n *= 2
    if not monotone:
        log.warning("Y/Z not monotone on the sampling grid at h=%g", params.h)
    anomalies: list[RootAnomaly] = []
    fa = _solve_family("A", lambda lam: _yz(h_a * lam, V, params)[0], lams, Y, params, V, anomalies)
    fb = _solve_family("B", lambda lam: _yz(h_a * lam, V, params)[1], lams, Z, params, V, anomalies)
    merged = sorted(fa + fb, key=functools.cmp_to_key(_compare_roots))
    return SpectrumWindow(params, fa, fb, merged, anomalies, (lam_lo, lam_hi))


def enumerate_window(V: PotentialModel, params: SemiclassicalParams, samples: int = 64) -> SpectrumWindow:
    """Both root families inside the window ``|E| <= h**alpha``."""
    return _enumerate(V, params, -1.0, 1.0, samples)


def enumerate_energies(V: PotentialModel, params: SemiclassicalParams, e_lo: float, e_hi: float,
                       samples: int = 256) -> SpectrumWindow:
    """Roots of the singular condition on an arbitrary energy range."""
    s = params.window
    return _enumerate(V, params, e_lo / s, e_hi / s, samples)


# ------------------------------------------------------- ordering

def _certified_less(p: BranchRoot, q: BranchRoot) -> bool | None:
    """Decide ``p < q`` in energy.

    Disjoint brackets decide directly. For overlapping brackets of adjacent
    members of the two families the order follows from ``0 < w < pi`` and the
    monotonicity of ``Y`` and ``Z``: ``Z(alpha_k) = 2 pi k + 2w > 2 pi k``
    gives ``alpha_k < beta_k``, and ``Y(beta_{k+1}) = 2 pi (k+1) - 2w > 2 pi k``
    gives ``beta_{k+1} < alpha_k``. Returns None when no certificate applies.
    """
    if p.lam_hi < q.lam_lo:
        return True
    if q.lam_hi < p.lam_lo:
        return False
    if p.branch == "A" and q.branch == "B" and q.index == p.index:
        return 0.0 < p.half_gap < math.pi
    if p.branch == "B" and q.branch == "A" and p.index == q.index + 1:
        return 0.0 < p.half_gap < math.pi
    if q.branch == "A" and p.branch == "B" and p.index == q.index:
        return not (0.0 < q.half_gap < math.pi)
    if q.branch == "B" and p.branch == "A" and q.index == p.index + 1:
        return not (0.0 < q.half_gap < math.pi)
    return None


def _compare_roots(p: BranchRoot, q: BranchRoot) -> int:
    if p is q:
        return 0
    less = _certified_less(p, q)
    if less is None:
        return -1 if (p.lam, p.branch) < (q.lam, q.branch) else 1
    return -1 if less else 1


class InterleaveReport(NamedTuple):
    violations: list
    collisions: list
    certified_by_phase: int
    shared_indices: int


def check_interleaving(window: SpectrumWindow) -> InterleaveReport:
    """Verify ``beta_{k+1} < alpha_k < beta_k`` on the shared index range.

    Also checks per-family strict monotonicity and that no member of one
    family coincides with a member of the other.
    """
    A = {r.index: r for r in window.family_a}
    B = {r.index: r for r in window.family_b}
    violations, collisions = [], []
    by_phase = 0
    for fam in (window.family_a, window.family_b):
        for p, q in zip(fam, fam[1:]):
            # q has the smaller index and must sit at higher energy
            if not p.lam_hi < q.lam_lo:
                violations.append(f"{p.branch}: index {p.index} not below index {q.index}")
    shared = sorted(set(A) & set(B))
    for k in shared:
        pairs = [(A[k], B[k])]
        if k + 1 in B:
            pairs.append((B[k + 1], A[k]))
        for lo, hi in pairs:
            res = _certified_less(lo, hi)
            if not (lo.lam_hi < hi.lam_lo):
                by_phase += 1
            if res is not True:
                violations.append(f"{lo.branch}{lo.index} < {hi.branch}{hi.index} fails")
    for a in window.family_a:
        for b in window.family_b:
            if a.lam == b.lam and _certified_less(a, b) is None and _certified_less(b, a) is None:
                collisions.append((a.index, b.index))
    # alternation in the merged list
    m = window.merged
    for p, q in zip(m, m[1:]):
        if p.branch == q.branch and p.index in shared and q.index in shared:
            violations.append(f"merged list repeats branch {p.branch} at {p.index},{q.index}")
    return InterleaveReport(violations, collisions, by_phase, len(shared))


# ------------------------------------------------- transfer matrices

def transfer_q(eps_over_h: float, h: float) -> TransferMatrix:
    """Transfer matrix ``Q = E [[1, i k], [i k, 1]]``, ``k = e^{-pi y}``.

    ``E = exp(i (arg Gamma(1/2 + iy) + y ln h)) / sqrt(1 + e^{-2 pi y})``.
    Entries are formed from logarithms so no exponential overflows.
    """
    y = float(eps_over_h)
    phase = float(arg_gamma_half(y)) + y * math.log(h)
    u = cmath.exp(1j * phase)
    mod_e = math.exp(-0.5 * float(np.logaddexp(0.0, -TWO_PI * y)))
    mod_ek = math.exp(-0.5 * float(np.logaddexp(0.0, TWO_PI * y)))
    e = mod_e * u
    ek = 1j * mod_ek * u
    return TransferMatrix(np.array([[e, ek], [ek, e]]), e, "Q")


def transfer_t(data: SingularPhaseData, params: SemiclassicalParams) -> TransferMatrix:
    """``T = Q [[0, e^{-i theta_+}], [e^{-i theta_-}, 0]]``."""
    q = transfer_q(data.eps / params.h, params.h)
    p = np.array([[0.0, cmath.exp(-1j * data.theta_plus)], [cmath.exp(-1j * data.theta_minus), 0.0]])
    return TransferMatrix(q.entries @ p, q.e_factor, "T_of_E")


def det_condition(E: float, V: PotentialModel, params: SemiclassicalParams) -> float:
    """``|det(T(E) - I)|``; vanishes exactly when 1 is an eigenvalue of ``T``."""
    t = transfer_t(phase_data(E, V, params), params).entries
    return abs(np.linalg.det(t - np.eye(2)))


def signed_det(E: float, V: PotentialModel, params: SemiclassicalParams, ref: complex | None = None):
    """Real function ``det(T - I)/sqrt(det T)`` with zeros at the spectrum.

    For unitary ``T`` with eigenvalues ``e^{ia}``, ``e^{ib}`` this equals
    ``-4 sin(a/2) sin(b/2)``. The square-root branch is chosen closest to
    ``ref`` (the previous value along a sweep). Returns ``(value, root)``.
    """
    t = transfer_t(phase_data(E, V, params), params).entries
    dt = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    dm = (t[0, 0] - 1.0) * (t[1, 1] - 1.0) - t[0, 1] * t[1, 0]
    s = cmath.sqrt(dt)
    if ref is not None and abs(s - ref) > abs(s + ref):
        s = -s
    return (dm / s).real, s


# --------------------------------------------- regular Bohr-Sommerfeld

def _bs_roots(action, h: float, e_lo: float, e_hi: float, maslov: float) -> list[float]:
    a_lo, a_hi = action(e_lo), action(e_hi)
    n_lo = math.ceil(a_lo / (TWO_PI * h) - maslov)
    n_hi = math.floor(a_hi / (TWO_PI * h) - maslov)
    out = []
    for n in range(max(n_lo, 0), n_hi + 1):
        target = TWO_PI * h * (n + maslov)
        out.append(brentq(lambda E: action(E) - target, e_lo, e_hi, xtol=1e-15, rtol=1e-15))
    return out


def regular_bs_top(V: PotentialModel, h: float, e_range, maslov: float = 0.5, rtol: float = 1e-13) -> list[float]:
    """Energies with ``A_+(E) + A_-(E) = 2 pi h (n + maslov)`` on ``e_range`` (above the barrier)."""
    e_lo, e_hi = map(float, e_range)
    if not 0.0 < e_lo < e_hi:
        raise ValueError("top range must satisfy 0 < E_lo < E_hi")
    return _bs_roots(lambda E: sum(_actions(V, E, rtol)), h, e_lo, e_hi, maslov)


def regular_bs_bottom(V: PotentialModel, h: float, e_range, maslov: float = 0.5,
                      rtol: float = 1e-13) -> tuple[list[float], list[float]]:
    """Per-well energies with ``A_+-(E) = 2 pi h (n + maslov)`` (below the barrier).

    Returns ``(right_well, left_well)``.
    """
    e_lo, e_hi = map(float, e_range)
    if not e_lo < e_hi < 0.0:
        raise ValueError("bottom range must satisfy E_lo < E_hi < 0")
    right = _bs_roots(lambda E: well_action(V, E, "right", rtol), h, e_lo, e_hi, maslov)
    W = _mirror(V)
    left = _bs_roots(lambda E: well_action(W, E, "right", rtol), h, e_lo, e_hi, maslov)
    return right, left
