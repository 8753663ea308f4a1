"""Classical mechanics of ``p(x, xi) = xi^2/2 + V(x)``.

Turning points, well actions ``A_+(E)``, ``A_-(E)``, the linearized normal-form
invariant ``eps(E) = E / sqrt(-V''(0))``, and the Hamiltonian flow with its
return period near the separatrix.

Action convention: for ``E < 0`` the action of a well is the area enclosed by
its closed orbit. For ``E >= 0`` the single orbit surrounds both wells and the
``+``/``-`` actions are the areas of ``{p <= E}`` on either side of the
momentum axis, which keeps ``A_+`` and ``A_-`` continuous at ``E = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .potential import PotentialModel, real_roots, validate_double_well

__all__ = [
    "PhasePoint",
    "TurningPointSet",
    "ActionPair",
    "FlowTrace",
    "FlowError",
    "PeriodError",
    "hamiltonian",
    "turning_points",
    "well_action",
    "action_pair",
    "action_derivative_check",
    "orbit_period",
    "epsilon0",
    "flow_integrate",
    "return_period",
    "period_slope_fit",
]


class PhasePoint(NamedTuple):
    x: float
    xi: float


class TurningPointSet(NamedTuple):
    energy: float
    side: str
    roots: tuple[float, ...]


class ActionPair(NamedTuple):
    a_plus: float
    a_minus: float
    energy: float


class FlowError(RuntimeError):
    """Integrator failure, with the time at which it happened."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time!r}")


class PeriodError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowTrace:
    """Sampled trajectory. ``t``, ``x``, ``xi`` are parallel arrays."""

    t: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    energy_drift: float
    period: float | None = None

    @property
    def samples(self) -> list[tuple[float, PhasePoint]]:
        return [(float(t), PhasePoint(float(x), float(p))) for t, x, p in zip(self.t, self.x, self.xi)]

    def rows(self):
        yield ("t", "x", "xi")
        for t, x, p in zip(self.t, self.x, self.xi):
            yield (float(t), float(x), float(p))


def hamiltonian(pt: PhasePoint, V: PotentialModel) -> float:
    x, xi = pt
    return 0.5 * xi * xi + V(x)


def epsilon0(E, V: PotentialModel):
    """Linearized normal-form invariant ``E / sqrt(-V''(0))``."""
    return E / _omega(V)


def _omega(V: PotentialModel) -> float:
    c2 = V.coefficients[2] if V.degree >= 2 else 0.0
    if not c2 < 0.0:
        raise ValueError("V''(0) must be negative")
    return math.sqrt(-2.0 * c2)


# ----------------------------------------------------------- geometry

@lru_cache(maxsize=64)
def _well_geometry(V: PotentialModel) -> tuple[float, float, float, float]:
    """``(x_left_min, x_right_min, V(x_left_min), V(x_right_min))``."""
    rep = validate_double_well(V)
    if not rep.passed:
        raise ValueError("potential fails double-well validation: "
                         + "; ".join(v.message for v in rep.violations))
    (xl, vl), (xr, vr) = rep.well_minima
    return xl, xr, vl, vr


@lru_cache(maxsize=64)
def _mirror(V: PotentialModel) -> PotentialModel:
    return V.mirrored()


def _v_min(V: PotentialModel) -> float:
    _, _, vl, vr = _well_geometry(V)
    return min(vl, vr)


def _monotone_root(c: Sequence[float], dc: Sequence[float], E: float, a: float, b: float) -> float:
    """Root of ``V - E`` on ``[a, b]`` where ``V`` is monotone.

    Safeguarded Newton: a Newton step is taken when it stays inside the
    current bracket, otherwise the bracket is bisected.
    """
    fa = _hs(c, a) - E
    fb = _hs(c, b) - E
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa < 0) == (fb < 0):
        raise ValueError("root not bracketed")
    x = 0.5 * (a + b)
    for _ in range(200):
        fx = _hs(c, x) - E
        if fx == 0.0:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b = x
        d = _hs(dc, x)
        xn = x - fx / d if d != 0.0 else a - 1.0
        if not a < xn < b:
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 4e-16 * abs(x) or b - a <= 4e-16 * max(abs(a), abs(b)):
            return xn
        x = xn
    return x


def _hs(c: Sequence[float], x: float) -> float:
    acc = 0.0
    for ci in reversed(c):
        acc = acc * x + ci
    return acc


def _right_turning(V: PotentialModel, E: float) -> tuple[float, ...]:
    """Turning points bounding the allowed region in ``x >= 0``.

    Returns ``(x1, x2)`` for ``E < 0`` (empty if ``E`` is below the right
    minimum) and ``(x2,)`` for ``E >= 0``.
    """
    _, xr, _, vr = _well_geometry(V)
    c = V.coefficients
    dc = V._derivatives[1]
    if E <= vr:
        return (xr,) * 2 if E == vr else ()
    R = max(2.0 * xr, 1.0)
    while _hs(c, R) <= E:
        R *= 2.0
    x2 = _monotone_root(c, dc, E, xr, R)
    if E >= 0.0:
        return (x2,)
    x1 = _monotone_root(c, dc, E, 0.0, xr)
    return (x1, x2)


def turning_points(V: PotentialModel, E: float, side: str = "both") -> TurningPointSet:
    """Roots of ``V(x) = E`` relevant to the classically allowed region.

    Roots are isolated with a Sturm chain on ``V - E`` and polished by
    bisection. For ``E >= 0`` only the outer roots are returned; the origin
    (a double root at ``E = 0``) is not a turning point of the allowed region.

    Parameters
    ----------
    side : {'left', 'right', 'both'}
    """
    if side not in ("left", "right", "both"):
        raise ValueError("side must be 'left', 'right' or 'both'")
    vmin = _v_min(V)
    if E <= vmin:
        raise ValueError(f"E={E!r} is below both wells (v_min={vmin!r})")
    c = list(V.coefficients)
    c[0] -= E
    roots = real_roots(c, tol=1e-15)
    if E >= 0.0:
        roots = [min(roots), max(roots)]
    else:
        tiny = 1e-12 * max(1.0, max(abs(r) for r in roots))
        roots = [r for r in roots if abs(r) > tiny]
    if side == "right":
        roots = [r for r in roots if r > 0]
    elif side == "left":
        roots = [r for r in roots if r < 0]
    return TurningPointSet(float(E), side, tuple(sorted(float(r) for r in roots)))


# ----------------------------------------------------------- quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _panels(v_min: float, v_max: float) -> np.ndarray:
    """Breakpoints in ``v`` graded geometrically (ratio 2) toward 0."""
    edges = [v_max]
    while edges[-1] > 2.0 * v_min:
        edges.append(0.5 * edges[-1])
    edges.append(0.0)
    return np.array(edges[::-1])


def _graded_integral(func, v_max: float, v_min: float, rtol: float, n0: int = 24) -> float:
    """Integrate ``func(v)`` on ``[0, v_max]`` with graded Gauss-Legendre panels.

    The number of nodes per panel is doubled until two successive results
    agree to ``rtol``.
    """
    edges = _panels(v_min, v_max)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    prev = None
    n = n0
    while n <= 512:
        t, w = _gauss(n)
        v = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        total = float(np.sum(func(v) * (half[:, None] * w[None, :]).ravel()))
        if prev is not None and abs(total - prev) <= rtol * abs(total):
            return total
        prev = total
        n *= 2
    return prev


def _deflate(c: Sequence[float], E: float, roots: Sequence[float]) -> np.ndarray:
    """Descending coefficients of ``(V - E) / prod(x - r)``."""
    desc = np.array(list(c)[::-1], dtype=float)
    desc[-1] -= E
    for r in roots:
        # synthetic division, remainder dropped
        out = np.empty(desc.size - 1)
        acc = 0.0
        for i in range(desc.size - 1):
            acc = acc * r + desc[i]
            out[i] = acc
        desc = out
    return desc


def _right_action(V: PotentialModel, E: float, rtol: float) -> float:
    tp = _right_turning(V, E)
    if len(tp) < 1 or (len(tp) == 2 and tp[0] >= tp[1]):
        return 0.0
    omega = _omega(V)
    dist = math.sqrt(2.0 * abs(E)) / omega
    if E < 0.0:
        x1, x2 = tp
        width = x2 - x1
        q = _deflate(V.coefficients, E, (x1, x2))

        # x = x2 - width*sin^2(u), u = pi/2 - v
        def integrand(v):
            s, co = np.cos(v), np.sin(v)
            x = x2 - width * s * s
            qv = np.maximum(np.polyval(q, x), 0.0)
            return (s * co) ** 2 * np.sqrt(qv)

        vmin = max(0.25 * math.sqrt(dist / width), 1e-9)
        return 4.0 * math.sqrt(2.0) * width ** 2 * _graded_integral(integrand, 0.5 * math.pi, vmin, rtol)
    (x2,) = tp
    q = _deflate(V.coefficients, E, (x2,))

    # E - V = (x2 - x) Q(x) with x = x2*cos^2(u), u = pi/2 - v
    def integrand(v):
        s, co = np.cos(v), np.sin(v)
        x = x2 * co * co
        qv = np.maximum(np.polyval(q, x), 0.0)
        return s * s * co * np.sqrt(qv)

    vmin = max(0.25 * math.sqrt(dist / x2), 1e-9)
    return 4.0 * math.sqrt(2.0) * x2 ** 1.5 * _graded_integral(integrand, 0.5 * math.pi, vmin, rtol)


def well_action(V: PotentialModel, E: float, side: str = "right", rtol: float = 1e-13) -> float:
    """Action of the ``side`` well at energy ``E``.

    For ``E < 0`` this is ``2 * int sqrt(2(E - V)) dx`` over the allowed
    interval of that well (0 when ``E`` is below that well's bottom); for
    ``E >= 0`` it is the area of ``{p <= E}`` on that side of ``x = 0``.
    """
    vmin = _v_min(V)
    if E < vmin - 1e-14 * abs(vmin):
        raise ValueError(f"E={E!r} is below both wells (v_min={vmin!r})")
    if side == "right":
        return _right_action(V, float(E), rtol)
    if side == "left":
        return _right_action(_mirror(V), float(E), rtol)
    raise ValueError("side must be 'left' or 'right'")


def action_pair(V: PotentialModel, E: float, rtol: float = 1e-13) -> ActionPair:
    return ActionPair(well_action(V, E, "right", rtol), well_action(V, E, "left", rtol), float(E))


# ----------------------------------------------------------------- flow

def _rhs(V: PotentialModel):
    dc = V._derivatives[1]

    def f(t, y):
        return [y[1], -_hs(dc, y[0])]

    return f


def flow_integrate(V: PotentialModel, start: PhasePoint, t_max: float, tol: float = 1e-12) -> FlowTrace:
    """Integrate Hamilton's equations ``x' = xi``, ``xi' = -V'(x)`` with RK45.

    ``tol`` is used for both relative and absolute tolerance. Raises
    :class:`FlowError` if the step size underflows.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    sol = solve_ivp(_rhs(V), (0.0, float(t_max)), [float(start[0]), float(start[1])],
                    method="RK45", rtol=tol, atol=tol)
    if sol.status == -1:
        raise FlowError(sol.message, float(sol.t[-1]))
    x, xi = sol.y
    e = 0.5 * xi * xi + V(x)
    drift = float(np.max(np.abs(e - e[0])))
    return FlowTrace(sol.t, x, xi, drift)


def _first_return(V: PotentialModel, x0: float, t_max: float, tol: float) -> float:
    """Time to come back to ``(x0, 0)`` through the section ``xi = 0``.

    The first leg stops at the next crossing of ``xi = 0`` (opposite
    direction to the start), the second at the crossing in the start
    direction. Splitting avoids a spurious event at ``t = 0``.
    """
    s = -_hs(V._derivatives[1], x0)
    if s == 0.0:
        raise PeriodError("start point is an equilibrium")
    direction = 1.0 if s > 0 else -1.0
    total = 0.0
    pt = PhasePoint(x0, 0.0)
    for leg_dir in (-direction, direction):
        ev = lambda t, y: y[1]  # noqa: E731
        ev.terminal = True
        ev.direction = leg_dir
        sol = solve_ivp(_rhs(V), (0.0, t_max - total), [pt.x, pt.xi], method="RK45",
                        rtol=tol, atol=tol, events=ev, dense_output=True)
        if sol.status == -1:
            raise FlowError(sol.message, total + float(sol.t[-1]))
        hits = [t for t in sol.t_events[0] if t > 0.0]
        if not hits:
            raise PeriodError("period detection failed: no return before t_max")
        t_hit = hits[0]
        y = sol.sol(t_hit)
        total += t_hit
        pt = PhasePoint(float(y[0]), 0.0)
    return total


def return_period(V: PotentialModel, h: float, tol: float = 1e-10) -> float:
    """Return time ``tau(h)`` of the orbit through ``(sqrt(h), 0)``."""
    x0 = math.sqrt(h)
    if not V(x0) < 0.0:
        raise ValueError("sqrt(h) is not inside the right well")
    return _first_return(V, x0, 50.0 * abs(math.log(h)), tol)


def orbit_period(V: PotentialModel, E: float, side: str = "right", tol: float = 1e-11) -> float:
    """Period of the closed well orbit at ``v_min < E < 0``, by integration."""
    W = V if side == "right" else _mirror(V)
    tp = _right_turning(W, E)
    if len(tp) != 2 or E >= 0:
        raise ValueError("E must lie strictly inside the well (below the barrier)")
    return _first_return(W, tp[1], 1e4, tol)


def action_derivative_check(V: PotentialModel, E: float, side: str = "right"):
    """Return ``(dA/dE, period)``, the first by central differences."""
    vmin = _v_min(V)
    if not vmin < E < 0:
        raise ValueError("E must satisfy v_min < E < 0")
    step = 1e-5 * abs(E - vmin)
    dA = (well_action(V, E + step, side) - well_action(V, E - step, side)) / (2.0 * step)
    return dA, orbit_period(V, E, side)


def period_slope_fit(V: PotentialModel, h_list, tol: float = 1e-10):
    """Least-squares fit ``tau(h) = a |ln h| + b``.

    Returns
    -------
    (slope, intercept, r2, taus)
    """
    hs = np.asarray(sorted(h_list, reverse=True), dtype=float)
    if hs.size < 4:
        raise ValueError("need at least 4 values of h")
    taus = np.array([return_period(V, h, tol) for h in hs])
    L = np.abs(np.log(hs))
    slope, intercept = np.polyfit(L, taus, 1)
    pred = slope * L + intercept
    ss_res = float(np.sum((taus - pred) ** 2))
    ss_tot = float(np.sum((taus - taus.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2, taus
