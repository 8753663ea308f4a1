"""Polynomial double-well potentials.

A potential is stored as its coefficient list ``c[0] .. c[d]`` with
``V(x) = sum(c[i] * x**i)``. The module parses the small ASCII grammar used
on the command line, evaluates derivatives by Horner's rule, isolates real
critical points with Sturm chains and checks the double-well hypotheses:

* ``V(0) = 0`` and ``V'(0) = 0``,
* ``V''(0) < 0`` (non-degenerate barrier top at the origin),
* even degree with positive leading coefficient (confinement),
* exactly one local minimum on each side of the origin.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "ParseError",
    "PotentialModel",
    "ValidationReport",
    "Violation",
    "parse_potential",
    "format_potential",
    "validate_double_well",
    "eval_potential",
    "recenter",
    "real_roots",
]


class ParseError(ValueError):
    """Raised for malformed potential expressions.

    ``column`` is the 1-based position of the offending character.
    """

    def __init__(self, message: str, column: int | None = None):
        self.column = column
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(message)


@dataclass(frozen=True)
class PotentialModel:
    """Real polynomial potential ``V(x) = sum c_i x^i``.

    Parameters
    ----------
    coefficients : sequence of float
        Ascending coefficients; trailing zeros are stripped.
    domain_hint : float, optional
        Half-width used when locating critical points. Defaults to twice the
        largest critical-point magnitude plus one.
    """

    coefficients: tuple[float, ...]
    domain_hint: float = field(default=0.0)

    def __post_init__(self):
        coeffs = [float(c) for c in self.coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if not coeffs:
            coeffs = [0.0]
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", tuple(coeffs))
        if not self.domain_hint:
            crit = real_roots(_derivative(coeffs)) if len(coeffs) > 2 else []
            largest = max((abs(r) for r in crit), default=0.0)
            object.__setattr__(self, "domain_hint", 2.0 * largest + 1.0)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def eval(self, x, order: int = 0):
        """Evaluate ``V`` or one of its first three derivatives at ``x``."""
        if not 0 <= order <= 3:
            raise ValueError("order must be in 0..3")
        return _horner(self._derivatives[order], x)

    def __call__(self, x):
        return _horner(self.coefficients, x)

    @cached_property
    def _derivatives(self) -> tuple[tuple[float, ...], ...]:
        out = [self.coefficients]
        for _ in range(3):
            out.append(tuple(_derivative(out[-1])))
        return tuple(out)

    def mirrored(self) -> PotentialModel:
        """Return ``x -> V(-x)``."""
        c = tuple(ci if i % 2 == 0 else -ci for i, ci in enumerate(self.coefficients))
        return PotentialModel(c, self.domain_hint)

    def scaled(self, factor: float) -> PotentialModel:
        return PotentialModel(tuple(factor * c for c in self.coefficients), self.domain_hint)

    @cached_property
    def critical_points(self) -> tuple[float, ...]:
        """Sorted distinct real roots of ``V'``."""
        if self.degree < 2:
            return ()
        return tuple(real_roots(self._derivatives[1]))

    @cached_property
    def is_even(self) -> bool:
        return all(c == 0.0 for c in self.coefficients[1::2])

    def __str__(self) -> str:
        return format_potential(self)


def _horner(coeffs: Sequence[float], x):
    acc = coeffs[-1] * np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else float(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _derivative(coeffs: Sequence[float]) -> list[float]:
    if len(coeffs) <= 1:
        return [0.0]
    return [i * coeffs[i] for i in range(1, len(coeffs))]


def eval_potential(V: PotentialModel, x, order: int = 0):
    """Module-level alias of :meth:`PotentialModel.eval`."""
    return V.eval(x, order)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<x>x)|(?P<op>[-+*^]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind) + 1
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


def parse_potential(expression: str) -> PotentialModel:
    """Parse a polynomial in ``x``.

    Grammar (whitespace insensitive)::

        expr  := sign? term (('+'|'-') term)*
        term  := coeff ('*'? 'x' ('^' int)?)? | 'x' ('^' int)?
        coeff := decimal literal

    Raises
    ------
    ParseError
        On syntax errors, or when the result is not an even polynomial of
        degree at least four.
    """
    tokens = _tokenize(expression)
    i = 0
    powers: dict[int, float] = {}

    def peek():
        return tokens[i]

    sign = 1.0
    kind, val, col = peek()
    if kind == "op" and val in "+-":
        sign = -1.0 if val == "-" else 1.0
        i += 1
    while True:
        kind, val, col = peek()
        coeff = 1.0
        have_coeff = False
        if kind == "num":
            coeff = float(val)
            have_coeff = True
            i += 1
            kind, val, col = peek()
            if kind == "op" and val == "*":
                i += 1
                kind, val, col = peek()
                if kind != "x":
                    raise ParseError("expected 'x' after '*'", col)
        power = 0
        if kind == "x":
            i += 1
            power = 1
            kind, val, col = peek()
            if kind == "op" and val == "^":
                i += 1
                kind, val, col = peek()
                if kind != "num" or not val.isdigit():
                    raise ParseError("exponent must be a non-negative integer", col)
                power = int(val)
                i += 1
        elif not have_coeff:
            raise ParseError("expected a number or 'x'", col)
        powers[power] = powers.get(power, 0.0) + sign * coeff
        kind, val, col = peek()
        if kind == "end":
            break
        if kind == "op" and val in "+-":
            sign = -1.0 if val == "-" else 1.0
            i += 1
            continue
        raise ParseError(f"unexpected token {val!r}", col)

    degree = max((p for p, c in powers.items() if c != 0.0), default=0)
    coeffs = [powers.get(p, 0.0) for p in range(degree + 1)]
    if degree < 4 or degree % 2:
        raise ParseError(
            f"not confining double-well candidate: degree {degree} (need even degree >= 4)"
        )
    return PotentialModel(tuple(coeffs))


def format_potential(V: PotentialModel) -> str:
    """Render ``V`` in the parser grammar; ``parse(format(V))`` is bit-exact."""
    parts = []
    for power in range(V.degree, -1, -1):
        c = V.coefficients[power]
        if c == 0.0 and V.degree > 0:
            continue
        mag = repr(abs(c))
        body = mag if power == 0 else f"{mag}*x" if power == 1 else f"{mag}*x^{power}"
        if not parts:
            parts.append(("-" if math.copysign(1.0, c) < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0.0"


# ------------------------------------------------------- root isolation

def _trim(p: np.ndarray, scale: float) -> np.ndarray:
    # p in descending order
    nz = np.flatnonzero(np.abs(p) > 1e-13 * scale)
    return p[nz[0]:] if nz.size else np.zeros(1)


def _sturm_chain(desc: np.ndarray) -> list[np.ndarray]:
    scale = np.max(np.abs(desc))
    chain = [desc / scale, np.polyder(desc) / scale]
    while chain[-1].size > 1:
        _, rem = np.polydiv(chain[-2], chain[-1])
        rem = _trim(-rem, max(np.max(np.abs(chain[-2])), 1e-300))
        if rem.size == 1 and rem[0] == 0.0:
            break
        chain.append(rem / np.max(np.abs(rem)))
    return chain


def _sign_changes(chain: list[np.ndarray], x: float) -> int:
    vals = [np.polyval(p, x) for p in chain]
    signs = [v for v in vals if v != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a < 0) != (b < 0))


def real_roots(coeffs: Sequence[float], tol: float = 1e-14) -> list[float]:
    """Distinct real roots of an ascending-coefficient polynomial.

    Roots are isolated with a Sturm chain and polished by bisection.
    """
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    desc = np.array(coeffs[::-1], dtype=float)
    chain = _sturm_chain(desc)
    bound = 1.0 + max(abs(c / coeffs[-1]) for c in coeffs[:-1])
    lo, hi = -bound, bound
    count = _sign_changes(chain, lo) - _sign_changes(chain, hi)
    roots: list[float] = []
    stack = [(lo, hi, count)]
    while stack:
        a, b, n = stack.pop()
        if n <= 0:
            continue
        if n == 1 or b - a < tol * max(1.0, abs(a)):
            roots.append(_newton(desc, _polish(desc, chain, a, b, tol), a, b))
            continue
        m = _split(chain, a, b)
        nm = _sign_changes(chain, a) - _sign_changes(chain, m)
        stack.append((a, m, nm))
        stack.append((m, b, n - nm))
    return sorted(roots)


def _newton(desc: np.ndarray, r: float, a: float, b: float) -> float:
    # two guarded Newton steps to recover the last bits of a simple root
    d = np.polyder(desc)
    for _ in range(2):
        fr, dr = np.polyval(desc, r), np.polyval(d, r)
        if fr == 0.0 or dr == 0.0:
            break
        rn = r - fr / dr
        if not a < rn <= b or abs(np.polyval(desc, rn)) > abs(fr):
            break
        r = rn
    return float(r)


def _split(chain: list[np.ndarray], a: float, b: float) -> float:
    # a bisection point where no chain member vanishes, so the count is exact
    for frac in (0.5, 0.5 + 1.0 / 64, 0.5 - 1.0 / 32, 0.5 + 1.0 / 7, 0.5 - 1.0 / 5):
        m = a + frac * (b - a)
        if all(np.polyval(p, m) != 0.0 for p in chain):
            return m
    return m


def _polish(desc: np.ndarray, chain: list[np.ndarray], a: float, b: float, tol: float) -> float:
    """Shrink the isolating interval ``(a, b]`` around its single root."""
    fa, fb = np.polyval(desc, a), np.polyval(desc, b)
    use_sign = fa != 0.0 and fb != 0.0 and (fa < 0) != (fb < 0)
    if fb == 0.0:
        return b
    na = _sign_changes(chain, a)
    for _ in range(200):
        m = 0.5 * (a + b) if use_sign else _split(chain, a, b)
        if m <= a or m >= b or b - a < tol * max(1.0, abs(m)):
            break
        if use_sign:
            fm = np.polyval(desc, m)
            if fm == 0.0:
                return m
            left = (fm < 0) != (fa < 0)
        else:
            left = na - _sign_changes(chain, m) > 0
        if left:
            b = m
        else:
            a, fa = m, np.polyval(desc, m)
    return 0.5 * (a + b)


# ------------------------------------------------------------- validation

class Violation(NamedTuple):
    check: str
    message: str
    location: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...]
    barrier_curvature: float
    well_minima: tuple[tuple[float, float], ...]
    v_min: float

    def lines(self) -> list[str]:
        out = [f"passed: {self.passed}"]
        out.append(f"barrier_curvature: {self.barrier_curvature!r}")
        for x, v in self.well_minima:
            out.append(f"well_minimum: x={x!r} V={v!r}")
        out.append(f"v_min: {self.v_min!r}")
        for viol in self.violations:
            loc = "" if viol.location is None else f" at x={viol.location!r}"
            out.append(f"violation[{viol.check}]: {viol.message}{loc}")
        return out


def validate_double_well(V: PotentialModel) -> ValidationReport:
    """Check every double-well hypothesis. Failures become report entries."""
    c = V.coefficients + (0.0,) * max(0, 3 - len(V.coefficients))
    violations: list[Violation] = []
    if c[0] != 0.0:
        violations.append(Violation("value_at_origin", f"V(0) = {c[0]!r} != 0", 0.0))
    if c[1] != 0.0:
        violations.append(Violation("slope_at_origin", f"V'(0) = {c[1]!r} != 0", 0.0))
    v2 = 2.0 * c[2]
    if not v2 < 0.0:
        violations.append(Violation("curvature_at_origin", f"V''(0) = {v2!r} is not < 0", 0.0))
    lead = V.coefficients[-1]
    if V.degree % 2 or V.degree < 4 or lead <= 0.0:
        violations.append(
            Violation("confinement", f"degree {V.degree}, leading coefficient {lead!r}")
        )

    crit = [x for x in V.critical_points if abs(x) < V.domain_hint]
    neg = [x for x in crit if x < 0.0]
    pos = [x for x in crit if x > 0.0]
    kinds = {x: _critical_kind(V, x) for x in crit}
    maxima = [x for x, k in kinds.items() if k == "max"]
    if len(maxima) != 1:
        violations.append(
            Violation("unique_maximum", f"found {len(maxima)} local maxima", maxima[0] if maxima else None)
        )
    minima = []
    for side, pts in (("left", neg), ("right", pos)):
        if len(pts) != 1:
            violations.append(
                Violation(f"{side}_well", f"{len(pts)} critical points on the {side} (need 1)")
            )
        elif kinds[pts[0]] != "min":
            violations.append(Violation(f"{side}_well", "critical point is not a minimum", pts[0]))
        else:
            minima.append((pts[0], float(V(pts[0]))))
    passed = not violations
    curvature = math.sqrt(-v2) if v2 < 0 else float("nan")
    v_min = min((v for _, v in minima), default=float("nan"))
    return ValidationReport(passed, tuple(violations), curvature, tuple(minima), v_min)


def _critical_kind(V: PotentialModel, x: float) -> str:
    d2 = V.eval(x, 2)
    if d2 < 0:
        return "max"
    if d2 > 0:
        return "min"
    d = 1e-4 * max(1.0, abs(x))
    left, mid, right = V(x - d), V(x), V(x + d)
    if left > mid and right > mid:
        return "min"
    if left < mid and right < mid:
        return "max"
    return "inflection"


def recenter(V: PotentialModel) -> PotentialModel:
    """Translate so the unique local maximum sits at the origin with ``V = 0``.

    Raises ``ValueError`` if there is not exactly one local maximum.
    """
    maxima = [x for x in V.critical_points if _critical_kind(V, x) == "max"]
    if len(maxima) != 1:
        raise ValueError(f"cannot recenter: {len(maxima)} local maxima")
    x0 = maxima[0]
    n = V.degree
    # Taylor coefficients at x0: c_k = V^(k)(x0)/k!
    coeffs = list(V.coefficients)
    shifted = []
    for k in range(n + 1):
        shifted.append(_horner(coeffs, x0))
        coeffs = _derivative(coeffs)
        coeffs = [ci / (k + 1) for ci in coeffs]
    shifted[0] = 0.0
    if n >= 1:
        shifted[1] = 0.0
    return PotentialModel(tuple(shifted))
