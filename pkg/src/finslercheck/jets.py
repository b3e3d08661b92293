"""Forward-mode truncated Taylor arithmetic in several variables, order <= 3.

A :class:`Jet` carries the value and all partial derivatives of a scalar up
to ``order`` in ``nvars`` variables, stored as Taylor coefficients
D^a f / a! with one slot per sorted multi-index (see ``_multi_index``).
Sums and products propagate derivatives exactly for polynomials of degree
<= order; transcendental functions are pushed through with a truncated
series in the zero-value part of their argument.

The coefficient kernels (product accumulation and series composition) come
from the compiled module ``_jet_core`` when available, otherwise from the
pure-python ``_jet_core_py``.  Set ``FINSLERCHECK_PURE=1`` to force the
fallback; both backends produce bit-identical coefficients.

All operations are pure: jets are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ._multi_index import (
    coeff_count,
    dense_scatter,
    derivative_factors,
    index_tuples,
    position_map,
    product_table,
)

_ACCESS_CACHE: dict = {}


def _access(nvars: int, order: int):
    key = (nvars, order)
    entry = _ACCESS_CACHE.get(key)
    if entry is None:
        entry = (position_map(nvars, order), derivative_factors(nvars, order))
        _ACCESS_CACHE[key] = entry
    return entry

if os.environ.get("FINSLERCHECK_PURE") == "1":
    from . import _jet_core_py as _kernels

    COMPILED = False
else:
    try:
        from . import _jet_core as _kernels  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _jet_core_py as _kernels

        COMPILED = False

MAX_ORDER = 3

# Divisors smaller than this signal a domain error instead of overflowing.
DIVISION_GUARD = 1e-300


def backend_name() -> str:
    return "compiled" if COMPILED else "pure"


class JetDomainError(ValueError):
    """A jet operation left the domain of the function being applied."""

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message if value is None else f"{message} (value {value!r})")
        self.value = value


class Jet:
    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: np.ndarray):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value: float, nvars: int, order: int) -> "Jet":
        c = np.zeros(coeff_count(nvars, order))
        c[0] = value
        return cls(nvars, order, c)

    @classmethod
    def variable(cls, index: int, value: float, nvars: int, order: int) -> "Jet":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be 0..{MAX_ORDER}, got {order}")
        c = np.zeros(coeff_count(nvars, order))
        c[0] = value
        if order >= 1:
            c[1 + index] = 1.0
        return cls(nvars, order, c)

    # -- accessors ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, *variables: int) -> float:
        """Derivative with respect to the given variables, e.g. partial(0, 2)."""
        positions, factors = _access(self.nvars, self.order)
        try:
            pos = positions[tuple(sorted(variables))]
        except KeyError:
            raise ValueError(
                f"jet of order {self.order} in {self.nvars} variables has no "
                f"derivative {variables}"
            ) from None
        return float(self.coeffs[pos] * factors[pos])

    def gradient(self) -> np.ndarray:
        return self.coeffs[1 : 1 + self.nvars].copy()

    def _dense(self, degree: int) -> np.ndarray:
        m = self.nvars
        derivs = self.coeffs * derivative_factors(m, self.order)
        slots, flats = dense_scatter(m, self.order, degree)
        out = np.zeros(m**degree)
        out[flats] = derivs[slots]
        return out.reshape((m,) * degree)

    def hessian(self) -> np.ndarray:
        return self._dense(2)

    def third_tensor(self) -> np.ndarray:
        return self._dense(3)

    def __repr__(self) -> str:
        return f"Jet(m={self.nvars}, order={self.order}, value={self.value!r})"

    # -- arithmetic --------------------------------------------------------

    def _like(self, coeffs: np.ndarray) -> "Jet":
        return Jet(self.nvars, self.order, coeffs)

    def _check(self, other: "Jet") -> None:
        if self.nvars != other.nvars or self.order != other.order:
            raise ValueError(
                f"jet shape mismatch: ({self.nvars},{self.order}) vs "
                f"({other.nvars},{other.order})"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return self._like(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return self._like(c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return self._like(self.coeffs - other.coeffs)
        c = self.coeffs.copy()
        c[0] -= other
        return self._like(c)

    def __rsub__(self, other):
        c = -self.coeffs
        c[0] += other
        return self._like(c)

    def __neg__(self):
        return self._like(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            out = np.empty_like(self.coeffs)
            left, right, target = product_table(self.nvars, self.order)
            _kernels.mul(self.coeffs, other.coeffs, out, left, right, target)
            return self._like(out)
        return self._like(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            out = self * _reciprocal(other)
            # the value slot rounds once, not through the reciprocal
            out.coeffs[0] = self.coeffs[0] / other.coeffs[0]
            return out
        if abs(other) < DIVISION_GUARD:
            raise JetDomainError("division by (near-)zero scalar", other)
        return self._like(self.coeffs / other)

    def __rtruediv__(self, other):
        out = _reciprocal(self) * other
        out.coeffs[0] = other / self.coeffs[0]
        return out

    def __pow__(self, exponent):
        return powc(self, exponent)


def lift_var(index: int, value: float, nvars: int, order: int) -> Jet:
    """Seed jet for one input variable: unit gradient slot, zero above."""
    return Jet.variable(index, value, nvars, order)


def _compose(a: Jet, h0: float, h1: float, h2: float, h3: float) -> Jet:
    """Truncated series h(a) from the derivatives of h at a.value."""
    out = np.empty_like(a.coeffs)
    left, right, target = product_table(a.nvars, a.order)
    _kernels.compose(h0, h1, h2, h3, a.coeffs, out, left, right, target, a.order)
    if not np.isfinite(out).all():
        raise JetDomainError("non-finite jet coefficients after composition", a.value)
    return Jet(a.nvars, a.order, out)


def _reciprocal(b: Jet) -> Jet:
    w = b.value
    if abs(w) < DIVISION_GUARD:
        raise JetDomainError("division by (near-)zero jet", w)
    try:
        w2 = w * w
        h = (1.0 / w, -1.0 / w2, 2.0 / (w2 * w), -6.0 / (w2 * w2))
    except (ZeroDivisionError, OverflowError):
        raise JetDomainError("reciprocal derivatives overflow", w) from None
    return _compose(b, *h)


def sqrt(a):
    if not isinstance(a, Jet):
        if a <= 0.0:
            raise JetDomainError("sqrt requires a positive argument", a)
        return math.sqrt(a)
    w = a.value
    if w <= 0.0:
        raise JetDomainError("sqrt requires a positive argument", w)
    try:
        s = math.sqrt(w)
        h = (s, 0.5 / s, -0.25 / (s * w), 0.375 / (s * w * w))
    except (ZeroDivisionError, OverflowError):
        raise JetDomainError("sqrt derivatives overflow", w) from None
    return _compose(a, *h)


def log(a):
    if not isinstance(a, Jet):
        if a <= 0.0:
            raise JetDomainError("log requires a positive argument", a)
        return math.log(a)
    w = a.value
    if w <= 0.0:
        raise JetDomainError("log requires a positive argument", w)
    try:
        h = (math.log(w), 1.0 / w, -1.0 / (w * w), 2.0 / (w * w * w))
    except (ZeroDivisionError, OverflowError):
        raise JetDomainError("log derivatives overflow", w) from None
    return _compose(a, *h)


def exp(a):
    if not isinstance(a, Jet):
        return math.exp(a)
    try:
        e = math.exp(a.value)
    except OverflowError:
        raise JetDomainError("exp overflow", a.value) from None
    return _compose(a, e, e, e, e)


def sin(a):
    if not isinstance(a, Jet):
        return math.sin(a)
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, s, c, -s, -c)


def cos(a):
    if not isinstance(a, Jet):
        return math.cos(a)
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, c, -s, -c, s)


def absval(a):
    """|a| away from zero; refuses the kink rather than guessing a subgradient."""
    if not isinstance(a, Jet):
        if a == 0.0:
            raise JetDomainError("abs is not differentiable at 0", a)
        return abs(a)
    w = a.value
    if w == 0.0:
        raise JetDomainError("abs is not differentiable at 0", w)
    return a * math.copysign(1.0, w)


def powc(a, exponent: float):
    """a raised to a constant exponent.

    Integer exponents are computed by repeated multiplication (exact for
    polynomials, valid for any base value); fractional exponents require a
    positive base.
    """
    if not isinstance(a, Jet):
        return float(a) ** exponent
    e = float(exponent)
    if e == int(e):
        n = int(e)
        if n == 0:
            return Jet.constant(1.0, a.nvars, a.order)
        inv = n < 0
        n = abs(n)
        result = None
        base = a
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return _reciprocal(result) if inv else result
    w = a.value
    if w <= 0.0:
        raise JetDomainError("fractional power requires a positive base", w)
    try:
        h0 = w**e
        h1 = e * w ** (e - 1.0)
        h2 = e * (e - 1.0) * w ** (e - 2.0)
        h3 = e * (e - 1.0) * (e - 2.0) * w ** (e - 3.0)
    except (ZeroDivisionError, OverflowError):
        raise JetDomainError("power derivatives overflow", w) from None
    return _compose(a, h0, h1, h2, h3)


def compose_multivariate(outer: Jet, inners: list[Jet]) -> Jet:
    """Chain rule: the jet of f(g_1(x), ..., g_p(x)) from the jet of f.

    ``outer`` must be expanded exactly at the point (inners[0].value, ...);
    all inner jets share variables and order with each other.
    """
    if len(inners) != outer.nvars:
        raise ValueError(f"need {outer.nvars} inner jets, got {len(inners)}")
    first = inners[0]
    for g in inners[1:]:
        first._check(g)
    order = first.order
    if order != outer.order:
        raise ValueError("outer and inner jets must share the same order")
    deltas = [g - g.value for g in inners]
    result = Jet.constant(outer.coeffs[0], first.nvars, order)
    pair_cache: dict[tuple, Jet] = {}

    def pair(i: int, j: int) -> Jet:
        key = (i, j)
        if key not in pair_cache:
            pair_cache[key] = deltas[i] * deltas[j]
        return pair_cache[key]

    for pos, idx in enumerate(index_tuples(outer.nvars, outer.order)):
        if not idx:
            continue
        c = float(outer.coeffs[pos])
        if c == 0.0:
            continue
        if len(idx) == 1:
            term = deltas[idx[0]]
        elif len(idx) == 2:
            term = pair(idx[0], idx[1])
        else:
            term = pair(idx[0], idx[1]) * deltas[idx[2]]
        result = result + term * c
    return result
