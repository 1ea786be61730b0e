"""Dense truncated power series and the Hadamard-multiplication operator.

A series carries coefficients for z^0 .. z^M in one scalar kind: "rat"
(Fraction, exact) or "real" (mpf at the ambient working precision).  The
operator apply_L multiplies coefficient N by (omega(N) - eps)^k, which is
Hadamard multiplication by the cost-weighted geometric kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import numerics
from .errors import DomainError, KindMismatch, OrderMismatch, PoleError

RAT = "rat"
REAL = "real"


def _kind_of(value) -> str:
    return RAT if isinstance(value, (Fraction, int)) else REAL


@dataclass(frozen=True)
class TruncSeries:
    """Truncated power series with coefficients coeffs[0..order]."""

    coeffs: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in (RAT, REAL):
            raise KindMismatch(f"unknown scalar kind {self.kind!r}")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        return self.coeffs[n]

    @staticmethod
    def from_coeffs(values, kind: str | None = None) -> "TruncSeries":
        values = list(values)
        if not values:
            raise DomainError("series needs at least the z^0 coefficient")
        kind = kind or _kind_of(values[0])
        if kind == RAT:
            values = [Fraction(v) for v in values]
        else:
            values = [numerics.real(v) for v in values]
        return TruncSeries(tuple(values), kind)

    @staticmethod
    def constant(value, order: int, kind: str | None = None) -> "TruncSeries":
        kind = kind or _kind_of(value)
        zero = Fraction(0) if kind == RAT else mp.mpf(0)
        return TruncSeries.from_coeffs([value] + [zero] * order, kind)


def _check_pair(f: TruncSeries, g: TruncSeries):
    if f.kind != g.kind:
        raise KindMismatch(f"cannot mix {f.kind} and {g.kind} series")
    if f.order != g.order:
        raise OrderMismatch(f"orders differ: {f.order} vs {g.order}")


def add(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    _check_pair(f, g)
    return TruncSeries(tuple(a + b for a, b in zip(f.coeffs, g.coeffs)), f.kind)


def sub(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    _check_pair(f, g)
    return TruncSeries(tuple(a - b for a, b in zip(f.coeffs, g.coeffs)), f.kind)


def scale(f: TruncSeries, c) -> TruncSeries:
    c = Fraction(c) if f.kind == RAT else numerics.real(c)
    return TruncSeries(tuple(c * a for a in f.coeffs), f.kind)


def mul(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """Cauchy product truncated at the common order."""
    _check_pair(f, g)
    M = f.order
    zero = Fraction(0) if f.kind == RAT else mp.mpf(0)
    out = [zero] * (M + 1)
    for i, a in enumerate(f.coeffs):
        if a == 0:
            continue
        for j in range(M + 1 - i):
            out[i + j] += a * g.coeffs[j]
    return TruncSeries(tuple(out), f.kind)


def hadamard(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """Coefficientwise product."""
    _check_pair(f, g)
    return TruncSeries(tuple(a * b for a, b in zip(f.coeffs, g.coeffs)), f.kind)


def shift_down(f: TruncSeries) -> TruncSeries:
    """Divide by z.  Requires a vanishing constant term; order drops by one."""
    if f.coeffs[0] != 0:
        raise DomainError("division by z needs a zero constant term")
    return TruncSeries(f.coeffs[1:], f.kind)


def apply_L(omega, eps, k: int, f: TruncSeries) -> TruncSeries:
    """L-hat^k: coefficient N of f becomes f_N * (omega(N) - eps)^k.

    ``omega`` is a CostFunction (or any object with evaluate/evaluate_exact
    semantics via the costs module) and eps a scalar of the series kind.
    """
    if k < 1:
        raise DomainError(f"operator power must be >= 1, got {k}")
    from . import costs  # local import to keep the modules decoupled

    out = []
    for n, a in enumerate(f.coeffs):
        if f.kind == RAT:
            w = costs.evaluate_exact(omega, n)
            if w is None:
                raise KindMismatch("cost value is not rational; use a real series")
            factor = (w - Fraction(eps)) ** k
        else:
            factor = (costs.evaluate(omega, n) - numerics.real(eps)) ** k
        out.append(a * factor)
    return TruncSeries(tuple(out), f.kind)


def binomial_series(alpha, order: int) -> TruncSeries:
    """(1-z)^(-alpha): coefficient N is Gamma(N+alpha)/(Gamma(alpha) N!).

    Built with the ratio recurrence coeff(N+1) = coeff(N) (N+alpha)/(N+1).
    """
    if alpha == int(alpha) and alpha <= 0:
        raise PoleError(f"binomial series undefined for alpha = {alpha}")
    kind = _kind_of(alpha)
    alpha = Fraction(alpha) if kind == RAT else numerics.real(alpha)
    one = Fraction(1) if kind == RAT else mp.mpf(1)
    coeffs = [one]
    for n in range(order):
        coeffs.append(coeffs[-1] * (n + alpha) / (n + 1))
    return TruncSeries(tuple(coeffs), kind)


def sqrt_one_minus_z(order: int, kind: str = RAT) -> TruncSeries:
    """(1-z)^(1/2) (coefficients 1, -1/2, -1/8, -1/16, ...)."""
    s = binomial_series(Fraction(-1, 2), order)
    return s if kind == RAT else TruncSeries.from_coeffs(s.coeffs, REAL)


def inv_sqrt_one_minus_z(order: int, kind: str = RAT) -> TruncSeries:
    """(1-z)^(-1/2)."""
    s = binomial_series(Fraction(1, 2), order)
    return s if kind == RAT else TruncSeries.from_coeffs(s.coeffs, REAL)


def geometric(order: int, kind: str = RAT) -> TruncSeries:
    """1/(1-z): the Hadamard identity."""
    one = Fraction(1) if kind == RAT else mp.mpf(1)
    return TruncSeries.from_coeffs([one] * (order + 1), kind)


def e0_series(order: int, kind: str = RAT) -> TruncSeries:
    """(1 - sqrt(1-z))/z: the generating function of normalized Catalans c_N."""
    s = sqrt_one_minus_z(order + 1, kind)
    one = TruncSeries.constant(1 if kind == RAT else mp.mpf(1), order + 1, kind)
    return shift_down(sub(one, s))


def sqrt_unit(f: TruncSeries) -> TruncSeries:
    """Square root of a series with constant term 1 (same kind and order)."""
    if f.coeffs[0] != 1:
        raise DomainError("sqrt_unit needs constant term 1")
    one = Fraction(1) if f.kind == RAT else mp.mpf(1)
    out = [one]
    half = Fraction(1, 2) if f.kind == RAT else mp.mpf(0.5)
    for n in range(1, f.order + 1):
        acc = f.coeffs[n]
        for i in range(1, n):
            acc -= out[i] * out[n - i]
        out.append(half * acc)
    return TruncSeries(tuple(out), f.kind)


def compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """f(g(z)) for g with zero constant term, truncated at the common order."""
    _check_pair(f, g)
    if g.coeffs[0] != 0:
        raise DomainError("composition needs a zero constant term in g")
    M = f.order
    out = TruncSeries.constant(f.coeffs[0], M, f.kind)
    power = TruncSeries.constant(1 if f.kind == RAT else mp.mpf(1), M, f.kind)
    for n in range(1, M + 1):
        power = mul(power, g)
        out = add(out, scale(power, f.coeffs[n]))
    return out
