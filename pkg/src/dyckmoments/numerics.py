"""Arbitrary-precision reals, exact rationals and shared special functions.

All floating computation in the library goes through mpmath at a single
configurable working precision (bits).  Exact combinatorial quantities
(Catalan numbers, double factorials) are ``fractions.Fraction`` values and
never rounded.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import DomainError, PoleError

DEFAULT_PRECISION = 256

_state = threading.local()


def working_precision() -> int:
    """Current default precision in bits."""
    return getattr(_state, "bits", DEFAULT_PRECISION)


def set_working_precision(bits: int) -> None:
    if bits < 8:
        raise DomainError(f"precision must be at least 8 bits, got {bits}")
    _state.bits = int(bits)


@contextmanager
def precision(bits: int):
    """Temporarily switch the default working precision."""
    old = working_precision()
    set_working_precision(bits)
    try:
        yield
    finally:
        set_working_precision(old)


@contextmanager
def _work(bits: int | None = None, guard: int = 10):
    """mpmath context at the requested precision plus guard bits."""
    with mp.workprec((bits or working_precision()) + guard):
        yield


def real(x, bits: int | None = None) -> mp.mpf:
    """Convert to mpf at working precision. Fractions convert exactly."""
    with _work(bits, guard=0):
        if isinstance(x, Fraction):
            return mp.mpf(x.numerator) / x.denominator
        return mp.mpf(x)


def to_digits(x, bits: int | None = None) -> str:
    """Decimal string carrying the full requested precision."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    bits = bits or working_precision()
    dps = int(bits * 0.30103) + 2
    with mp.workprec(bits + 10):
        return mp.nstr(x if isinstance(x, mp.mpf) else mp.mpf(x), dps)


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class Constants:
    """Frequently used constants at a fixed precision."""

    bits: int
    pi: mp.mpf
    sqrt_pi: mp.mpf
    euler_gamma: mp.mpf
    ln2: mp.mpf
    zeta2: mp.mpf
    zeta3: mp.mpf
    zeta5: mp.mpf


_constants_cache: dict[int, Constants] = {}
_constants_lock = threading.Lock()


def constants(bits: int | None = None) -> Constants:
    """Constants at the requested precision, computed once and cached."""
    bits = bits or working_precision()
    cached = _constants_cache.get(bits)
    if cached is not None:
        return cached
    with mp.workprec(bits + 20):
        vals = Constants(
            bits=bits,
            pi=+mp.pi,
            sqrt_pi=mp.sqrt(mp.pi),
            euler_gamma=+mp.euler,
            ln2=mp.log(2),
            zeta2=mp.zeta(2),
            zeta3=mp.zeta(3),
            zeta5=mp.zeta(5),
        )
    with _constants_lock:
        # idempotent: concurrent initializers compute identical values
        _constants_cache.setdefault(bits, vals)
        return _constants_cache[bits]


# ---------------------------------------------------------------------------
# gamma functions (mpmath-backed, with the library's error contract)


def _near_nonpositive_integer(x: mp.mpf) -> bool:
    if x > 0.5:
        return False
    n = mp.nint(x)
    if n > 0:
        return False
    # within half an ulp of the rounded integer
    return x == n or abs(x - n) <= abs(x) * mp.eps / 2


def gamma(x, bits: int | None = None) -> mp.mpf:
    """Gamma(x) at working precision.

    Raises PoleError when x is numerically a non-positive integer.
    """
    with _work(bits):
        xv = real(x, bits)
        if _near_nonpositive_integer(xv):
            raise PoleError(f"gamma pole at {mp.nstr(xv, 8)}")
        return +mp.gamma(xv)


def log_gamma(x, bits: int | None = None) -> mp.mpf:
    """ln Gamma(x) for x > 0."""
    with _work(bits):
        xv = real(x, bits)
        if xv <= 0:
            raise DomainError(f"log_gamma requires x > 0, got {mp.nstr(xv, 8)}")
        return +mp.loggamma(xv)


def gamma_quotient(num, den, bits: int | None = None) -> mp.mpf:
    """prod Gamma(num_i) / prod Gamma(den_j), taking limits at poles.

    PoleError when the limit diverges.
    """
    with _work(bits, guard=20):
        value = mp.gammaprod([real(v, bits) for v in num], [real(v, bits) for v in den])
        if not mp.isfinite(value):
            raise PoleError("gamma quotient diverges")
        return +value


# ---------------------------------------------------------------------------
# exact combinatorics


def catalan(n: int) -> Fraction:
    """C_n = binom(2n, n)/(n+1), exact."""
    if n < 0:
        raise DomainError(f"catalan requires n >= 0, got {n}")
    return Fraction(math.comb(2 * n, n), n + 1)


def normalized_catalan(k: int) -> Fraction:
    """c_k = 2^(-2k-1) C_k; the c_k sum to 1."""
    if k < 0:
        raise DomainError(f"normalized_catalan requires k >= 0, got {k}")
    return catalan(k) / (1 << (2 * k + 1))


def double_factorial(n: int) -> Fraction:
    """n!! with the convention (-1)!! = 1."""
    if n < -1:
        raise DomainError(f"double_factorial requires n >= -1, got {n}")
    out = 1
    for i in range(n, 1, -2):
        out *= i
    return Fraction(out)


def half_integer_gamma(n: int, bits: int | None = None) -> mp.mpf:
    """Gamma(n + 1/2) = (2n)!/(4^n n!) * sqrt(pi) for integer n (exact prefactor)."""
    pref = Fraction(math.factorial(2 * n), 4**n * math.factorial(n)) if n >= 0 else None
    with _work(bits, guard=0):
        if pref is not None:
            return real(pref, bits) * constants(bits).sqrt_pi
        return gamma(Fraction(2 * n + 1, 2), bits)
