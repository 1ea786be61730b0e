"""The classical area law of the standard excursion as an independent
reference for p = 1 (spectral density over Airy-function zeros).

Conventions: a_k stores the MAGNITUDE of the k-th negative zero of Ai
(the series constants b_k = 2 a_k^3 / 27 must be positive for the density
to normalize, which fixes the sign convention).  The statistic of size-N
excursions with omega(k) = k + 1/2 rescaled by N^(3/2) converges to
sqrt(2) times this law; the scale factor is owned here and follows from
the moment identity (rescaled p=1 moments) / (classical moments) = 2^(s/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import ConvergenceError, DomainError
from .numerics import _work, constants

DYCK_SCALE = "sqrt(2)"  # rescaled Dyck statistic = sqrt(2) * classical law

_MAX_TERMS = 400


def airy_zero(k: int, bits: int | None = None) -> mp.mpf:
    """Magnitude of the k-th zero of Ai on the negative axis (increasing)."""
    if k < 1:
        raise DomainError("zeros are indexed from 1")
    with _work(bits):
        return +(-mp.airyaizero(k))


def airy_ai(x, bits: int | None = None) -> mp.mpf:
    """Ai(x) at working precision."""
    with _work(bits):
        return +mp.airyai(mp.mpf(x))


@dataclass(frozen=True)
class AiryTables:
    """Cached zero magnitudes a_k and series constants b_k = 2 a_k^3/27."""

    bits: int
    a: tuple
    b: tuple

    @classmethod
    def build(cls, k_max: int, bits: int | None = None) -> "AiryTables":
        with _work(bits):
            a = tuple(airy_zero(k, bits) for k in range(1, k_max + 1))
            b = tuple(2 * ak**3 / 27 for ak in a)
            return cls(bits or mp.mp.prec, a, b)


_tables_cache: dict = {}


def _tables(k_max: int, bits: int) -> AiryTables:
    key = (k_max, bits)
    t = _tables_cache.get(key)
    if t is None or len(t.a) < k_max:
        t = AiryTables.build(k_max, bits)
        _tables_cache[key] = t
    return t


def hypergeometric_U(a, b, z, bits: int | None = None) -> mp.mpf:
    """Tricomi's confluent hypergeometric U(a, b, z) for z > 0."""
    if z <= 0:
        raise DomainError("U is evaluated on the positive real axis")
    with _work(bits):
        return +mp.hyperu(mp.mpf(a), mp.mpf(b), mp.mpf(z))


def hypergeometric_U_integral(a, b, z, bits: int | None = None) -> mp.mpf:
    """Independent route for a > 0: the Laplace-type integral representation

    U(a,b,z) = (1/Gamma(a)) int_0^inf e^(-z t) t^(a-1) (1+t)^(b-a-1) dt.
    """
    if a <= 0:
        raise DomainError("the integral representation needs a > 0")
    if z <= 0:
        raise DomainError("z must be positive")
    with _work(bits):
        av, bv, zv = mp.mpf(a), mp.mpf(b), mp.mpf(z)
        integrand = lambda t: mp.e ** (-zv * t) * t ** (av - 1) * (1 + t) ** (bv - av - 1)
        return +(mp.quad(integrand, [0, 1, mp.inf]) / mp.gamma(av))


def airy_density(x, terms: int | None = None, bits: int | None = None, tol=None) -> mp.mpf:
    """Density of the classical area law:

    f(x) = (2 sqrt(6)/x^(10/3)) sum_k e^(-b_k/x^2) b_k^(2/3) U(-5/6, 4/3, b_k/x^2),

    summed adaptively until the next term falls below tolerance.
    """
    if x <= 0:
        raise DomainError("the density lives on x > 0")
    bits = bits or mp.mp.prec
    with _work(bits):
        xv = mp.mpf(x)
        tolv = mp.mpf(tol) if tol is not None else mp.eps * 8
        pref = 2 * mp.sqrt(6) / xv ** (mp.mpf(10) / 3)
        total = mp.mpf(0)
        k = 0
        cap = terms or _MAX_TERMS
        tabs = _tables(min(cap, 64), bits)
        while k < cap:
            if k >= len(tabs.a):
                tabs = _tables(min(cap, 2 * len(tabs.a)), bits)
            bk = tabs.b[k]
            z = bk / xv**2
            term = mp.e ** (-z) * bk ** (mp.mpf(2) / 3) * mp.hyperu(mp.mpf(-5) / 6, mp.mpf(4) / 3, z)
            total += term
            k += 1
            if terms is None and k >= 2 and abs(term) < tolv * max(abs(total), mp.mpf(1)):
                break
        else:
            if terms is None:
                raise ConvergenceError(f"density series still moving after {cap} terms at x={x}")
        return +(pref * total)


def _zero_magnitude_asymptotic(k) -> mp.mpf:
    """Two-term large-k magnitude of the k-th Ai zero."""
    t = 3 * mp.pi * (4 * mp.mpf(k) - 1) / 8
    return t ** (mp.mpf(2) / 3) * (1 + mp.mpf(5) / 48 / t**2)


def airy_laplace(lam, terms: int | None = None, bits: int | None = None, tol=None) -> mp.mpf:
    """Laplace transform lambda sqrt(2 pi) sum_k exp(-a_k lambda^(2/3) 2^(-1/3)).

    The head of the spectral sum uses tabulated zeros; for small lambda the
    slowly converging tail is completed with a midpoint Euler-Maclaurin
    integral over the zero asymptotics.
    """
    if lam <= 0:
        raise DomainError("the Laplace variable must be positive")
    bits = bits or mp.mp.prec
    with _work(bits):
        lv = mp.mpf(lam)
        tolv = mp.mpf(tol) if tol is not None else mp.mpf("1e-12")
        u = lv ** (mp.mpf(2) / 3) * mp.mpf(2) ** (-mp.mpf(1) / 3)
        head = terms or 64
        tabs = _tables(head, bits)
        total = mp.mpf(0)
        for k in range(head):
            term = mp.e ** (-tabs.a[k] * u)
            total += term
            if abs(term) < tolv * max(abs(total), mp.mpf(1)):
                break
        else:
            # midpoint-rule tail over the smooth zero asymptotics
            total += mp.quad(
                lambda k: mp.e ** (-_zero_magnitude_asymptotic(k) * u),
                [mp.mpf(head) + mp.mpf(0.5), mp.inf],
            )
        return +(lv * mp.sqrt(2 * constants(bits).pi) * total)


def density_normalization(bits: int = 64) -> mp.mpf:
    """int_0^inf f by adaptive quadrature (should be 1)."""
    with _work(bits):
        f = lambda x: airy_density(x, bits=bits, tol=mp.mpf("1e-12"))
        return +mp.quad(f, [mp.mpf("1e-3"), mp.mpf(0.5), 1, 2, 4, 8])


def moment_by_quadrature(s: int, bits: int = 64) -> mp.mpf:
    """int x^s f dx by adaptive quadrature (independent of the recursion)."""
    with _work(bits):
        f = lambda x: mp.mpf(x) ** s * airy_density(x, bits=bits, tol=mp.mpf("1e-12"))
        return +mp.quad(f, [mp.mpf("1e-3"), mp.mpf(0.5), 1, 2, 4, 8])


def cdf_grid(x_max: float = 4.0, points: int = 1024, bits: int = 64, scale=1):
    """CDF of (scale * classical law) tabulated on a uniform grid via
    Simpson integration of the density (for KS-style comparisons).

    Returns (xs, F) as float lists; F is clipped to [0, 1].
    """
    with _work(bits):
        sc = mp.mpf(scale)
        h = mp.mpf(x_max) / points
        # density of the scaled variable: f(x/sc)/sc
        dens = [mp.mpf(0)]  # vanishing at 0 faster than any power
        for i in range(1, points + 1):
            x = i * h
            dens.append(airy_density(x / sc, bits=bits, tol=mp.mpf("1e-10")) / sc)
        xs, F = [0.0], [mp.mpf(0)]
        # composite Simpson on consecutive pairs of intervals; far in the tail
        # the density evaluation is cancellation noise, so clamp segments
        for i in range(2, points + 1, 2):
            seg = (h / 3) * (dens[i - 2] + 4 * dens[i - 1] + dens[i])
            F.append(F[-1] + max(seg, mp.mpf(0)))
            xs.append(float(i * h))
        return xs, [min(1.0, float(v)) for v in F]
