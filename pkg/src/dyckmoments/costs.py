"""Deformation families omega_p(k) and their non-universal constants alpha.

alpha(omega_p) is the value at z=1 of the regular part of the Hadamard
series sum_N c_N omega_p(N) z^N.  Four gamma-ratio families admit closed
forms; the generic route (alpha_numeric) regularizes the sum by matching
omega against the exactly summable reference ladder

    r_q(k) = Gamma(k+q+1/2)/Gamma(k+1/2),      alpha(r_q) = -Gamma(q-1/2)/(2 sqrt(pi)),

at q = p, p-1, ..., which leaves a remainder whose plain Hadamard sum
converges fast.  At half-odd p >= 3/2 the q = 1/2 ladder member degenerates
(its alpha has a pole); there alpha is evaluated as the symmetric average
of p +- h, which reproduces the finite limit when the family's degenerate
amplitude vanishes and detects a genuine pole otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import numerics
from .errors import ConvergenceError, DomainError, NoClosedForm, PoleError
from .numerics import _work, constants, real

GAMMA_RATIO = "gamma_ratio"
GAMMA_RATIO_32 = "gamma_ratio_32"
POWER_HALF = "power_half"
POWER_ONE = "power_one"
PURE_POWER = "pure_power"
LOG_SHIFT = "log_shift"

FAMILIES = (GAMMA_RATIO, GAMMA_RATIO_32, POWER_HALF, POWER_ONE, PURE_POWER, LOG_SHIFT)

# CLI-facing registry names
CLI_NAMES = {
    "gamma-ratio": GAMMA_RATIO,
    "gamma-ratio-32": GAMMA_RATIO_32,
    "power-half": POWER_HALF,
    "power-one": POWER_ONE,
    "pure-power": PURE_POWER,
    "log-shift": LOG_SHIFT,
}


@dataclass(frozen=True)
class CostFunction:
    """A deformation family member: omega(k) ~ k^p (1 + O(k^-eta))."""

    family: str
    p: Fraction
    a: Fraction | None = None
    eta: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown cost family {self.family!r}")
        if self.family != LOG_SHIFT and self.p < 0:
            raise DomainError("exponent p must be >= 0")
        if self.family == GAMMA_RATIO and (self.a is None or self.a <= 0):
            raise DomainError("gamma_ratio requires a > 0 so omega(k) > 0 for all k")
        if self.family == GAMMA_RATIO_32 and self.a is None:
            raise DomainError("gamma_ratio_32 requires the parameter a")

    def describe(self) -> str:
        extra = f", a={self.a}" if self.a is not None else ""
        return f"{self.family}(p={self.p}{extra})"


def _frac(x) -> Fraction:
    # Fraction(float) is the exact binary value, so 0.75 -> 3/4 etc.
    return x if isinstance(x, Fraction) else Fraction(x)


def gamma_ratio(p, a=Fraction(1, 2)) -> CostFunction:
    """omega(k) = Gamma(k+p+a)/Gamma(k+a)."""
    return CostFunction(GAMMA_RATIO, _frac(p), _frac(a))


def gamma_ratio_32(p, a) -> CostFunction:
    """omega(k) = Gamma(k+p+a-3/2) Gamma(k+2) / (Gamma(k+a) Gamma(k+1/2))."""
    return CostFunction(GAMMA_RATIO_32, _frac(p), _frac(a))


def power_half(p) -> CostFunction:
    """omega(k) = (k + 1/2)^p."""
    return CostFunction(POWER_HALF, _frac(p))


def power_one(p) -> CostFunction:
    """omega(k) = (k + 1)^p."""
    return CostFunction(POWER_ONE, _frac(p))


def pure_power(p) -> CostFunction:
    """omega(k) = k^p for k >= 1 and omega(0) = 0 (proper-embedding variant)."""
    return CostFunction(PURE_POWER, _frac(p), eta=float("inf"))


def log_shift() -> CostFunction:
    """omega(k) = ln(k+1); the logarithmic-cost case (exponent ignored)."""
    return CostFunction(LOG_SHIFT, Fraction(0))


def with_p(cf: CostFunction, p) -> CostFunction:
    """Same family and parameters at a different exponent."""
    return CostFunction(cf.family, _frac(p), cf.a, cf.eta)


# ---------------------------------------------------------------------------
# evaluation


def _on_pole_lattice(x: Fraction) -> bool:
    return x.denominator == 1 and x <= 0


def _gamma_ratio_args(cf: CostFunction, k: int) -> tuple[list, list]:
    """Exact gamma arguments (Fractions) of the ratio families at k."""
    if cf.family == GAMMA_RATIO:
        return [k + cf.p + cf.a], [k + Fraction(cf.a)]
    return (
        [k + cf.p + cf.a - Fraction(3, 2), Fraction(k + 2)],
        [k + Fraction(cf.a), k + Fraction(1, 2)],
    )


def evaluate(cf: CostFunction, k: int, bits: int | None = None) -> mp.mpf:
    """omega_p(k) at working precision."""
    if k < 0:
        raise DomainError(f"cost argument must be >= 0, got {k}")
    with _work(bits):
        p = real(cf.p, bits)
        if cf.family in (GAMMA_RATIO, GAMMA_RATIO_32):
            num, den = _gamma_ratio_args(cf, k)
            if any(_on_pole_lattice(x) for x in num) and not any(
                _on_pole_lattice(x) for x in den
            ):
                raise PoleError(f"{cf.describe()} hits a gamma pole at k = {k}")
            return numerics.gamma_quotient(
                [real(x, bits) for x in num], [real(x, bits) for x in den], bits
            )
        if cf.family == POWER_HALF:
            return (k + mp.mpf(0.5)) ** p
        if cf.family == POWER_ONE:
            return mp.mpf(k + 1) ** p
        if cf.family == PURE_POWER:
            return mp.mpf(0) if k == 0 else mp.mpf(k) ** p
        return mp.log(k + 1)


def evaluate_exact(cf: CostFunction, k: int) -> Fraction | None:
    """Exact rational omega value when the family admits one, else None."""
    if k < 0:
        raise DomainError(f"cost argument must be >= 0, got {k}")
    p = cf.p
    if cf.family == GAMMA_RATIO and p.denominator == 1 and p >= 0:
        # Gamma(x+p)/Gamma(x) = prod_{i=0}^{p-1} (x+i), rational for rational x
        out = Fraction(1)
        for i in range(p.numerator):
            out *= k + cf.a + i
        return out
    if cf.family == POWER_HALF and p.denominator == 1:
        return (k + Fraction(1, 2)) ** p.numerator
    if cf.family == POWER_ONE and p.denominator == 1:
        return Fraction(k + 1) ** p.numerator
    if cf.family == PURE_POWER and p.denominator == 1:
        return Fraction(0) if k == 0 else Fraction(k) ** p.numerator
    return None


def value_stream(cf: CostFunction, n_max: int, bits: int | None = None):
    """omega(0..n_max-1) as mpf, using multiplicative recurrences where exact."""
    with _work(bits):
        p = real(cf.p, bits)
        out = []
        if cf.family in (GAMMA_RATIO, GAMMA_RATIO_32):
            a = real(cf.a, bits)
            w = evaluate(cf, 0, bits)
            off = p + a - mp.mpf(1.5) if cf.family == GAMMA_RATIO_32 else None
            for k in range(n_max):
                out.append(w)
                if cf.family == GAMMA_RATIO:
                    w = w * (k + p + a) / (k + a)
                else:
                    w = w * (k + off) * (k + 2) / ((k + a) * (k + mp.mpf(0.5)))
        else:
            for k in range(n_max):
                out.append(evaluate(cf, k, bits))
        return out


# ---------------------------------------------------------------------------
# alpha


@dataclass(frozen=True)
class AlphaResult:
    value: mp.mpf
    method: str  # "closed_form" | "regularized_series"
    estimated_error: mp.mpf


def alpha_closed_form(cf: CostFunction, bits: int | None = None) -> AlphaResult:
    """Closed-form alpha for the gamma-ratio families.

    Raises NoClosedForm for the power/log families and PoleError where the
    family's alpha genuinely diverges (p = 1/2 always; additionally the
    half-odd p >= 3/2 lattice for gamma_ratio with a != 1/2).
    """
    if cf.family not in (GAMMA_RATIO, GAMMA_RATIO_32):
        raise NoClosedForm(f"{cf.family} has no closed-form alpha; use alpha_numeric")
    if cf.p == Fraction(1, 2):
        raise PoleError("alpha has a simple pole at p = 1/2")
    p, a = cf.p, cf.a
    half = Fraction(1, 2)

    def rv(fracs):
        return [real(x, bits) for x in fracs]

    with _work(bits, guard=20):
        if cf.family == GAMMA_RATIO:
            if a == half:
                # exact family identity, valid through half-odd p
                value = -numerics.gamma(real(p - half, bits), bits) / (
                    2 * constants(bits).sqrt_pi
                )
            else:
                t1 = numerics.gamma_quotient(rv([a + p - 1]), rv([a - 1]), bits)
                t2 = numerics.gamma_quotient(
                    rv([a + p - 1, half - p]), rv([a - half, -p]), bits
                )
                value = t1 - t2
        else:
            value = numerics.gamma_quotient(
                rv([a + p - 3 * half]), rv([half, a - 1]), bits
            ) / real(1 - 2 * p, bits)
        return AlphaResult(+value, "closed_form", mp.mpf(0))


def _ref_alpha(q: mp.mpf, bits: int) -> mp.mpf:
    return -numerics.gamma(q - mp.mpf(0.5), bits) / (2 * constants(bits).sqrt_pi)


def _ref_stream(q: mp.mpf, n_max: int) -> list:
    w = mp.gammaprod([q + mp.mpf(0.5)], [mp.mpf(0.5)])
    out = []
    for k in range(n_max):
        out.append(w)
        w = w * (k + q + mp.mpf(0.5)) / (k + mp.mpf(0.5))
    return out


def _peel_ladder(cf: CostFunction, p: mp.mpf, depth: int, bits: int) -> list:
    """Match omega(k) ~ sum_j lambda_j r_{p-j}(k) at k -> infinity.

    The lambdas come from Neville extrapolation of residual ratios at huge k,
    where every registry family has an integer-spaced 1/k expansion.
    """
    exps = range(118, 130, 2)
    nodes = [mp.mpf(2) ** e for e in exps]

    def omega_big(k):
        a = real(cf.a, bits) if cf.a is not None else None
        if cf.family == GAMMA_RATIO:
            return mp.gammaprod([k + p + a], [k + a])
        if cf.family == GAMMA_RATIO_32:
            return mp.gammaprod([k + p + a - mp.mpf(1.5), k + 2], [k + a, k + mp.mpf(0.5)])
        if cf.family == POWER_HALF:
            return (k + mp.mpf(0.5)) ** p
        if cf.family == POWER_ONE:
            return (k + 1) ** p
        return k**p

    lambdas = []
    residual = omega_big
    for j in range(depth + 1):
        q = p - j

        def ref(k, q=q):
            return mp.gammaprod([k + q + mp.mpf(0.5)], [k + mp.mpf(0.5)])

        xs = [1 / k for k in nodes]
        tab = [residual(k) / ref(k) for k in nodes]
        n = len(tab)
        for m in range(1, n):
            for i in range(n - m):
                tab[i] = tab[i + 1] + (tab[i + 1] - tab[i]) * xs[i + m] / (xs[i] - xs[i + m])
        lam = tab[0]
        lambdas.append(lam)
        residual = (lambda k, prev=residual, lam=lam, ref=ref: prev(k) - lam * ref(k))
    return lambdas


def _tail_complete(tail_n, tail_d, g: mp.mpf, K: int):
    """Least-squares fit d_N ~ A N^-g + B N^-(g+1) and sum the tail exactly."""
    rows = [(mp.mpf(n) ** (-g), mp.mpf(n) ** (-g - 1)) for n in tail_n]
    a00 = mp.fsum(r[0] * r[0] for r in rows)
    a01 = mp.fsum(r[0] * r[1] for r in rows)
    a11 = mp.fsum(r[1] * r[1] for r in rows)
    b0 = mp.fsum(r[0] * d for r, d in zip(rows, tail_d))
    b1 = mp.fsum(r[1] * d for r, d in zip(rows, tail_d))
    det = a00 * a11 - a01 * a01
    if det == 0:
        return mp.mpf(0), abs(tail_d[-1]) * K
    A = (b0 * a11 - b1 * a01) / det
    B = (a00 * b1 - a01 * b0) / det
    tail = A * mp.zeta(g, K + 1) + B * mp.zeta(g + 1, K + 1)
    # error gauge: the next omitted correction order
    err = abs(B) * mp.zeta(g + 1, K + 1) / max(K, 2)
    return tail, err


def _alpha_ladder_once(cf: CostFunction, p: mp.mpf, tol: mp.mpf, bits: int) -> tuple:
    sq = constants(bits).sqrt_pi
    depth = max(0, int(mp.floor(p)))
    lambdas = _peel_ladder(cf, p, depth, bits)

    s_ref = mp.mpf(0)
    for j, lam in enumerate(lambdas):
        s_ref += lam * _ref_alpha(p - j, bits)

    g = depth + mp.mpf(2.5) - p  # known decay exponent of the summand
    K = 4096
    max_K = 1 << 20
    while True:
        refs = [_ref_stream(p - j, K + 1) for j in range(depth + 1)]
        cN = mp.mpf(0.5)
        s_num = mp.mpf(0)
        tail_n, tail_d = [], []
        omegas = value_stream(cf, K + 1, bits)
        for N in range(K + 1):
            w = omegas[N]
            for lam, r in zip(lambdas, refs):
                w -= lam * r[N]
            d = cN * w
            s_num += d
            if N >= K - 16:
                tail_n.append(N)
                tail_d.append(d)
            cN = cN * (N + mp.mpf(0.5)) / (N + 2)
        tail, err = _tail_complete(tail_n, tail_d, g, K)
        value = s_ref + s_num + tail
        if err <= tol * max(abs(value), mp.mpf(1)) or K >= max_K:
            if err > tol * max(abs(value), mp.mpf(1)):
                raise ConvergenceError(
                    f"alpha tail bound stalled at {mp.nstr(err, 3)} with {K} terms"
                )
            return value, err
        K *= 4


def _alpha_log_case(tol: mp.mpf, bits: int) -> tuple:
    """alpha for omega(k) = ln(k+1) via the exact digamma reference:

    sum_N c_N psi(N+1/2) = 2 - gamma_E - 2 ln 2   (q-derivative of the ladder at q=0),
    leaving sum_N c_N [ln(N+1) - psi(N+1/2)] with N^-5/2 terms.
    """
    cs = constants(bits)
    base = 2 - cs.euler_gamma - 2 * cs.ln2
    K = 32768
    max_K = 1 << 21
    g = mp.mpf(2.5)
    while True:
        cN = mp.mpf(0.5)
        psi = -cs.euler_gamma - 2 * cs.ln2  # psi(1/2)
        s_num = mp.mpf(0)
        tail_n, tail_d = [], []
        for N in range(K + 1):
            if N > 0:
                psi += 2 / mp.mpf(2 * N - 1)
            d = cN * (mp.log(N + 1) - psi)
            s_num += d
            if N >= K - 16:
                tail_n.append(N)
                tail_d.append(d)
            cN = cN * (N + mp.mpf(0.5)) / (N + 2)
        tail, err = _tail_complete(tail_n, tail_d, g, K)
        value = base + s_num + tail
        if err <= tol * max(abs(value), mp.mpf(1)) or K >= max_K:
            if err > tol * max(abs(value), mp.mpf(1)):
                raise ConvergenceError("log-case alpha tail stalled")
            return value, err
        K *= 4


_HALF_ODD_WINDOW = mp.mpf("1e-6")


def alpha_numeric(cf: CostFunction, tol=None, bits: int | None = None) -> AlphaResult:
    """Regularized-series alpha for any registry family.

    Works for every p != 1/2 where alpha is finite; raises PoleError when the
    family's alpha diverges (detected through the symmetric p +- h probe at
    the half-odd lattice).
    """
    bits = bits or numerics.working_precision()
    with _work(bits, guard=64):
        # the fitted two-term tail completion reliably reaches ~1e-12..1e-16;
        # tighter targets escalate the term count fast, so the default stays
        # modest and the achieved bound is reported as estimated_error
        tolv = mp.mpf(tol) if tol is not None else mp.mpf("1e-12")
        if cf.family == LOG_SHIFT:
            value, err = _alpha_log_case(tolv, bits)
            return AlphaResult(+value, "regularized_series", +err)

        p = real(cf.p, bits)
        if abs(p - mp.mpf(0.5)) < mp.mpf("1e-9"):
            raise PoleError("alpha has a simple pole at p = 1/2")

        pstar = mp.floor(p - mp.mpf(0.5)) + mp.mpf(0.5)
        near = None
        for cand in (pstar, pstar + 1):
            if cand >= mp.mpf(1.5) and abs(p - cand) < _HALF_ODD_WINDOW:
                near = cand
        if near is None:
            value, err = _alpha_ladder_once(cf, p, tolv, bits)
            return AlphaResult(+value, "regularized_series", +err)

        # half-odd lattice: evaluate the family symmetrically about the
        # degenerate point (the probe pair shares the finite limit)
        h = _HALF_ODD_WINDOW
        near_q = Fraction(int(near - Fraction(1, 2))) + Fraction(1, 2)
        h_q = Fraction(1, 10**6)
        p_hi, p_lo = near_q + h_q, near_q - h_q
        vp, ep = _alpha_ladder_once(with_p(cf, p_hi), real(p_hi, bits), tolv, bits)
        vm, em = _alpha_ladder_once(with_p(cf, p_lo), real(p_lo, bits), tolv, bits)
        avg = (vp + vm) / 2
        spread = abs(vp - vm)
        if spread > (abs(avg) + 1) * mp.mpf("0.01"):
            raise PoleError(
                f"alpha of {cf.describe()} has a pole at p = {mp.nstr(near, 6)}"
            )
        err = ep + em + spread * h + h**2
        return AlphaResult(+avg, "regularized_series", +err)


def alpha(cf: CostFunction, tol=None, bits: int | None = None) -> AlphaResult:
    """Closed form when available, regularized series otherwise."""
    try:
        return alpha_closed_form(cf, bits)
    except NoClosedForm:
        return alpha_numeric(cf, tol, bits)
