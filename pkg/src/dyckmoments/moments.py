"""Moment recursions for the deformed-area limit laws.

The excursion coefficients satisfy the quadratic recursion

    mu_0 = -1/2,
    mu_s = mu_{s-1} Gamma(s(p+1/2)-1) / (2 Gamma(s(p+1/2)-p-1))
           + sum_{k=1}^{s-1} mu_k mu_{s-k},

the bridge coefficients mu^B_s = 2 sum_{k=0}^{s-1} mu^B_k mu^E_{s-k}, and the
rescaled limit moments follow by the gamma prefactors.  At integer p every
gamma ratio in the recursion is rational and the module runs in exact
arithmetic; at p = 1 the excursion recursion reduces to the classical
area-moment recursion (takacs_K).  p = 1/2 is a simple pole of everything;
limit_half_moments reaches it by canonical shifting and extrapolation in
the offset delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import numerics
from .errors import (
    BoundViolation,
    DomainError,
    ExtrapolationUnstable,
    HalfPointError,
)
from .numerics import _work, catalan, constants, double_factorial, real

EXCURSION = "excursion"
BRIDGE = "bridge"


def _check_half(p) -> None:
    if _is_half(p):
        raise HalfPointError(
            "moment recursions are singular at p = 1/2; use limit_half_moments"
        )


def _is_half(p) -> bool:
    if isinstance(p, (int, Fraction)):
        return Fraction(p) == Fraction(1, 2)
    return mp.mpf(p) == mp.mpf(0.5)


def _rational_mode(p) -> bool:
    return isinstance(p, (int, Fraction)) and Fraction(p).denominator == 1 and Fraction(p) >= 1


def _gamma_ratio_drop(x, p_int: int) -> Fraction:
    """Gamma(x)/Gamma(x-p) = prod_{i=1}^{p} (x-i) for integer p >= 0."""
    out = Fraction(1)
    for i in range(1, p_int + 1):
        out *= x - i
    return out


def mu_excursion(p, s_max: int, bits: int | None = None) -> list:
    """mu^(E)_0..s_max; exact Fractions at integer p >= 1, else mpf."""
    if s_max < 0:
        raise DomainError("s_max must be >= 0")
    _check_half(p)
    if _rational_mode(p):
        pi = int(Fraction(p))
        mu = [Fraction(-1, 2)]
        for s in range(1, s_max + 1):
            x = Fraction(s * (2 * pi + 1), 2) - 1
            coef = _gamma_ratio_drop(x, pi) / 2
            mu.append(mu[s - 1] * coef + sum(mu[k] * mu[s - k] for k in range(1, s)))
        return mu
    with _work(bits):
        pv = real(p, bits)
        if pv <= 0:
            raise DomainError("mu recursion needs p > 0")
        mu = [mp.mpf(-0.5)]
        for s in range(1, s_max + 1):
            x = s * (pv + mp.mpf(0.5))
            coef = numerics.gamma_quotient([x - 1], [x - 1 - pv], bits) / 2
            mu.append(mu[s - 1] * coef + mp.fsum(mu[k] * mu[s - k] for k in range(1, s)))
        return mu


def mu_bridge(p, s_max: int, bits: int | None = None, mu_exc: list | None = None) -> list:
    """mu^(B)_0..s_max: mu^B_s = 2 sum_{k<s} mu^B_k mu^E_{s-k}."""
    if s_max < 0:
        raise DomainError("s_max must be >= 0")
    _check_half(p)
    mu_e = mu_exc if mu_exc is not None else mu_excursion(p, s_max, bits)
    if isinstance(mu_e[0], Fraction):
        mu_b = [Fraction(1)]
        for s in range(1, s_max + 1):
            mu_b.append(2 * sum(mu_b[k] * mu_e[s - k] for k in range(s)))
        return mu_b
    with _work(bits):
        mu_b = [mp.mpf(1)]
        for s in range(1, s_max + 1):
            mu_b.append(2 * mp.fsum(mu_b[k] * mu_e[s - k] for k in range(s)))
        return mu_b


def rescaled_moments(ensemble: str, p, s_max: int, bits: int | None = None) -> list:
    """Limit moments of the rescaled statistic; M_0 = 1 in both ensembles.

    excursion: M_s = 4 sqrt(pi) s! / Gamma((p+1/2)s - 1/2) mu^E_s
    bridge:    M_s =   sqrt(pi) s! / Gamma((p+1/2)s + 1/2) mu^B_s
    """
    _check_half(p)
    with _work(bits):
        pv = real(p, bits)
        sq = constants(bits).sqrt_pi
        if ensemble == EXCURSION:
            mu = mu_excursion(p, s_max, bits)
            out = [mp.mpf(1)]
            for s in range(1, s_max + 1):
                pref = 4 * sq * mp.factorial(s) / numerics.gamma(
                    (pv + mp.mpf(0.5)) * s - mp.mpf(0.5), bits
                )
                out.append(pref * real(mu[s], bits))
            return out
        if ensemble == BRIDGE:
            mu = mu_bridge(p, s_max, bits)
            out = [mp.mpf(1)]
            for s in range(1, s_max + 1):
                pref = sq * mp.factorial(s) / numerics.gamma(
                    (pv + mp.mpf(0.5)) * s + mp.mpf(0.5), bits
                )
                out.append(pref * real(mu[s], bits))
            return out
        raise DomainError(f"unknown ensemble {ensemble!r}")


def canonical_shift(p, bits: int | None = None) -> mp.mpf:
    """t(p) = Gamma(p-1/2)/(2 Gamma(p)): makes the first shifted moment vanish."""
    _check_half(p)
    with _work(bits):
        pv = real(p, bits)
        return numerics.gamma_quotient([pv - mp.mpf(0.5)], [pv], bits) / 2


def shifted_moments(p, s_max: int, t, bits: int | None = None,
                    rescaled: list | None = None, ensemble: str = EXCURSION) -> list:
    """<(x - t)^s> = sum_j binom(s,j) (-t)^(s-j) M_j for s = 0..s_max.

    Precision escalates automatically when the binomial transform cancels
    more bits than the working precision covers.
    """
    bits0 = bits or numerics.working_precision()
    attempt_bits = bits0
    for _ in range(5):
        with _work(attempt_bits):
            M = rescaled if (rescaled is not None and attempt_bits == bits0) else \
                rescaled_moments(ensemble, p, s_max, attempt_bits)
            tv = real(t, attempt_bits)
            out = []
            worst = mp.mpf(0)
            for s in range(s_max + 1):
                terms = [mp.binomial(s, j) * (-tv) ** (s - j) * M[j] for j in range(s + 1)]
                val = mp.fsum(terms)
                out.append(val)
                if s >= 2:
                    scale = mp.fsum(abs(x) for x in terms)
                    if scale > 0:
                        worst = max(worst, scale / max(abs(val), scale * mp.mpf(2) ** (-attempt_bits + 60)))
            # require ~60 guard bits beyond the cancellation depth
            if worst == 0 or mp.log(worst, 2) + 60 <= attempt_bits:
                with _work(bits0):
                    return [+v for v in out]
        attempt_bits *= 2
    raise ExtrapolationUnstable("shifted moments kept cancelling past the precision cap")


@dataclass(frozen=True)
class MomentTable:
    """Moments of one ensemble at one exponent, with the canonical shift."""

    ensemble: str
    p: object
    s_max: int
    mu: list
    rescaled: list
    shift_t: mp.mpf
    shifted: list
    bits: int


def build_moment_table(ensemble: str, p, s_max: int, bits: int | None = None,
                       shift: object = "canonical") -> MomentTable:
    bits = bits or numerics.working_precision()
    mu = mu_excursion(p, s_max, bits) if ensemble == EXCURSION else mu_bridge(p, s_max, bits)
    resc = rescaled_moments(ensemble, p, s_max, bits)
    if shift == "canonical":
        t = canonical_shift(p, bits)
    elif shift == "none":
        t = mp.mpf(0)
    else:
        t = real(shift, bits)
    shifted = shifted_moments(p, s_max, t, bits, rescaled=resc, ensemble=ensemble)
    return MomentTable(ensemble, p, s_max, mu, resc, t, shifted, bits)


# ---------------------------------------------------------------------------
# classical p=1 reference recursion


def takacs_K(s_max: int) -> list[Fraction]:
    """K_0 = -1/2; K_s = (3s-4)/4 K_{s-1} + sum_{j=1}^{s-1} K_j K_{s-j}."""
    if s_max < 0:
        raise DomainError("s_max must be >= 0")
    K = [Fraction(-1, 2)]
    for s in range(1, s_max + 1):
        K.append(Fraction(3 * s - 4, 4) * K[s - 1] + sum(K[j] * K[s - j] for j in range(1, s)))
    return K


def airy_moment(s: int, bits: int | None = None) -> mp.mpf:
    """s-th moment of the area law of the standard excursion:

    M^Ai_s = sqrt(pi) 2^((4-s)/2) Gamma(s+1)/Gamma((3s-1)/2) K_s.
    """
    if s < 0:
        raise DomainError("s must be >= 0")
    K = takacs_K(s)[s]
    with _work(bits):
        sq = constants(bits).sqrt_pi
        pref = sq * mp.mpf(2) ** (mp.mpf(4 - s) / 2) * mp.factorial(s)
        return pref / numerics.gamma(Fraction(3 * s - 1, 2), bits) * real(K, bits)


# ---------------------------------------------------------------------------
# growth bounds (uniqueness suite)


@dataclass(frozen=True)
class BoundConstants:
    f_p: mp.mpf
    A_p: mp.mpf
    R_p: mp.mpf


def bound_constants(p, bits: int | None = None) -> BoundConstants:
    """f(p) = |Gamma(p-1/2)|/(8 sqrt(pi) Gamma(p+1)) and an admissible (A, R).

    (A, R) = (1/2, 1/2) when f <= 1/4, else (2f, 1/2).  The pair satisfies
    the three admissibility conditions of the growth-bound induction:
    RA >= f (order one), 1/(4A) + R <= 1 (excursion step), and 2R <= 1
    (bridge step, which also forces A >= 2f through the tight order-one
    bridge case).
    """
    _check_half(p)
    with _work(bits):
        pv = real(p, bits)
        f = abs(numerics.gamma(pv - mp.mpf(0.5), bits)) / (
            8 * constants(bits).sqrt_pi * numerics.gamma(pv + 1, bits)
        )
        A = max(mp.mpf(0.5), 2 * f)
        R = mp.mpf(0.5)
        return BoundConstants(+f, +A, +R)


@dataclass(frozen=True)
class BoundReport:
    p: object
    s_max: int
    constants: BoundConstants
    excursion_margins: list  # bound_s / |mu_s|, s = 1..s_max
    bridge_margins: list  # s = 0..s_max
    ok: bool


def verify_bounds(p, s_max: int, bits: int | None = None, strict: bool = True) -> BoundReport:
    """Check |mu^E_s| <= R A^s Gamma(ps+1) C_{s-1} and the bridge analogue."""
    bc = bound_constants(p, bits)
    bits = bits or numerics.working_precision()
    with _work(bits):
        pv = real(p, bits)
        mu_e = [real(v, bits) for v in mu_excursion(p, s_max, bits)]
        mu_b = [real(v, bits) for v in mu_bridge(p, s_max, bits)]
        exc_margins = []
        for s in range(1, s_max + 1):
            bound = bc.R_p * bc.A_p**s * numerics.gamma(pv * s + 1, bits) * real(catalan(s - 1), bits)
            exc_margins.append(bound / abs(mu_e[s]))
        br_margins = []
        for s in range(s_max + 1):
            bound = bc.A_p**s * numerics.gamma(pv * s + 1, bits) * real(catalan(s), bits)
            br_margins.append(bound / abs(mu_b[s]))
        # several cases are exactly tight; allow rounding-level slack
        floor = 1 - mp.mpf(2) ** (-(bits // 2))
        ok = all(m >= floor for m in exc_margins) and all(m >= floor for m in br_margins)
        if strict and not ok:
            raise BoundViolation(f"moment bound violated at p = {p}")
        return BoundReport(p, s_max, bc, exc_margins, br_margins, ok)


# ---------------------------------------------------------------------------
# p -> 1/2 limit


def limit_half_moments(s_max: int, deltas=None, bits: int | None = None,
                       ensemble: str = EXCURSION) -> list:
    """(2 sqrt(pi))^s-scaled canonically shifted moments at p = 1/2.

    Evaluates at p = 1/2 +- delta over the ladder, averages the symmetric
    pair (killing odd orders in delta) and Richardson-extrapolates in
    delta^2.  Returns [(value, error_estimate)] for s = 0..s_max.
    """
    bits = bits or numerics.working_precision()
    if deltas is None:
        deltas = [mp.mpf("1e-2"), mp.mpf("1e-3"), mp.mpf("1e-4")]
    with _work(bits, guard=40):
        deltas = sorted((mp.mpf(d) for d in deltas), reverse=True)
        sq2 = 2 * constants(bits).sqrt_pi
        rows = []
        for d in deltas:
            vals = []
            for sgn in (1, -1):
                pv = mp.mpf(0.5) + sgn * d
                t = canonical_shift(pv, bits)
                vals.append(shifted_moments(pv, s_max, t, bits, ensemble=ensemble))
            rows.append([(a + b) / 2 for a, b in zip(*vals)])

        out = []
        for s in range(s_max + 1):
            xs = [d**2 for d in deltas]
            ys = [rows[i][s] * sq2**s for i in range(len(deltas))]
            tab = list(ys)
            n = len(tab)
            last_corr = None
            for m in range(1, n):
                corr = mp.mpf(0)
                for i in range(n - m):
                    new = tab[i + 1] + (tab[i + 1] - tab[i]) * xs[i + m] / (xs[i] - xs[i + m])
                    corr = max(corr, abs(new - tab[i + 1]))
                    tab[i] = new
                if last_corr is not None and corr > 10 * last_corr and corr > abs(tab[0]) * mp.mpf("1e-6"):
                    raise ExtrapolationUnstable(
                        f"delta ladder diverges at order s={s}"
                    )
                last_corr = corr
            err = last_corr if last_corr is not None else abs(ys[-1] - ys[0])
            out.append((+tab[0], +err))
        return out


# ---------------------------------------------------------------------------
# logarithmic cost case


def tau_log_coefficients(s_max: int) -> list[Fraction]:
    """r_l with tau_{2l} = r_l gamma_E^l, from the convolution recursion.

    r_1 = 1/4 and r_l = (1/2) sum_{j=1}^{l-1} r_j r_{l-j}; the closed form
    is r_l = C_{l-1} 2^(1-l) / 4^l.
    """
    lmax = s_max // 2
    r = [Fraction(0), Fraction(1, 4)]
    for l in range(2, lmax + 1):
        r.append(Fraction(1, 2) * sum(r[j] * r[l - j] for j in range(1, l)))
    return r[: lmax + 1]


def tau_log(s_max: int, bits: int | None = None) -> list:
    """tau_s for the logarithmic case: tau_2 = gamma_E/4, odd orders vanish,
    tau_{2l} = C_{l-1} 2^(1-l) tau_2^l."""
    if s_max < 2:
        raise DomainError("the log case needs s_max >= 2")
    with _work(bits):
        g = constants(bits).euler_gamma
        tau2 = g / 4
        out = [mp.mpf(0)] * (s_max + 1)
        for l in range(1, s_max // 2 + 1):
            out[2 * l] = real(catalan(l - 1), bits) * mp.mpf(2) ** (1 - l) * tau2**l
        return out


def gaussian_log_moments(s_max: int, bits: int | None = None) -> list:
    """Limit moments in the log case: gamma_E^l (2l-1)!! at order 2l, 0 odd."""
    with _work(bits):
        g = constants(bits).euler_gamma
        out = [mp.mpf(0)] * (s_max + 1)
        out[0] = mp.mpf(1)
        for l in range(1, s_max // 2 + 1):
            out[2 * l] = g**l * real(double_factorial(2 * l - 1), bits)
        return out
