from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from dyckmoments import costs
from dyckmoments.errors import DomainError, NoClosedForm, PoleError
from dyckmoments.numerics import constants

BITS = 256

ALL_FAMILIES = [
    costs.gamma_ratio(Fraction(3, 4), Fraction(1, 2)),
    costs.gamma_ratio(Fraction(3, 4), Fraction(1)),
    costs.gamma_ratio(Fraction(3, 4), Fraction(17, 10)),
    costs.gamma_ratio_32(Fraction(3, 4), Fraction(11, 5)),
    costs.power_half(Fraction(3, 4)),
    costs.power_one(Fraction(3, 4)),
    costs.pure_power(Fraction(3, 4)),
    costs.log_shift(),
]


class TestEvaluate:
    def test_gamma_ratio_half_at_p1_is_k_plus_half(self):
        cf = costs.gamma_ratio(1, Fraction(1, 2))
        for k in range(20):
            assert costs.evaluate_exact(cf, k) == Fraction(2 * k + 1, 2)
            with mp.workprec(300):
                assert abs(costs.evaluate(cf, k, BITS) - (k + mp.mpf(0.5))) < mp.mpf(2) ** -240

    def test_power_one_at_zero(self):
        for p in (Fraction(1, 4), Fraction(1), Fraction(5, 2)):
            assert costs.evaluate(costs.power_one(p), 0) == 1

    def test_gamma_ratio_32_reduces_to_half_family(self):
        # a = 2 reproduces omega^(1/2) pointwise
        for p in (Fraction(3, 10), Fraction(3, 4), Fraction(2)):
            f32 = costs.gamma_ratio_32(p, Fraction(2))
            f12 = costs.gamma_ratio(p, Fraction(1, 2))
            with mp.workprec(300):
                for k in range(12):
                    a = costs.evaluate(f32, k, BITS)
                    b = costs.evaluate(f12, k, BITS)
                    assert abs(a - b) < abs(b) * mp.mpf(2) ** -240

    def test_gamma_pole_raises(self):
        # k + p + a - 3/2 hits zero at k = 1 for p = 0.1, a = 0.4
        cf = costs.gamma_ratio_32(Fraction(1, 10), Fraction(2, 5))
        with pytest.raises(PoleError):
            costs.evaluate(cf, 1)

    def test_positivity(self):
        # omega(0) = 0 by design for pure_power (0^p) and log_shift (ln 1)
        for cf in ALL_FAMILIES:
            start = 1 if cf.family in (costs.PURE_POWER, costs.LOG_SHIFT) else 0
            for k in range(start, 200, 13):
                assert costs.evaluate(cf, k) > 0
        assert costs.evaluate(costs.pure_power(Fraction(3, 4)), 0) == 0
        assert costs.evaluate(costs.log_shift(), 0) == 0

    def test_value_stream_matches_evaluate(self):
        for cf in ALL_FAMILIES:
            stream = costs.value_stream(cf, 40, BITS)
            with mp.workprec(300):
                for k in range(40):
                    direct = costs.evaluate(cf, k, BITS)
                    scale = max(abs(direct), mp.mpf(1))
                    assert abs(stream[k] - direct) < scale * mp.mpf(2) ** -230

    def test_constructor_validation(self):
        with pytest.raises(DomainError):
            costs.gamma_ratio(1, Fraction(-1, 2))
        with pytest.raises(DomainError):
            costs.CostFunction("nonsense", Fraction(1))


class TestEta:
    @pytest.mark.parametrize("cf", [f for f in ALL_FAMILIES
                                    if f.family not in (costs.PURE_POWER, costs.LOG_SHIFT)])
    def test_declared_decay_exponent(self, cf):
        # |omega(k)/k^p - 1| ~ k^-eta with eta = 1 for every power-type family
        with mp.workprec(128):
            ks = [2 ** e for e in range(4, 21, 2)]
            p = mp.mpf(cf.p.numerator) / cf.p.denominator
            devs = [abs(costs.evaluate(cf, k, 128) / mp.mpf(k) ** p - 1) for k in ks]
            slope = np.polyfit(np.log(ks), [float(mp.log(d)) for d in devs], 1)[0]
        assert abs(-slope - cf.eta) < 0.2 * cf.eta


class TestAlphaClosedForm:
    def test_half_family_at_p1(self):
        cf = costs.gamma_ratio(1, Fraction(1, 2))
        res = costs.alpha_closed_form(cf, BITS)
        assert res.method == "closed_form"
        with mp.workprec(300):
            assert abs(res.value + mp.mpf(0.5)) < mp.mpf(2) ** -240

    def test_generic_a_reduces_to_half_family(self):
        # the general-a formula approaches the dedicated a = 1/2 value
        p = Fraction(3, 4)
        target = costs.alpha_closed_form(costs.gamma_ratio(p, Fraction(1, 2)), BITS).value
        with mp.workprec(300):
            for eps in (mp.mpf("1e-8"), mp.mpf("1e-10")):
                a = Fraction(1, 2) + Fraction(mp.nstr(eps, 2))
                got = costs.alpha_closed_form(costs.gamma_ratio(p, a), BITS).value
                assert abs(got - target) < abs(target) * 1e-6

    def test_gamma_ratio_32_identity(self):
        # omega^(2,-3/2) = omega^(1/2) so the alphas agree identically
        for p in (Fraction(3, 10), Fraction(3, 4), Fraction(5, 2)):
            a1 = costs.alpha_closed_form(costs.gamma_ratio_32(p, Fraction(2)), BITS).value
            a2 = costs.alpha_closed_form(costs.gamma_ratio(p, Fraction(1, 2)), BITS).value
            with mp.workprec(300):
                assert abs(a1 - a2) < abs(a2) * mp.mpf(2) ** -230

    def test_pole_at_half(self):
        with pytest.raises(PoleError):
            costs.alpha_closed_form(costs.gamma_ratio(Fraction(1, 2), Fraction(1, 2)))

    def test_pole_at_half_odd_for_a_not_half(self):
        for a in (Fraction(1), Fraction(17, 10)):
            for p in (Fraction(3, 2), Fraction(5, 2)):
                with pytest.raises(PoleError):
                    costs.alpha_closed_form(costs.gamma_ratio(p, a))

    def test_half_family_finite_at_half_odd(self):
        got = costs.alpha_closed_form(costs.gamma_ratio(Fraction(5, 2), Fraction(1, 2)), BITS).value
        with mp.workprec(300):
            expect = -mp.gamma(2) / (2 * mp.sqrt(mp.pi))
            assert abs(got - expect) < abs(expect) * mp.mpf(2) ** -230

    def test_no_closed_form(self):
        for cf in (costs.power_half(1), costs.power_one(1), costs.pure_power(1), costs.log_shift()):
            with pytest.raises(NoClosedForm):
                costs.alpha_closed_form(cf)


# regression constants computed by the regularized series at two precisions
FROZEN_ALPHAS = {
    ("power_half", "1/4"): "1.474167676945656324167931",
    ("power_one", "1/4"): "1.574116135084112094833941",
    ("pure_power", "1/4"): "1.029257073596273757944589",
    ("log_shift", "0"): "1.158087842901884225858035",
}


class TestAlphaNumeric:
    @pytest.mark.parametrize("p", [Fraction(3, 10), Fraction(1)])
    def test_matches_closed_form(self, p):
        for build in (lambda q: costs.gamma_ratio(q, Fraction(1, 2)),
                      lambda q: costs.gamma_ratio_32(q, Fraction(11, 5))):
            cf = build(p)
            closed = costs.alpha_closed_form(cf, BITS).value
            numeric = costs.alpha_numeric(cf, mp.mpf("1e-12"), BITS)
            with mp.workprec(300):
                scale = max(abs(closed), mp.mpf(1))
                assert abs(numeric.value - closed) < scale * mp.mpf("1e-10")
            assert numeric.method == "regularized_series"
            assert numeric.estimated_error >= 0

    def test_half_odd_p_via_symmetric_probe(self):
        cf = costs.gamma_ratio_32(Fraction(3, 2), Fraction(11, 5))
        closed = costs.alpha_closed_form(cf, BITS).value
        numeric = costs.alpha_numeric(cf, mp.mpf("1e-12"), BITS).value
        with mp.workprec(300):
            assert abs(numeric - closed) < abs(closed) * mp.mpf("1e-10")

    def test_half_odd_pole_detected(self):
        with pytest.raises(PoleError):
            costs.alpha_numeric(costs.gamma_ratio(Fraction(3, 2), Fraction(1)), bits=192)

    def test_pole_at_half(self):
        with pytest.raises(PoleError):
            costs.alpha_numeric(costs.power_half(Fraction(1, 2)))

    @pytest.mark.parametrize("key,digits", sorted(FROZEN_ALPHAS.items()))
    def test_frozen_regressions(self, key, digits):
        family, p = key
        cf = {
            "power_half": lambda: costs.power_half(Fraction(p)),
            "power_one": lambda: costs.power_one(Fraction(p)),
            "pure_power": lambda: costs.pure_power(Fraction(p)),
            "log_shift": lambda: costs.log_shift(),
        }[family]()
        got = costs.alpha_numeric(cf, mp.mpf("1e-15"), BITS).value
        with mp.workprec(300):
            assert abs(got - mp.mpf(digits)) < mp.mpf("2e-14")

    def test_two_precisions_agree(self):
        cf = costs.power_half(1)
        a192 = costs.alpha_numeric(cf, mp.mpf("1e-12"), 192).value
        a256 = costs.alpha_numeric(cf, mp.mpf("1e-12"), 256).value
        with mp.workprec(300):
            assert abs(a192 - a256) < mp.mpf("1e-14")
            # this family at p = 1 coincides with gamma_ratio(1/2): alpha = -1/2
            assert abs(a256 + mp.mpf(0.5)) < mp.mpf("1e-20")

    def test_small_p_plain_sum_limit(self):
        # below p = 1/2 the singular term vanishes at z = 1, so plain partial
        # sums of c_N omega(N) approach alpha from below at rate K^(p-1/2)
        cf = costs.gamma_ratio(Fraction(1, 10), Fraction(1, 2))
        alpha = costs.alpha_closed_form(cf, BITS).value
        with mp.workprec(280):
            c = mp.mpf(0.5)
            total = mp.mpf(0)
            gaps = {}
            stream = costs.value_stream(cf, 100001, BITS)
            for n in range(100001):
                total += c * stream[n]
                if n in (1000, 10000, 100000):
                    gaps[n] = abs(total - alpha)
                c = c * (n + mp.mpf(0.5)) / (n + 2)
            assert gaps[100000] < gaps[10000] < gaps[1000]
            assert gaps[100000] < mp.mpf("0.05")


class TestResidueAtHalf:
    def test_universal_residue(self):
        # (p - 1/2) alpha -> -1/(2 sqrt(pi)) from both sides
        t_star = 1 / (2 * constants(BITS).sqrt_pi)
        builders = [
            lambda p: costs.gamma_ratio(p, Fraction(1, 2)),
            lambda p: costs.gamma_ratio(p, Fraction(1)),
            lambda p: costs.gamma_ratio(p, Fraction(17, 10)),
            lambda p: costs.gamma_ratio_32(p, Fraction(11, 5)),
        ]
        with mp.workprec(300):
            for build in builders:
                for delta in (Fraction(1, 1000), Fraction(-1, 1000),
                              Fraction(1, 10000), Fraction(-1, 10000)):
                    p = Fraction(1, 2) + delta
                    val = costs.alpha_closed_form(build(p), BITS).value
                    resid = (mp.mpf(delta.numerator) / delta.denominator) * val
                    assert abs(resid + t_star) < 50 * abs(mp.mpf(delta.numerator) / delta.denominator)
