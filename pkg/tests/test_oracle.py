import csv
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from dyckmoments import costs, oracle
from dyckmoments.errors import CapExceeded, DomainError, MalformedPath
from dyckmoments.oracle import (
    BRIDGE,
    EXCURSION,
    LatticePath,
    brute_force_moments,
    enumerate_paths,
    exact_moment_dp,
    path_to_tree_hooks,
    rescaled_convergence,
    slice_semilengths,
    statistic,
    statistic_exact,
)

HALF_COST = costs.gamma_ratio(1, Fraction(1, 2))  # omega(k) = k + 1/2
SQUARE_COST = costs.power_one(2)  # omega(k) = (k+1)^2


def exc(*steps):
    return LatticePath(tuple(steps), EXCURSION)


def bri(*steps):
    return LatticePath(tuple(steps), BRIDGE)


class TestLatticePath:
    def test_validation(self):
        with pytest.raises(MalformedPath):
            exc(1, -1, -1, 1)  # dips below zero
        with pytest.raises(MalformedPath):
            bri(1, 1)  # does not return to zero
        with pytest.raises(MalformedPath):
            exc(1, -1, 1)  # odd length
        with pytest.raises(MalformedPath):
            LatticePath((1, 0), EXCURSION)

    def test_midpoint_area(self):
        assert exc(1, 1, -1, -1).midpoint_area() == 4
        assert bri(-1, 1).midpoint_area() == 1


class TestSlices:
    def test_single_pair(self):
        assert slice_semilengths(exc(1, -1)).semilengths == (0,)

    def test_nested(self):
        assert slice_semilengths(exc(1, 1, -1, -1)).semilengths == (0, 1)

    def test_disjoint(self):
        assert slice_semilengths(exc(1, -1, 1, -1)).semilengths == (0, 0)

    def test_bridge_below_axis(self):
        assert slice_semilengths(bri(-1, 1)).semilengths == (0,)
        assert slice_semilengths(bri(-1, -1, 1, 1)).semilengths == (0, 1)
        assert slice_semilengths(bri(1, -1, -1, 1)).semilengths == (0, 0)

    def test_count_is_size(self):
        for N in range(1, 7):
            for path in enumerate_paths(N, BRIDGE):
                assert len(slice_semilengths(path)) == N

    @pytest.mark.parametrize("ensemble", [EXCURSION, BRIDGE])
    def test_length_sum_equals_midpoint_area(self, ensemble):
        # sum (2m+1) over slices = unsigned area as a sum of half-integers
        for N in range(1, 7):
            for path in enumerate_paths(N, ensemble):
                lengths = [2 * m + 1 for m in slice_semilengths(path).semilengths]
                assert sum(lengths) == path.midpoint_area()

    def test_length_sum_random_large(self):
        from dyckmoments import sampler

        rng = np.random.Generator(np.random.PCG64(5))
        for _ in range(200):
            path = sampler.sample_excursion(200, rng)
            lengths = [2 * m + 1 for m in slice_semilengths(path).semilengths]
            assert sum(lengths) == path.midpoint_area()


class TestStatistic:
    def test_minimal_excursion(self):
        assert statistic_exact(exc(1, -1), HALF_COST) == Fraction(1, 2)

    def test_half_area_identity(self):
        # omega(k) = k + 1/2 gives half the unsigned area
        path = exc(1, 1, -1, -1)
        assert statistic_exact(path, HALF_COST) == 2
        assert statistic_exact(path, HALF_COST) == path.midpoint_area() / 2

    def test_bridge_reflection(self):
        assert statistic_exact(bri(-1, 1), HALF_COST) == Fraction(1, 2)

    def test_eps_shift(self):
        path = exc(1, -1, 1, -1)
        assert statistic_exact(path, HALF_COST, Fraction(1, 4)) == Fraction(1, 2)

    def test_real_matches_exact(self):
        path = exc(1, 1, -1, -1, 1, -1)
        with mp.workprec(280):
            v = statistic(path, HALF_COST, Fraction(1, 8), 256)
            q = statistic_exact(path, HALF_COST, Fraction(1, 8))
            assert abs(v - mp.mpf(q.numerator) / q.denominator) < mp.mpf(2) ** -240


class TestHooks:
    def test_single(self):
        assert path_to_tree_hooks(exc(1, -1)) == (1,)

    def test_nested(self):
        assert path_to_tree_hooks(exc(1, 1, -1, -1)) == (1, 2)

    def test_bijection_on_enumeration(self):
        for N in range(1, 8):
            for path in enumerate_paths(N, EXCURSION):
                hooks = path_to_tree_hooks(path)  # asserts l = 2h - 1 internally
                assert len(hooks) == N

    def test_hook_area_identity_random(self):
        from dyckmoments import sampler

        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(100):
            path = sampler.sample_excursion(50, rng)
            hooks = path_to_tree_hooks(path)
            assert sum(2 * h - 1 for h in hooks) == path.midpoint_area()

    def test_bridge_rejected(self):
        with pytest.raises(MalformedPath):
            path_to_tree_hooks(bri(-1, 1))


class TestEnumeration:
    def test_counts(self):
        assert sum(1 for _ in enumerate_paths(3, EXCURSION)) == 5
        assert sum(1 for _ in enumerate_paths(2, BRIDGE)) == 6
        assert list(enumerate_paths(0, EXCURSION)) == [LatticePath((), EXCURSION)]

    def test_catalan_and_binomial_counts(self):
        import math

        for N in range(1, 8):
            assert sum(1 for _ in enumerate_paths(N, EXCURSION)) == \
                math.comb(2 * N, N) // (N + 1)
            assert sum(1 for _ in enumerate_paths(N, BRIDGE)) == math.comb(2 * N, N)

    def test_caps(self):
        with pytest.raises(CapExceeded):
            list(enumerate_paths(15, EXCURSION))
        with pytest.raises(CapExceeded):
            list(enumerate_paths(13, BRIDGE))


class TestExactDP:
    def test_m1_size_one(self):
        table = exact_moment_dp(EXCURSION, HALF_COST, Fraction(0), 1, 1, "rat")
        assert table.values[1][1] == Fraction(1, 2)  # omega(0)

    def test_m1_size_two(self):
        table = exact_moment_dp(EXCURSION, HALF_COST, Fraction(0), 2, 1, "rat")
        assert table.values[1][2] == Fraction(3, 2)  # (omega(1) + 3 omega(0))/2

    def test_normalization_rows(self):
        table = exact_moment_dp(BRIDGE, HALF_COST, Fraction(0), 6, 3, "rat")
        assert all(table.values[0][N] == 1 for N in range(7))
        assert all(table.values[s][0] == 0 for s in range(1, 4))

    @pytest.mark.parametrize("ensemble", [EXCURSION, BRIDGE])
    @pytest.mark.parametrize("cost", [HALF_COST, SQUARE_COST])
    def test_matches_brute_force(self, ensemble, cost):
        n_max = 7
        bf = brute_force_moments(ensemble, cost, Fraction(1, 3), n_max, 4)
        dp = exact_moment_dp(ensemble, cost, Fraction(1, 3), n_max, 4, "rat")
        for s in range(5):
            for N in range(n_max + 1):
                assert bf.values[s][N] == dp.values[s][N]

    def test_float_mode_matches_rational(self):
        rat = exact_moment_dp(EXCURSION, HALF_COST, Fraction(0), 24, 4, "rat")
        flt = exact_moment_dp(EXCURSION, HALF_COST, 0, 24, 4, "float")
        for s in range(5):
            for N in range(1, 25):
                exact = float(rat.values[s][N])
                assert abs(flt.values[s][N] - exact) <= abs(exact) * 1e-12

    def test_real_mode_matches_rational(self):
        rat = exact_moment_dp(BRIDGE, SQUARE_COST, Fraction(1, 2), 12, 3, "rat")
        rea = exact_moment_dp(BRIDGE, SQUARE_COST, Fraction(1, 2), 12, 3, "real", 192)
        with mp.workprec(220):
            for s in range(4):
                for N in range(1, 13):
                    exact = mp.mpf(rat.values[s][N].numerator) / rat.values[s][N].denominator
                    assert abs(rea.values[s][N] - exact) <= abs(exact) * mp.mpf(2) ** -150

    def test_rat_mode_requires_rational_cost(self):
        with pytest.raises(DomainError):
            exact_moment_dp(EXCURSION, costs.power_half(Fraction(1, 2)), 0, 4, 2, "rat")

    def test_csv_export(self, tmp_path):
        table = exact_moment_dp(EXCURSION, HALF_COST, Fraction(0), 4, 2, "rat")
        out = tmp_path / "table.csv"
        table.to_csv(out, 1)
        rows = list(csv.reader(open(out)))
        assert rows[0] == ["ensemble", "s", "N", "moment", "rescaled"]
        # M_1(2) = 3/2, rescaled by N^(3/2)
        row = [r for r in rows[1:] if r[1] == "1" and r[2] == "2"][0]
        assert row[3] == "3/2"
        assert abs(float(row[4]) - 1.5 / 2**1.5) < 1e-12


class TestConvergence:
    def test_p1_decay_and_limits(self):
        p = Fraction(1)
        eps = costs.alpha_closed_form(HALF_COST).value  # -1/2
        table = exact_moment_dp(EXCURSION, HALF_COST, eps, 1024, 3, "float")
        report = rescaled_convergence(table, p)
        # d_s(N) shrinks toward zero with the guaranteed sqrt rate
        for s in range(1, 4):
            assert abs(report.deviations[s][-1]) < 0.05
            assert report.fitted_decay[s] > 0.35
        assert np.all(report.deviations[0] == 0)

    def test_small_p_mean_dominated_by_alpha(self):
        # with eps = 0 the mean is alpha N at leading order, and the gap is
        # the canonical-shift subleading term t(p) N^(p-1/2)
        from dyckmoments import moments

        p = Fraction(1, 4)
        cf = costs.gamma_ratio(p, Fraction(1, 2))
        alpha = float(costs.alpha_closed_form(cf).value)
        t = float(moments.canonical_shift(p))
        table = exact_moment_dp(EXCURSION, cf, 0, 2048, 1, "float")
        gaps = {N: abs(table.values[1][N] / N - alpha) for N in (256, 1024, 2048)}
        assert gaps[2048] < gaps[1024] < gaps[256]
        for N, gap in gaps.items():
            predicted = abs(t) * N ** (float(p) - 0.5)
            assert abs(gap - predicted) < 0.25 * predicted
