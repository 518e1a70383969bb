from fractions import Fraction
from itertools import product
from math import comb

import numpy as np
import pytest

from abelexp.combinatorics import bounded_partition_count, tree_count_product
from abelexp.quadrature import (
    ControlGrid,
    chen_fliess_terms,
    convergence_radius,
    cumulative_integral,
    evaluate_series,
    expansion_via_products,
    homomorphism_check,
    iterated_integral,
    remainder_bound,
    simplex_bound,
)
from abelexp.series import EquationSpec, expand_general

from oracles import exact_tail

FAMILIES = {
    "constant": lambda n: [1.0 - 0.5 * (i % 2) for i in range(n + 1)],
    "sine": lambda n: [lambda t, i=i: np.sin(2 * t + i) for i in range(n + 1)],
    "poly": lambda n: [lambda t, i=i: 0.5 - 0.5 * t + 0.25 * i * t**2 for i in range(n + 1)],
}


def grid(T, N, controls, M=None):
    return ControlGrid.from_functions(T, N, controls, M)


class TestControlGrid:
    def test_uniform_with_endpoints(self):
        g = grid(2.0, 5, [1.0, 2.0])
        assert np.allclose(g.t, [0, 0.5, 1.0, 1.5, 2.0])
        assert g.n == 1 and g.N == 5 and g.M == 2.0

    def test_bound_below_samples_rejected(self):
        with pytest.raises(ValueError):
            grid(1.0, 5, [1.0, 3.0], M=2.0)

    def test_override_above_samples(self):
        assert grid(1.0, 5, [1.0], M=4.0).M == 4.0

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            grid(0.0, 5, [1.0])
        with pytest.raises(ValueError):
            grid(1.0, 1, [1.0])

    def test_csv_round_trip(self):
        g = grid(0.7, 9, [np.sin, np.cos, 0.25])
        back = ControlGrid.from_csv(g.to_csv())
        assert back.T == g.T
        assert np.array_equal(back.samples, g.samples)

    def test_csv_requires_uniform_grid(self):
        text = "t,u0\n0,1\n0.1,1\n0.5,1\n"
        with pytest.raises(ValueError):
            ControlGrid.from_csv(text)

    def test_immutable(self):
        g = grid(1.0, 5, [1.0])
        with pytest.raises(ValueError):
            g.samples[0, 0] = 5.0


class TestIteratedIntegral:
    def test_empty_word(self):
        g = grid(1.0, 11, [np.sin, np.cos])
        assert np.array_equal(iterated_integral((), g), np.ones(11))

    def test_single_letter(self):
        g = grid(1.0, 101, [1.0, 1.0])
        assert np.allclose(iterated_integral((0,), g), g.t, atol=1e-14)

    def test_two_letters(self):
        g = grid(1.0, 4097, [1.0, 1.0])
        assert np.max(np.abs(iterated_integral((0, 1), g) - g.t**2 / 2)) < 1e-7

    def test_order_of_letters(self):
        # Upsilon(a0 a1) = int_0^t u1(s) int_0^s u0 = int_0^t s ds for u0=1, u1=s
        g = grid(1.0, 4097, [1.0, lambda t: t])
        assert np.max(np.abs(iterated_integral((0, 1), g) - g.t**3 / 3)) < 1e-7
        assert np.max(np.abs(iterated_integral((1, 0), g) - g.t**3 / 6)) < 1e-7

    def test_invalid_letter(self):
        with pytest.raises(ValueError):
            iterated_integral((2,), grid(1.0, 5, [1.0, 1.0]))

    def test_trapezoid(self):
        f = np.array([0.0, 1.0, 4.0])
        assert np.allclose(cumulative_integral(f, 0.5), [0.0, 0.25, 1.5])


class TestEvaluateSeries:
    def test_linear_exponential(self):
        g = grid(1.0, 4097, [1.0, 1.0])
        table = evaluate_series(expand_general(1, 10), g)
        assert np.max(np.abs(table.partial - np.expm1(g.t))) < 1e-6

    def test_vanishes_at_zero(self):
        g = grid(0.5, 65, [np.cos, np.sin, 1.0])
        table = evaluate_series(expand_general(2, 6), g)
        assert np.all(table.phi[:, 0] == 0)
        assert table.partial[0] == 0

    def test_n0(self):
        g = grid(1.0, 257, [np.cos])
        table = evaluate_series(expand_general(0, 4), g)
        assert np.allclose(table.order(1), cumulative_integral(np.cos(g.t), g.h))
        assert np.all(table.phi[1:] == 0)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_series(expand_general(2, 3), grid(1.0, 5, [1.0, 1.0]))


class TestExpansionViaProducts:
    def test_riccati_tan(self):
        # x' = 1 + x^2 in normalized form: u0 = 1, u1 = 0, u2 = 1
        g = grid(0.5, 4097, [1.0, 0.0, 1.0])
        table = expansion_via_products(2, g, 12)
        assert np.max(np.abs(table.partial - np.tan(g.t))) < 1e-6

    @pytest.mark.parametrize("family", sorted(FAMILIES))
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_agrees_with_word_by_word(self, n, family):
        # half the certified radius for n = 3, M = 1
        g = grid(0.25, 4097, FAMILIES[family](n))
        fast = expansion_via_products(n, g, 6)
        slow = evaluate_series(expand_general(n, 6), g)
        assert np.max(np.abs(fast.phi - slow.phi)) < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_integral_counts(self, n):
        g = grid(0.1, 17, [1.0] * (n + 1))
        table = expansion_via_products(n, g, 11)
        assert table.integral_counts[1] == 1
        for k in range(1, 11):
            assert table.integral_counts[k + 1] == bounded_partition_count(k, n)

    def test_n0(self):
        g = grid(1.0, 129, [np.cos])
        table = expansion_via_products(0, g, 3)
        assert np.allclose(table.order(1), cumulative_integral(np.cos(g.t), g.h))
        assert np.all(table.phi[1:] == 0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_simplex_bound(self, n):
        g = grid(0.4, 2049, FAMILIES["sine"](n))
        table = expansion_via_products(n, g, 8)
        for k in range(1, 9):
            assert np.all(np.abs(table.order(k)) <= simplex_bound(n, k, g.M, g.t) + 1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_integral_equation_residual(self, n):
        # residual of x = int sum C(n,i) u_i x^i, within 0.8 of the radius
        g = grid(0.4, 4097, FAMILIES["poly"](n))
        radius = convergence_radius(n, g.M, g.T).radius
        mask = g.t <= 0.8 * radius
        residuals = []
        for K in (2, 4, 8, 12):
            x = expansion_via_products(n, g, K).partial
            rhs = sum(comb(n, i) * g.u(i) * x**i for i in range(n + 1))
            residuals.append(np.max(np.abs(x - cumulative_integral(rhs, g.h))[mask]))
        assert residuals == sorted(residuals, reverse=True)
        assert residuals[-1] < 1e-7

    def test_mismatch(self):
        with pytest.raises(ValueError):
            expansion_via_products(3, grid(1.0, 5, [1.0, 1.0]), 3)
        with pytest.raises(ValueError):
            expansion_via_products(1, grid(1.0, 5, [1.0, 1.0]), 0)


class TestChenFliessEvaluation:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_expansion(self, n):
        g = grid(0.4, 4097, FAMILIES["sine"](n))
        raw = g.scaled([comb(n, i) for i in range(n + 1)])
        cf = chen_fliess_terms(n, raw, 5)
        ours = expansion_via_products(n, g, 5)
        assert np.max(np.abs(cf.phi - ours.phi)) < 1e-8

    def test_counts_are_M0_sizes(self):
        g = grid(0.1, 9, [1.0] * 6)
        cf = chen_fliess_terms(5, g, 5)
        assert [cf.integral_counts[k] for k in range(1, 6)] == [1, 2, 5, 14, 42]


class TestRemainderBound:
    def test_riccati_half(self):
        g = grid(1.0, 3, [1.0, 0.0, 1.0], M=1.0)  # t = 0, 0.5, 1
        bounds = [remainder_bound(2, g, K)[1] for K in (8, 10, 12, 14)]
        assert bounds[2] < 1e-2
        assert bounds == sorted(bounds, reverse=True) and bounds[0] > bounds[-1]
        # n = 2: ||Z_k|| x^k / k! = x^k, tail = x^(K+1) / (1 - x)
        assert bounds[2] == pytest.approx(0.5**13 / 0.5, rel=1e-12)

    def test_zero_time(self):
        g = grid(1.0, 5, [1.0, 1.0, 1.0])
        assert remainder_bound(2, g, 4)[0] == 0.0

    def test_linear_entire(self):
        g = grid(3.0, 4, [2.0, 2.0])
        tails = [remainder_bound(1, g, K)[-1] for K in (5, 10, 20, 40)]
        assert tails == sorted(tails, reverse=True)
        assert tails[-1] < 1e-15
        assert np.all(np.isfinite(remainder_bound(1, g, 5)))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_against_exact_sum(self, n):
        M, t, K = 1.0, 0.3 / max(n - 1, 1), 6
        g = grid(1.0, 11, [1.0] * (n + 1), M=M)
        j = int(round(t * 10))
        exact = exact_tail(lambda k: tree_count_product(n, k), Fraction(g.t[j]).limit_denominator(10**6), K, 400)
        assert remainder_bound(n, g, K)[j] == pytest.approx(float(exact), rel=1e-9)

    def test_outside_radius_infinite(self):
        g = grid(2.0, 5, [1.0, 0.0, 1.0])
        b = remainder_bound(2, g, 6)
        assert np.all(np.isfinite(b[g.t < 1.0]))
        assert np.all(np.isinf(b[g.t >= 1.0]))

    def test_n0(self):
        g = grid(1.0, 5, [1.0])
        assert np.all(remainder_bound(0, g, 1) == 0)


class TestRadius:
    def test_riccati(self):
        assert convergence_radius(2, 1.0, 10.0).radius == 1.0

    def test_abel(self):
        assert convergence_radius(3, 2.0, 10.0).radius == 0.25

    def test_linear(self):
        assert convergence_radius(1, 100.0, 3.0).radius == 3.0
        assert convergence_radius(0, 5.0, 2.0).radius == 2.0

    def test_zero_bound(self):
        assert convergence_radius(4, 0.0, 2.0).radius == 2.0

    def test_capped_by_horizon(self):
        r = convergence_radius(EquationSpec(2), 1.0, 0.5)
        assert r.radius == 0.5 <= r.T

    def test_open_interval(self):
        r = convergence_radius(2, 1.0, 10.0)
        assert list(r.inside([0.0, 0.999, 1.0, 2.0])) == [True, True, False, False]
        assert list(convergence_radius(1, 1.0, 2.0).inside([2.0])) == [True]

    def test_invalid(self):
        with pytest.raises(ValueError):
            convergence_radius(2, -1.0, 1.0)
        with pytest.raises(ValueError):
            convergence_radius(2, 1.0, 0.0)


class TestHomomorphism:
    def test_constant(self):
        g = grid(1.0, 257, [1.0])
        assert homomorphism_check((0,), (0,), g) < 1e-14

    def test_two_letters(self):
        g = grid(0.5, 4097, [np.cos, lambda t: np.sin(2 * t) + 0.5])
        assert homomorphism_check((0,), (1,), g) < 1e-8

    def test_second_order(self):
        controls = [np.cos, lambda t: np.sin(2 * t) + 0.5, lambda t: 1 + t - t**2]
        fine = grid(0.5, 4097, controls)
        coarse = fine.coarsened()
        for v, w in [((0,), (1,)), ((0, 2), (1,)), ((1, 2), (0, 2))]:
            ratio = homomorphism_check(v, w, coarse) / homomorphism_check(v, w, fine)
            assert 3.5 < ratio < 4.5
