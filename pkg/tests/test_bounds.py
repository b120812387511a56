"""
Tests for the concentration bound evaluator.
"""

import math
import unittest
from dataclasses import replace

from crm.core.base import ArgumentError, ConfigError, VacuousRegimeError
from crm.modules.bounds import (
    BoundParams,
    ExponentialMixing,
    LinearCovering,
    PolynomialMixing,
    block_schedule,
    bound_table,
    covering_radius,
    decay_schedule,
    derived_thresholds,
    hypercube_covering,
    linear_covering_bound,
    params_from_config,
    scaling_check,
    theorem2_bound,
)


def constant_covering(value=1.0):
    return lambda theta, n: value


def unit_params(**overrides):
    values = dict(
        t=0.6, N=1000, k=1, d=1, b=0.1,
        K1=1.0, K2=1.0, L=1.0, gamma=1.0, D0=1.0, D2=1.0, L_H=1.0,
        beta=ExponentialMixing(1.0, 1.0), covering=constant_covering(),
    )
    values.update(overrides)
    return BoundParams(**values)


PARAMETER_SETS = [
    dict(t=0.6, D0=1.0, K2=1.0, D2=1.0, d=1, b=0.1, K1=1.0, L_H=1.0, L=1.0, gamma=1.0),
    dict(t=0.3, D0=2.0, K2=0.5, D2=3.0, d=2, b=0.05, K1=0.3, L_H=2.0, L=1.5, gamma=1.0),
    dict(t=1.0, D0=0.5, K2=1.0, D2=1.0, d=3, b=0.2, K1=2.0, L_H=1.0, L=0.5, gamma=0.5),
    dict(t=0.1, D0=1.0, K2=0.25, D2=0.5, d=1, b=0.3, K1=1.0, L_H=0.5, L=2.0, gamma=0.25),
    dict(t=0.9, D0=3.0, K2=2.0, D2=1.0, d=4, b=0.1, K1=0.5, L_H=4.0, L=1.0, gamma=0.75),
]


class TestThresholds(unittest.TestCase):
    def test_hand_arithmetic(self):
        for values in PARAMETER_SETS:
            with self.subTest(values=values):
                p = unit_params(**values)
                t1, t2, t3 = derived_thresholds(p)
                v = values
                expected_t1 = (v["t"] * v["D0"] - v["K2"] * v["D2"] * v["d"] ** 2 * v["b"] ** 2) / 6
                expected_t2 = expected_t1 * v["b"] ** v["d"] / (64 * v["K1"] * v["L_H"])
                expected_t3 = (3 * v["L"] / (v["b"] ** (v["d"] + v["gamma"]) * expected_t1)) ** (
                    1 / v["gamma"]
                )
                self.assertAlmostEqual(t1, expected_t1, delta=1e-12)
                self.assertAlmostEqual(t2, expected_t2, delta=1e-12)
                self.assertAlmostEqual(t3 / expected_t3, 1.0, delta=1e-12)

    def test_first_set(self):
        t1, _, _ = derived_thresholds(unit_params())
        self.assertAlmostEqual(t1, 0.59 / 6, delta=1e-12)

    def test_small_bandwidth_limit(self):
        t1, _, _ = derived_thresholds(unit_params(b=1e-8))
        self.assertAlmostEqual(t1, 0.6 / 6, delta=1e-12)

    def test_vacuous_regime(self):
        with self.assertRaises(VacuousRegimeError) as ctx:
            derived_thresholds(unit_params(t=0.01, b=0.2))
        self.assertAlmostEqual(ctx.exception.margin, 0.01 - 0.04, delta=1e-12)
        with self.assertRaises(VacuousRegimeError):
            theorem2_bound(unit_params(t=0.01, b=0.2))

    def test_covering_radius_is_reciprocal(self):
        p = unit_params(**PARAMETER_SETS[2])
        _, _, t3 = derived_thresholds(p)
        self.assertAlmostEqual(covering_radius(p) * t3, 1.0, delta=1e-12)

    def test_parameter_validation(self):
        with self.assertRaises(ArgumentError):
            unit_params(t=1.5)
        with self.assertRaises(ArgumentError):
            unit_params(gamma=2.0)
        with self.assertRaises(ArgumentError):
            unit_params(N=100, mu=5, a=6)


class TestBound(unittest.TestCase):
    def test_independent_process_has_no_mixing_term(self):
        table = bound_table(unit_params(mu=10, a=5, beta=ExponentialMixing(c1=0.0)))
        self.assertEqual(table["term2"], 0.0)
        self.assertEqual(table["total"], table["term1"])

    def test_single_block_has_no_mixing_term(self):
        table = bound_table(unit_params(mu=1, a=1, beta=lambda j: 1.0))
        self.assertEqual(table["term2"], 0.0)
        self.assertGreaterEqual(table["total"], 0.0)

    def test_hand_evaluation(self):
        p = unit_params(mu=10, a=5)
        t1, t2, t3 = derived_thresholds(p)
        cover = (math.sqrt(1) * t3 / 2) ** 1
        term1 = 32 * cover * 1.0 * math.exp(-10 * t1**2 * 0.1**2 / 2048)
        term2 = 4 * cover * 9 * math.exp(-10)
        table = bound_table(p)
        self.assertAlmostEqual(table["term1"] / term1, 1.0, delta=1e-12)
        self.assertAlmostEqual(table["term2"] / term2, 1.0, delta=1e-12)
        self.assertAlmostEqual(theorem2_bound(p) / (term1 + term2), 1.0, delta=1e-12)

    def test_doubling_blocks(self):
        before = bound_table(unit_params(mu=10, a=10))
        after = bound_table(unit_params(mu=20, a=5))
        self.assertLess(after["term1"], before["term1"])
        # (mu - 1) beta(2ad): 9 e^-20 against 19 e^-10
        self.assertAlmostEqual(
            after["term2"] / before["term2"], 19 * math.exp(-10) / (9 * math.exp(-20)), delta=1e-6
        )

    def test_astronomical_bound_is_infinite(self):
        p = unit_params(t=1.0, k=3, d=100, b=0.005, N=1000)
        table = bound_table(p)
        self.assertTrue(math.isinf(table["total"]))
        self.assertTrue(math.isfinite(table["log_total"]))
        self.assertGreater(table["log_total"], 709)

    def test_log_covering_function(self):
        covering = LinearCovering(weight_radius=1.0, input_dim=2)
        p = unit_params(mu=10, a=5, covering=covering)
        table = bound_table(p)
        self.assertAlmostEqual(
            table["log_n1"], math.log(covering(table["t2"], p.n)), delta=1e-9
        )


class TestCovering(unittest.TestCase):
    def test_hypercube(self):
        self.assertEqual(hypercube_covering(1, 0.5), 1.0)
        self.assertAlmostEqual(hypercube_covering(2, 0.1), 50.0, places=9)
        self.assertEqual(hypercube_covering(3, 1e6), 1.0)
        values = [hypercube_covering(4, tau) for tau in (0.01, 0.05, 0.1, 0.5, 1.0)]
        self.assertTrue(all(a >= b >= 1.0 for a, b in zip(values, values[1:])))
        with self.assertRaises(ArgumentError):
            hypercube_covering(2, 0.0)

    def test_linear_monotone_in_theta(self):
        previous = math.inf
        for theta in (1e-3, 2e-3, 4e-3, 1e-2, 0.1, 1.0):
            value = linear_covering_bound(theta, 2.0, 2, 500)
            self.assertGreaterEqual(value, 1.0)
            self.assertLessEqual(value, previous)
            previous = value

    def test_linear_polynomial_in_n(self):
        input_dim = 3
        for n in (10, 100, 1000, 10_000):
            small = linear_covering_bound(0.01, 1.0, input_dim, n)
            large = linear_covering_bound(0.01, 1.0, input_dim, 2 * n)
            self.assertLessEqual(math.log2(large / small), input_dim + 1 + 1e-9)

    def test_linear_collapses_to_one(self):
        self.assertEqual(linear_covering_bound(0.1, 0.0, 2, 100), 1.0)
        self.assertAlmostEqual(linear_covering_bound(0.1, 1e-12, 2, 100), 1.0, places=6)


class TestMixingFunctions(unittest.TestCase):
    def test_exponential(self):
        beta = ExponentialMixing(2.0, 0.5)
        self.assertEqual(beta(0), 1.0)
        self.assertAlmostEqual(beta(10), 2.0 * math.exp(-5.0), delta=1e-15)
        self.assertEqual(ExponentialMixing(c1=0.0)(3), 0.0)

    def test_polynomial(self):
        beta = PolynomialMixing(1.0, 2.0)
        self.assertEqual(beta(0), 1.0)
        self.assertAlmostEqual(beta(10), 0.01, delta=1e-15)


class TestBlockSchedule(unittest.TestCase):
    def test_minimal(self):
        self.assertEqual(block_schedule(4, 1), (1, 1))
        self.assertEqual(block_schedule(12, 3), (1, 1))

    def test_target_mu(self):
        self.assertEqual(block_schedule(400, 1, target_mu=10), (10, 10))
        self.assertEqual(block_schedule(401, 1, target_mu=10), (10, 10))

    def test_fills_the_sequence(self):
        for N, d in ((100, 1), (1000, 2), (12_345, 3), (10**6, 1)):
            mu, a = block_schedule(N, d)
            self.assertLessEqual(4 * mu * a * d, N)
            self.assertEqual(mu * a, N // (4 * d))

    def test_too_short(self):
        with self.assertRaises(ArgumentError):
            block_schedule(7, 2)
        with self.assertRaises(ArgumentError):
            block_schedule(100, 1, target_mu=30)

    def test_decay_schedule(self):
        for N in (10**4, 10**6, 10**9):
            mu, a, b = decay_schedule(N, 2)
            self.assertLessEqual(4 * mu * a * 2, N)
            self.assertAlmostEqual(b, N ** (-1 / 12), delta=1e-15)


class TestScalingCheck(unittest.TestCase):
    def setUp(self):
        self.template = unit_params(t=0.5, N=10**4, beta=ExponentialMixing(1.0, 1.0))
        # with unit constants the bound only turns down past N ~ 1e17
        self.grid = [10**e for e in range(4, 41, 2)]

    def test_tail_is_decreasing(self):
        rows = scaling_check(self.grid, 1, self.template)
        self.assertTrue(all(not row.error for row in rows))
        tail = [row.log_total for row in rows[len(rows) // 2 :]]
        self.assertTrue(all(a > b for a, b in zip(tail, tail[1:])), tail)

    def test_independent_rows(self):
        template = replace(self.template, beta=ExponentialMixing(c1=0.0))
        for row in scaling_check(self.grid[:6], 1, template):
            self.assertEqual(row.terms["term2"], 0.0)
            self.assertEqual(row.terms["total"], row.terms["term1"])

    def test_deterministic(self):
        first = scaling_check(self.grid, 1, self.template)
        second = scaling_check(list(self.grid), 1, self.template)
        self.assertEqual([r.terms for r in first], [r.terms for r in second])

    def test_bad_rows_are_reported(self):
        template = replace(self.template, t=0.01)
        rows = scaling_check([2, 100], 1, template)
        self.assertIn("too short", rows[0].error)
        self.assertIn("Vacuous", rows[1].error)
        self.assertTrue(math.isnan(rows[1].log_total))


class TestParamsFromConfig(unittest.TestCase):
    BASE = dict(t=0.6, N=1000, k=1, d=1, b=0.1, K1=1, K2=1, L=1, gamma=1, D0=1, D2=1, L_H=1)

    def test_schedule_filled_in(self):
        p = params_from_config(dict(self.BASE, beta={"kind": "exponential", "c1": 1, "c2": 1}))
        self.assertEqual((p.mu, p.a), block_schedule(1000, 1))
        self.assertGreaterEqual(theorem2_bound(p), 0.0)

    def test_explicit_schedule(self):
        p = params_from_config(dict(self.BASE, mu=10, a=25))
        self.assertEqual((p.mu, p.a), (10, 25))
        self.assertEqual(bound_table(p)["term2"], 0.0)

    def test_missing_symbol(self):
        config = dict(self.BASE)
        del config["K1"]
        with self.assertRaises(ConfigError):
            params_from_config(config)

    def test_unknown_kinds(self):
        with self.assertRaises(ConfigError):
            params_from_config(dict(self.BASE, beta={"kind": "weird"}))
        with self.assertRaises(ConfigError):
            params_from_config(dict(self.BASE, covering={"kind": "weird"}))

    def test_chain_mixing(self):
        p = params_from_config(dict(self.BASE, mu=10, a=5, beta={"kind": "chain", "chain_seed": 3}))
        self.assertTrue(0.0 <= p.beta(10) <= 1.0)
        self.assertGreater(bound_table(p)["term2"], 0.0)


if __name__ == "__main__":
    unittest.main()
