"""
Tests for borel_claims.panjer.
"""

import math

import numpy as np
from absl import logging
from absl.testing import absltest, parameterized

from borel_claims import compounds, oracle, panjer
from borel_claims.errors import (
    AccuracyError,
    BudgetExceededError,
    DomainError,
    GridBoundsError,
)

ORACLE_SUPPORT = 12
TWO_POINT = panjer.SeverityPmf.from_weights([0.5, 0.5])

FAMILIES = (
    compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0),
    compounds.FamilyParams(compounds.GPD, 0.3, theta=2.0),
    compounds.FamilyParams(compounds.BARTLETT, 0.5, theta=1.0),
    compounds.FamilyParams(compounds.BARTLETT, 0.4, theta=0.0),
    compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=2),
    compounds.FamilyParams(compounds.SHIFTED, 0.3, theta=0.8, k=-1),
    compounds.FamilyParams(compounds.DELAPORTE, 0.5, theta=1.0, m=2),
    compounds.FamilyParams(compounds.DELAPORTE, 0.2, theta=0.5, m=3),
)


def _random_severities(count=5, seed=20):
    rng = np.random.default_rng(seed)
    severities = []
    for max_claim in rng.integers(1, 5, size=count):
        weights = rng.dirichlet(np.ones(max_claim))
        weights[-1] = 1.0 - np.sum(weights[:-1])
        severities.append(panjer.SeverityPmf.from_weights(weights))
    return severities


def _oracle(params, severity, n_max):
    count = oracle.DensePmf(np.exp(compounds.log_pmf_array(params, n_max)))
    summand = oracle.DensePmf(severity.f).restrict(n_max)
    return oracle.compound_by_mixing(count, summand, n_max).p


class SeverityTest(absltest.TestCase):
    def test_unit(self):
        unit = panjer.SeverityPmf.unit()
        self.assertEqual(unit.max_claim, 1)
        self.assertEqual(unit.mean(), 1.0)
        self.assertEqual(unit.variance(), 0.0)

    def test_from_mapping(self):
        severity = panjer.SeverityPmf.from_weights({3: 0.25, 1: 0.75})
        np.testing.assert_array_equal(severity.f, [0.0, 0.75, 0.0, 0.25])

    def test_rejects_unnormalized(self):
        with self.assertRaises(DomainError):
            panjer.SeverityPmf.from_weights([0.5, 0.4])

    def test_rejects_zero_claims(self):
        with self.assertRaises(DomainError):
            panjer.SeverityPmf(np.array([0.5, 0.5]))
        with self.assertRaises(DomainError):
            panjer.SeverityPmf.from_weights({0: 0.5, 1: 0.5})

    def test_rejects_negative(self):
        with self.assertRaises(DomainError):
            panjer.SeverityPmf.from_weights([1.5, -0.5])


class AggregateTest(parameterized.TestCase):
    @parameterized.parameters(*[dict(params=params) for params in FAMILIES])
    def test_unit_severity_is_claim_number(self, params):
        n_max = 40
        table = panjer.aggregate_pmf(params, panjer.SeverityPmf.unit(), n_max)
        expected = compounds.log_pmf_array(params, n_max)
        np.testing.assert_allclose(table.log_p, expected, rtol=0.0, atol=1e-10)

    @parameterized.parameters(*[dict(params=params) for params in FAMILIES])
    def test_zero_total(self, params):
        table = panjer.aggregate_pmf(params, TWO_POINT, 5)
        self.assertAlmostEqual(
            table.log_p[0], compounds.log_pmf_array(params, 0)[0], places=14
        )

    def test_two_point_severity(self):
        params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        table = panjer.aggregate_pmf(params, TWO_POINT, 12)
        expected = 0.5 * math.exp(-1.5)
        self.assertAlmostEqual(table.probabilities()[1], expected, places=14)
        self.assertAlmostEqual(table.probabilities()[1], 0.1115651, places=7)

    @parameterized.parameters(*[dict(params=params) for params in FAMILIES])
    def test_mixing_oracle(self, params):
        for severity in [TWO_POINT] + _random_severities():
            table = panjer.aggregate_pmf(params, severity, ORACLE_SUPPORT)
            expected = _oracle(params, severity, ORACLE_SUPPORT)
            np.testing.assert_allclose(table.probabilities(), expected, rtol=1e-9)

    @parameterized.parameters(*[dict(params=params) for params in FAMILIES])
    def test_scheme_consistency(self, params):
        severity = _random_severities(1, seed=3)[0]
        short = panjer.aggregate_pmf(params, severity, 20)
        longer = panjer.aggregate_pmf(params, severity, 30)
        np.testing.assert_allclose(longer.log_p[:21], short.log_p, rtol=1e-15)

    @parameterized.parameters(*[dict(params=params) for params in FAMILIES])
    def test_default_support_accounts_for_all_mass(self, params):
        table = panjer.aggregate_pmf(params, TWO_POINT)
        self.assertAlmostEqual(table.total_mass() + table.tail_bound, 1.0, delta=1e-8)
        self.assertLess(table.tail_bound, 1e-3)

    def test_default_support_limit(self):
        params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        limit = panjer.default_support_limit(params, panjer.SeverityPmf.unit())
        self.assertEqual(limit, 31)

    def test_wald_moments(self):
        params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        mean, variance = panjer.aggregate_mean_var(params, panjer.SeverityPmf.unit())
        self.assertAlmostEqual(mean, 2.0)
        self.assertAlmostEqual(variance, 8.0)
        mean, variance = panjer.aggregate_mean_var(params, TWO_POINT)
        self.assertAlmostEqual(mean, 3.0)
        self.assertAlmostEqual(variance, 2.0 * 0.25 + 8.0 * 2.25)

    def test_borel_has_no_scheme(self):
        with self.assertRaises(DomainError):
            params = compounds.FamilyParams(compounds.BOREL, 0.5)
            panjer.aggregate_pmf(params, TWO_POINT, 5)


class CoefficientTest(parameterized.TestCase):
    def test_order_zero_is_gpd(self):
        shifted = panjer.PanjerFamily(compounds.SHIFTED, 1.3, 0.4, k=0)
        gpd = panjer.PanjerFamily(compounds.GPD, 1.3, 0.4)
        for actual, expected in zip(shifted.coefficients(10), gpd.coefficients(10)):
            np.testing.assert_allclose(actual, expected, rtol=1e-14)
        np.testing.assert_allclose(shifted.log_base(10), gpd.log_base(10), atol=1e-14)

    def test_order_one_is_bartlett(self):
        shifted = panjer.PanjerFamily(compounds.SHIFTED, 1.3, 0.4, k=1)
        bartlett = panjer.PanjerFamily(compounds.BARTLETT, 1.3, 0.4)
        pairs = zip(shifted.coefficients(10), bartlett.coefficients(10))
        for actual, expected in pairs:
            np.testing.assert_allclose(actual, expected, rtol=1e-14)
        np.testing.assert_allclose(
            shifted.log_base(10), bartlett.log_base(10), atol=1e-14
        )

    def test_gpd_pair(self):
        a, b = panjer.PanjerFamily(compounds.GPD, 1.0, 0.5).coefficients(1)
        self.assertAlmostEqual(a[0], 1.0 / 3.0)
        self.assertAlmostEqual(b[0], 2.0 / 3.0)


class DelaporteGridTest(parameterized.TestCase):
    @parameterized.parameters(panjer.RESOLVED, panjer.LITERAL)
    def test_unit_severity(self, coefficients):
        table = panjer.aggregate_pmf_delaporte(
            panjer.SeverityPmf.unit(), 1.0, 0.5, 2, 30, coefficients=coefficients
        )
        expected = compounds.log_delaporte_compound(1.0, 0.5, 2, 30)
        np.testing.assert_allclose(table.log_p, expected, rtol=0.0, atol=1e-10)

    def test_zero_total(self):
        table = panjer.aggregate_pmf_delaporte(TWO_POINT, 1.0, 0.5, 2, 4)
        expected = 0.25 * math.exp(-1.0)
        self.assertAlmostEqual(table.probabilities()[0], expected, places=15)

    def test_two_point_oracle(self):
        params = compounds.FamilyParams(compounds.DELAPORTE, 0.5, theta=1.0, m=2)
        table = panjer.aggregate_pmf_delaporte(TWO_POINT, 1.0, 0.5, 2, 10)
        np.testing.assert_allclose(
            table.probabilities(), _oracle(params, TWO_POINT, 10), rtol=1e-9
        )

    def test_literal_coefficients_against_oracle(self):
        params = compounds.FamilyParams(compounds.DELAPORTE, 0.5, theta=1.0, m=2)
        literal = panjer.aggregate_pmf_delaporte(
            TWO_POINT, 1.0, 0.5, 2, 10, coefficients=panjer.LITERAL
        )
        expected = _oracle(params, TWO_POINT, 10)
        error = np.max(np.abs(literal.probabilities() / expected - 1.0))
        logging.info("Literal coefficients: max relative error {}.".format(error))
        self.assertTrue(np.all(np.isfinite(literal.log_p)))

    def test_grid_access(self):
        grid = panjer.aggregate_grid_delaporte(TWO_POINT, 1.0, 0.5, 2, 6)
        self.assertAlmostEqual(
            grid.log_q(1, 0, 2), 4 * math.log(0.5) - 1.5, places=14
        )
        with self.assertRaises(GridBoundsError):
            grid.log_q(3, 4)
        with self.assertRaises(GridBoundsError):
            grid.log_q(0, 3, 4)

    def test_rejects_unknown_variant(self):
        with self.assertRaises(DomainError):
            panjer.aggregate_pmf_delaporte(TWO_POINT, 1.0, 0.5, 2, 4, coefficients="b1")


class GridTest(absltest.TestCase):
    def test_bounds(self):
        params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        grid = panjer.aggregate_grid(params, TWO_POINT, 5)
        self.assertAlmostEqual(grid.log_q(2, 0), -2.0, places=15)
        self.assertAlmostEqual(grid.log_q(5, 0), -3.5, places=15)
        with self.assertRaises(GridBoundsError):
            grid.log_q(3, 3)
        with self.assertRaises(GridBoundsError):
            grid.log_q(0, 6)
        with self.assertRaises(GridBoundsError):
            grid.log_q(0, 1, 1)

    def test_budget(self):
        params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        with self.assertRaises(BudgetExceededError):
            panjer.aggregate_grid(params, TWO_POINT, 100, max_grid=1000)
        with self.assertRaises(BudgetExceededError):
            panjer.aggregate_grid_delaporte(TWO_POINT, 1.0, 0.5, 2, 30, max_grid=1000)

    def test_cell_counts(self):
        self.assertEqual(panjer.triangle_cells(2), 6)
        self.assertEqual(panjer.pyramid_cells(2), 14)


class StopLossTest(absltest.TestCase):
    def setUp(self):
        super(StopLossTest, self).setUp()
        self.params = compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        self.table = panjer.aggregate_pmf(self.params, panjer.SeverityPmf.unit(), 400)

    def test_zero_retention_is_mean(self):
        result = panjer.stop_loss(self.table, 0, mean=2.0, accuracy=1e-10)
        self.assertAlmostEqual(result.premium, 2.0, places=10)
        self.assertLess(result.tail_bound, 1e-10)

    def test_retention_beyond_support(self):
        result = panjer.stop_loss(self.table, 500, mean=2.0)
        self.assertEqual(result.premium, 0.0)

    def test_matches_direct_sum(self):
        result = panjer.stop_loss(self.table, 3)
        p = self.table.probabilities()
        expected = sum((n - 3) * p[n] for n in range(4, len(p)))
        self.assertAlmostEqual(result.premium, expected, places=13)
        self.assertEqual(result.tail_bound, math.inf)

    def test_accuracy(self):
        short = panjer.aggregate_pmf(self.params, panjer.SeverityPmf.unit(), 10)
        with self.assertRaises(AccuracyError):
            panjer.stop_loss(short, 0, mean=2.0, accuracy=1e-6)

    def test_negative_retention(self):
        with self.assertRaises(DomainError):
            panjer.stop_loss(self.table, -1)


if __name__ == "__main__":
    absltest.main()
