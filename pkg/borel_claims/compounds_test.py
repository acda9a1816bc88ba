"""
Tests for borel_claims.compounds.
"""

import itertools
import math

import numpy as np
from absl.testing import absltest, parameterized

from borel_claims import claim_number, compounds, oracle
from borel_claims.errors import DomainError

THETAS = (0.5, 1.0, 2.0)
LAMBDAS = (0.2, 0.5, 0.8)
GRID = [dict(theta=theta, lam=lam) for theta, lam in itertools.product(THETAS, LAMBDAS)]
ORACLE_SUPPORT = 30
COMPOUNDS = (compounds.GPD, compounds.BARTLETT, compounds.DELAPORTE, compounds.SHIFTED)
SHIFTED_BASES = ((1.0, 0.5), (0.5, 0.2), (2.0, 0.8))


def _assert_close(actual, expected, rtol):
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=0.0)


def _mixing_oracle(count, lam):
    return oracle.compound_by_mixing(
        count, oracle.borel_dense(lam, ORACLE_SUPPORT), ORACLE_SUPPORT
    ).p


class GpdTest(parameterized.TestCase):
    @parameterized.parameters(
        (1.0, 0.5, 0, -1.0),
        (1.0, 0.5, 1, -1.5),
    )
    def test_values(self, theta, lam, n, expected):
        value = compounds.gpd_pmf(compounds.GpdParams(theta, lam), n)
        self.assertAlmostEqual(value, expected, places=14)

    def test_degenerate_parameters(self):
        poisson = compounds.gpd_pmf(compounds.GpdParams(2.0, 0.0), 3)
        expected = 3 * math.log(2.0) - 2.0 - math.log(6.0)
        self.assertAlmostEqual(poisson, expected, places=13)
        self.assertEqual(compounds.gpd_pmf(compounds.GpdParams(0.0, 0.5), 0), 0.0)
        self.assertEqual(compounds.gpd_pmf(compounds.GpdParams(0.0, 0.5), 2), -math.inf)

    def test_rejects_supercritical_lambda(self):
        with self.assertRaises(DomainError):
            compounds.GpdParams(1.0, 1.5)

    def test_single_point_mixing_oracle(self):
        n_max = 7
        count = oracle.poisson_dense(2.0, n_max)
        summand = oracle.borel_dense(0.3, n_max)
        expected = oracle.compound_by_mixing(count, summand, n_max)
        value = compounds.gpd_pmf(compounds.GpdParams(2.0, 0.3), 7)
        self.assertLess(abs(math.exp(value) / expected.p[7] - 1.0), 1e-12)

    @parameterized.parameters(GRID)
    def test_mixing_oracle(self, theta, lam):
        n = np.arange(ORACLE_SUPPORT + 1)
        expected = _mixing_oracle(oracle.poisson_dense(theta, ORACLE_SUPPORT), lam)
        _assert_close(np.exp(compounds.log_gpd(theta, lam, n)), expected, 1e-9)


class BartlettCompoundTest(parameterized.TestCase):
    def test_zero(self):
        value = compounds.bartlett_compound_pmf(1.0, 0.5, 0)
        self.assertAlmostEqual(value, math.log(0.5) - 1.0, places=14)

    def test_weighted_gpd_form(self):
        gpd = compounds.gpd_pmf(compounds.GpdParams(1.0, 0.5), 3)
        value = compounds.bartlett_compound_pmf(1.0, 0.5, 3)
        self.assertAlmostEqual(value, math.log(0.5 * 2.5) + gpd, places=13)

    @parameterized.parameters(GRID)
    def test_mixing_oracle(self, theta, lam):
        n = np.arange(ORACLE_SUPPORT + 1)
        count = oracle.bartlett_dense(theta, lam, ORACLE_SUPPORT)
        expected = _mixing_oracle(count, lam)
        _assert_close(
            np.exp(compounds.log_bartlett_compound(theta, lam, n)), expected, 1e-9
        )

    def test_compound_geometric(self):
        n = np.arange(ORACLE_SUPPORT + 1)
        expected = _mixing_oracle(oracle.geometric_dense(0.5, ORACLE_SUPPORT), 0.5)
        _assert_close(
            np.exp(compounds.log_bartlett_compound(0.0, 0.5, n)), expected, 1e-9
        )


class DelaporteCompoundTest(parameterized.TestCase):
    def test_values(self):
        params = claim_number.DelaporteParams(1.0, 0.5, 2)
        self.assertAlmostEqual(
            compounds.delaporte_compound_pmf(params, 0), math.log(0.25) - 1.0, places=14
        )
        self.assertAlmostEqual(
            compounds.delaporte_compound_pmf(params, 1), math.log(0.5) - 1.5, places=14
        )

    def test_rejects_unit_shape(self):
        with self.assertRaises(DomainError):
            params = claim_number.DelaporteParams(1.0, 0.5, 1)
            compounds.delaporte_compound_pmf(params, 2)

    def test_convolution_of_compound_bartlett(self):
        n_max = 10
        part = oracle.DensePmf(
            np.exp(compounds.log_bartlett_compound(1.0 / 3, 0.5, np.arange(n_max + 1)))
        )
        expected = oracle.convolution_power(part, 3, n_max).p[5]
        params = claim_number.DelaporteParams(1.0, 0.5, 3)
        value = compounds.delaporte_compound_pmf(params, 5)
        self.assertLess(abs(math.exp(value) / expected - 1.0), 1e-10)

    @parameterized.parameters(
        [dict(m=m, **point) for point in GRID for m in (2, 3)]
    )
    def test_mixing_oracle(self, theta, lam, m):
        count = oracle.delaporte_dense(theta, lam, m, ORACLE_SUPPORT)
        expected = _mixing_oracle(count, lam)
        closed = np.exp(compounds.log_delaporte_compound(theta, lam, m, ORACLE_SUPPORT))
        _assert_close(closed, expected, 1e-9)

    def test_no_poisson_part(self):
        count = oracle.negative_binomial_dense(2, 0.5, ORACLE_SUPPORT)
        expected = _mixing_oracle(count, 0.5)
        closed = np.exp(compounds.log_delaporte_compound(0.0, 0.5, 2, ORACLE_SUPPORT))
        _assert_close(closed, expected, 1e-9)


class QTableTest(absltest.TestCase):
    def test_first_tables(self):
        np.testing.assert_allclose(compounds.q_table(1, 1.0, 0.5).entries, [1.0])
        np.testing.assert_allclose(compounds.q_table(2, 1.0, 0.5).entries, [2.0, 1.0])

    def test_matches_series_constant(self):
        q = compounds.q_table(3, 1.0, 0.5).entries
        series = compounds.s_constant(3, 1.0, 0.5, compounds.SERIES)
        self.assertLess(abs(q.sum() / 0.5 / series - 1.0), 1e-10)

    def test_matches_linear_oracle(self):
        np.testing.assert_allclose(
            compounds.q_table(6, 0.7, 0.3).entries,
            oracle.q_table_dense(6, 0.7, 0.3),
            rtol=1e-13,
        )

    def test_v_distribution(self):
        np.testing.assert_allclose(
            compounds.v_distribution(1, 1.0, 0.5).probabilities, [1.0]
        )
        np.testing.assert_allclose(
            compounds.v_distribution(2, 1.0, 0.5).probabilities, [2.0 / 3, 1.0 / 3]
        )
        self.assertAlmostEqual(
            compounds.v_distribution(7, 0.4, 0.6).probabilities.sum(), 1.0, places=14
        )


class SConstantTest(parameterized.TestCase):
    @parameterized.parameters(
        (0, 1.0, 0.5, 1.0),
        (1, 1.0, 0.5, 2.0),
        (-1, 1.0, 0.5, 1.0 / 1.5),
        (2, 1.0, 0.5, 6.0),
    )
    def test_known_values(self, k, theta, lam, expected):
        for method in (compounds.AUTO, compounds.SERIES, compounds.RECURSION):
            value = compounds.s_constant(k, theta, lam, method)
            self.assertLess(abs(value / expected - 1.0), 1e-12)

    @parameterized.parameters(
        (0.3, 0.2), (0.7, 0.5), (2.5, 0.5), (1.0, 0.8), (0.05, 0.4)
    )
    def test_worked_negative_constant(self, theta, lam):
        expected = (theta * (1.0 - lam) + lam) / (theta ** 2 * (theta + lam))
        value = compounds.s_constant(-1, theta, lam)
        self.assertLess(abs(value / expected - 1.0), 1e-12)
        s_zero = compounds.s_constant(0, theta, lam)
        s_one = compounds.s_constant(1, theta, lam)
        self.assertAlmostEqual(s_zero, 1.0 / theta, places=12)
        self.assertAlmostEqual(s_one, 1.0 / (1.0 - lam), places=12)

    @parameterized.parameters(
        [
            dict(k=k, theta=theta, lam=lam)
            for k in range(1, 7)
            for theta, lam in ((1.0, 0.5), (0.5, 0.8), (2.0, 0.2), (0.0, 0.5))
        ]
    )
    def test_three_methods_agree(self, k, theta, lam):
        series = compounds.s_constant(k, theta, lam, compounds.SERIES)
        recursion = compounds.s_constant(k, theta, lam, compounds.RECURSION)
        closed = compounds.s_constant(k, theta, lam, compounds.CLOSED)
        self.assertLess(abs(recursion / series - 1.0), 1e-9)
        self.assertLess(abs(closed / series - 1.0), 1e-9)

    @parameterized.parameters(
        (-1, 1.0, 0.5), (-2, 1.0, 0.5), (-2, 2.0, 0.8), (-1, 0.4, 0.3)
    )
    def test_negative_orders(self, k, theta, lam):
        series = compounds.s_constant(k, theta, lam, compounds.SERIES)
        recursion = compounds.s_constant(k, theta, lam, compounds.RECURSION)
        self.assertLess(abs(recursion / series - 1.0), 1e-9)

    def test_domain(self):
        with self.assertRaises(DomainError):
            compounds.s_constant(0, 0.0, 0.5)
        with self.assertRaises(DomainError):
            compounds.s_constant(-1, 1.0, 0.5, compounds.CLOSED)
        with self.assertRaises(DomainError):
            compounds.s_constant(2, 1.0, 1.0)

    def test_cache_reuses_values(self):
        cache = compounds.SConstantCache(1.0, 0.5)
        first = cache.log_s(3, 2, compounds.RECURSION)
        self.assertEqual(cache.log_s(3, 2, compounds.RECURSION), first)
        self.assertAlmostEqual(
            math.exp(first),
            compounds.s_constant(3, 2.0, 0.5, compounds.SERIES),
            places=9,
        )


class ShiftedMixtureTest(parameterized.TestCase):
    def test_order_zero_is_gpd(self):
        params = compounds.ShiftedMixtureParams(0, 1.0, 0.5)
        value = compounds.shifted_mixture_pmf(params, 3)
        self.assertAlmostEqual(
            value, compounds.gpd_pmf(compounds.GpdParams(1.0, 0.5), 3), places=13
        )

    def test_order_one_is_compound_bartlett(self):
        params = compounds.ShiftedMixtureParams(1, 1.0, 0.5)
        value = compounds.shifted_mixture_pmf(params, 3)
        expected = compounds.bartlett_compound_pmf(1.0, 0.5, 3)
        self.assertAlmostEqual(value, expected, places=13)

    def test_normalization(self):
        params = compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=3)
        table = compounds.compound_log_pmf_table(params)
        self.assertAlmostEqual(table.total_mass() + table.tail_bound, 1.0, delta=1e-10)

    def test_rejects_zero_theta_for_nonpositive_order(self):
        with self.assertRaises(DomainError):
            compounds.ShiftedMixtureParams(0, 0.0, 0.5)

    @parameterized.parameters(
        [
            dict(k=k, theta=theta, lam=lam)
            for k in (1, 2, 3)
            for theta, lam in SHIFTED_BASES
        ]
    )
    def test_random_shift_representation(self, k, theta, lam):
        count = oracle.representation_count_dense(k, theta, lam, ORACLE_SUPPORT)
        expected = _mixing_oracle(count, lam)
        log_s = compounds.log_s_constant(k, theta, lam)
        closed = np.exp(
            compounds.log_shifted(k, theta, lam, np.arange(ORACLE_SUPPORT + 1), log_s)
        )
        _assert_close(closed, expected, 1e-9)

    @parameterized.parameters(-2, -1, 0, 1, 2, 3)
    def test_weighted_gpd_identity(self, k):
        params = compounds.ShiftedMixtureParams(k, 1.3, 0.6)
        for n in range(101):
            self.assertAlmostEqual(
                compounds.weighted_gpd_pmf(k, 1.3, 0.6, n),
                compounds.shifted_mixture_pmf(params, n),
                delta=1e-10,
            )


class RecursionTest(parameterized.TestCase):
    @parameterized.parameters(GRID)
    def test_gpd(self, theta, lam):
        for n in range(1, 101):
            self.assertAlmostEqual(
                compounds.gpd_recursion_rhs(theta, lam, n),
                float(compounds.log_gpd(theta, lam, n)),
                delta=1e-12,
            )

    @parameterized.parameters(GRID)
    def test_bartlett(self, theta, lam):
        for n in range(1, 101):
            self.assertAlmostEqual(
                compounds.bartlett_recursion_rhs(theta, lam, n),
                float(compounds.log_bartlett_compound(theta, lam, n)),
                delta=1e-12,
            )

    @parameterized.parameters(GRID)
    def test_delaporte(self, theta, lam):
        for m in (2, 3):
            for n in range(1, 101):
                self.assertAlmostEqual(
                    compounds.delaporte_recursion_rhs(theta, lam, m, n),
                    compounds.log_delaporte_compound_point(theta, lam, m, n),
                    delta=1e-11,
                )

    @parameterized.parameters(
        [
            dict(k=k, theta=theta, lam=lam)
            for k in (-1, 2, 3)
            for theta, lam in ((1.0, 0.5), (2.0, 0.8))
        ]
    )
    def test_shifted(self, k, theta, lam):
        cache = compounds.SConstantCache(theta, lam)
        log_s = cache.log_s(k, 0)
        for n in range(1, 101):
            self.assertAlmostEqual(
                compounds.shifted_recursion_rhs(k, theta, lam, n, cache=cache),
                float(compounds.log_shifted(k, theta, lam, n, log_s)),
                delta=1e-12,
            )


class MomentTest(parameterized.TestCase):
    def test_examples(self):
        gpd = compounds.ShiftedMixtureParams(0, 1.0, 0.5)
        bartlett = compounds.ShiftedMixtureParams(1, 1.0, 0.5)
        for method in compounds.MOMENT_METHODS:
            self.assertEqual(compounds.mixture_moment(gpd, 0, method), 1.0)
            gpd_mean = compounds.mixture_moment(gpd, 1, method)
            bartlett_mean = compounds.mixture_moment(bartlett, 1, method)
            self.assertAlmostEqual(gpd_mean, 2.0, places=12)
            self.assertAlmostEqual(bartlett_mean, 4.0, places=12)
            second = compounds.mixture_moment(gpd, 2, method)
            self.assertAlmostEqual(second - 4.0, 8.0, places=10)

    @parameterized.parameters(
        [
            dict(k=k, theta=theta, lam=lam)
            for k in (-1, 0, 1, 2)
            for theta, lam in ((1.0, 0.5), (2.0, 0.3))
        ]
    )
    def test_methods_agree(self, k, theta, lam):
        params = compounds.ShiftedMixtureParams(k, theta, lam)
        for order in range(1, 5):
            lemma = compounds.mixture_moment(params, order, compounds.LEMMA)
            power = compounds.mixture_moment(params, order, compounds.SHIFTED_POWER)
            self.assertLess(abs(lemma / power - 1.0), 1e-8)

    @parameterized.parameters(-1, 0, 1, 2)
    def test_shifted_power_identity(self, k):
        theta, lam = 1.0, 0.5
        params = compounds.FamilyParams(compounds.SHIFTED, lam, theta=theta, k=k)
        table = compounds.compound_log_pmf_table(params, epsilon=1e-16)
        values = theta + lam * np.arange(len(table))
        for m in range(1, 5):
            summed = np.sum(values ** m * table.probabilities())
            expected = compounds.s_constant(k + m, theta, lam) / compounds.s_constant(
                k, theta, lam
            )
            self.assertLess(abs(summed / expected - 1.0), 1e-8)

    @parameterized.parameters(
        dict(params=compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)),
        dict(params=compounds.FamilyParams(compounds.BARTLETT, 0.5, theta=1.0)),
        dict(params=compounds.FamilyParams(compounds.DELAPORTE, 0.4, theta=1.0, m=3)),
        dict(params=compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=2)),
        dict(params=compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=-1)),
        dict(params=compounds.FamilyParams(compounds.BOREL_TANNER, 0.5, m=2)),
    )
    def test_mean_var_against_summed_moments(self, params):
        table = compounds.compound_log_pmf_table(params, epsilon=1e-16)
        mean, variance = compounds.compound_mean_var(params)
        self.assertLess(abs(table.mean() / mean - 1.0), 1e-10)
        self.assertLess(abs(table.variance() / variance - 1.0), 1e-9)

    def test_overview_values(self):
        gpd = compounds.compound_mean_var(
            compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)
        )
        bartlett = compounds.compound_mean_var(
            compounds.FamilyParams(compounds.BARTLETT, 0.5, theta=1.0)
        )
        self.assertAlmostEqual(gpd[0], 2.0)
        self.assertAlmostEqual(gpd[1], 8.0)
        self.assertAlmostEqual(bartlett[0], 4.0)


class TableTest(parameterized.TestCase):
    @parameterized.parameters(
        [
            dict(family=family, theta=theta, lam=lam)
            for family in COMPOUNDS
            for theta, lam in itertools.product(THETAS, LAMBDAS)
        ]
    )
    def test_normalization(self, family, theta, lam):
        params = compounds.FamilyParams(family, lam, theta=theta, m=2, k=2)
        table = compounds.compound_log_pmf_table(params)
        self.assertTrue(table.tail_certified)
        self.assertAlmostEqual(table.total_mass() + table.tail_bound, 1.0, delta=1e-10)

    @parameterized.parameters(*COMPOUNDS)
    def test_long_support_at_high_lambda(self, family):
        params = compounds.FamilyParams(family, 0.9, theta=1.0, m=2, k=2)
        table = compounds.compound_log_pmf_table(params, n_max=2000)
        self.assertTrue(np.all(np.isfinite(table.log_p)))
        self.assertTrue(table.tail_certified)
        self.assertLessEqual(table.total_mass(), 1.0 + 1e-12)
        self.assertGreaterEqual(table.total_mass() + table.tail_bound, 1.0 - 1e-8)
        if family == compounds.GPD:
            total = table.total_mass() + table.tail_bound
            self.assertAlmostEqual(total, 1.0, delta=1e-8)

    @parameterized.parameters(
        dict(params=compounds.FamilyParams(compounds.GPD, 0.5, theta=1.0)),
        dict(params=compounds.FamilyParams(compounds.BARTLETT, 0.3, theta=2.0)),
        dict(params=compounds.FamilyParams(compounds.DELAPORTE, 0.5, theta=1.0, m=3)),
        dict(params=compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=3)),
        dict(params=compounds.FamilyParams(compounds.SHIFTED, 0.5, theta=1.0, k=-1)),
        dict(params=compounds.FamilyParams(compounds.BOREL, 0.5)),
    )
    def test_pgf_matches_series(self, params):
        table = compounds.compound_log_pmf_table(params, epsilon=1e-16)
        for z in (0.0, 0.3, 0.7, 1.0):
            series = np.sum(table.probabilities() * z ** np.arange(len(table)))
            pgf = compounds.compound_pgf(params, z)
            self.assertAlmostEqual(pgf, series, delta=1e-12)

    def test_unknown_family(self):
        with self.assertRaises(DomainError):
            compounds.FamilyParams("poisson", 0.5)


if __name__ == "__main__":
    absltest.main()
