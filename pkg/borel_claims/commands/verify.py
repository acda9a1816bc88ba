"""
The `verify` command: closed forms, recursions, identities and Panjer schemes
checked against the brute-force oracle, with optional Monte Carlo checks.
"""

import dataclasses
import math
from fractions import Fraction

import numpy as np
from absl import flags, logging

from borel_claims import borel, compounds, distribution, numerics, oracle, panjer
from borel_claims import simulate
from borel_claims.commands.simulation import claim_sampler

FLAGS = flags.FLAGS

COUNTEREXAMPLE = "k=-1-counterexample"

flags.DEFINE_multi_enum(
    "include",
    [],
    [COUNTEREXAMPLE],
    "Expected findings to add to the report.",
)
flags.DEFINE_bool(
    "mc", False, "Add the Monte Carlo checks (uses --samples and --seed)."
)

GRID = [(theta, lam) for theta in (0.5, 1.0, 2.0) for lam in (0.2, 0.5, 0.8)]
ORACLE_SUPPORT = 30
RESIDUAL_SUPPORT = 100
PANJER_SUPPORT = 12
DECONVOLUTION_SUPPORT = 10
RANGE_LAMBDA = 0.9
RANGE_SUPPORT = 2000
N_SEVERITIES = 5
MAX_CLAIM = 4


@dataclasses.dataclass(frozen=True)
class Check:
    id: str
    passed: bool
    max_rel_err: float
    expected_finding: bool = False
    detail: str = ""

    def to_dict(self):
        return dataclasses.asdict(self)


def relative_error(actual, expected):
    """
    Largest |actual - expected| / |expected|. Entries with expected == 0 count
    absolutely.
    """
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = np.abs(expected)
    difference = np.abs(actual - expected)
    safe = np.where(scale > 0.0, scale, 1.0)
    errors = np.where(scale > 0.0, difference / safe, difference)
    return float(np.max(errors)) if errors.size else 0.0


def _log_residual(lhs, rhs):
    return float(np.max(np.abs(np.expm1(np.asarray(rhs) - np.asarray(lhs)))))


def _within(check_id, errors, tolerance, detail):
    worst = max(errors) if errors else 0.0
    return Check(
        check_id,
        bool(worst <= tolerance),
        worst,
        detail="{}; tolerance {}".format(detail, tolerance),
    )


def closed_form_checks():
    errors, representation = [], []
    for theta, lam in GRID:
        progeny = oracle.borel_dense(lam, ORACLE_SUPPORT)
        counts = [
            (compounds.FamilyParams(compounds.GPD, lam, theta), oracle.poisson_dense),
            (
                compounds.FamilyParams(compounds.BARTLETT, lam, theta),
                lambda t, n: oracle.bartlett_dense(t, lam, n),
            ),
        ]
        for m in (2, 3):
            counts.append(
                (
                    compounds.FamilyParams(compounds.DELAPORTE, lam, theta, m=m),
                    lambda t, n, m=m: oracle.delaporte_dense(t, lam, m, n),
                )
            )
        for k in (1, 2, 3):
            counts.append(
                (
                    compounds.FamilyParams(compounds.SHIFTED, lam, theta, k=k),
                    lambda t, n, k=k: oracle.representation_count_dense(k, t, lam, n),
                )
            )
        for params, count_law in counts:
            expected = oracle.compound_by_mixing(
                count_law(theta, ORACLE_SUPPORT), progeny, ORACLE_SUPPORT
            ).p
            actual = np.exp(compounds.log_pmf_array(params, ORACLE_SUPPORT))
            target = representation if params.family == compounds.SHIFTED else errors
            target.append(relative_error(actual, expected))
    return [
        _within(
            "closed-form-vs-mixing",
            errors,
            1e-9,
            "gpd, bartlett and delaporte (m=2,3) on n <= {}".format(ORACLE_SUPPORT),
        ),
        _within(
            "shifted-representation",
            representation,
            1e-9,
            "V_k + Delaporte(k + V_k) compounded with Borel, k=1,2,3",
        ),
    ]


def recursion_checks():
    n = np.arange(1, RESIDUAL_SUPPORT + 1)
    residuals = {"gpd": [], "bartlett": [], "delaporte": [], "shifted": []}
    for theta, lam in GRID:
        residuals["gpd"].append(
            _log_residual(
                compounds.log_gpd(theta, lam, n),
                [compounds.gpd_recursion_rhs(theta, lam, i) for i in n],
            )
        )
        residuals["bartlett"].append(
            _log_residual(
                compounds.log_bartlett_compound(theta, lam, n),
                [compounds.bartlett_recursion_rhs(theta, lam, i) for i in n],
            )
        )
        residuals["delaporte"].append(
            _log_residual(
                compounds.log_delaporte_compound(theta, lam, 2, RESIDUAL_SUPPORT)[1:],
                [compounds.delaporte_recursion_rhs(theta, lam, 2, i) for i in n],
            )
        )
        cache = compounds.SConstantCache(theta, lam)
        residuals["shifted"].append(
            _log_residual(
                compounds.log_shifted(2, theta, lam, n, cache.log_s(2, 0)),
                [compounds.shifted_recursion_rhs(2, theta, lam, i, cache) for i in n],
            )
        )
    tolerances = {"gpd": 1e-12, "bartlett": 1e-12, "delaporte": 1e-11, "shifted": 1e-12}
    return [
        _within(
            "recursion-{}".format(name),
            errors,
            tolerances[name],
            "pointwise residual on n <= {}".format(RESIDUAL_SUPPORT),
        )
        for name, errors in residuals.items()
    ]


def s_constant_checks():
    agreement, worked = [], []
    for theta, lam in GRID:
        cache = compounds.SConstantCache(theta, lam)
        for k in range(1, 7):
            values = [
                math.exp(cache.log_s(k, 0, method)) for method in compounds.S_METHODS
            ]
            agreement.append(relative_error(values[1:], [values[0]] * 2))
        for k in (-1, -2):
            series = math.exp(cache.log_s(k, 0, compounds.SERIES))
            recursion = math.exp(cache.log_s(k, 0, compounds.RECURSION))
            agreement.append(relative_error(recursion, series))
        series = [math.exp(cache.log_s(k, 0, compounds.SERIES)) for k in (0, 1, -1)]
        closed = [
            1.0 / theta,
            1.0 / (1.0 - lam),
            (theta * (1.0 - lam) + lam) / (theta ** 2 * (theta + lam)),
        ]
        worked.append(relative_error(series, closed))
    return [
        _within(
            "s-constant-agreement",
            agreement,
            1e-9,
            "series, recursion and closed form for k=1..6; "
            "series and recursion for k=-1,-2",
        ),
        _within("s-constant-worked-values", worked, 1e-12, "S(0), S(1) and S(-1)"),
    ]


def _random_severities(seed):
    rng = simulate.make_rng(seed)
    severities = []
    for max_claim in rng.integers(1, MAX_CLAIM + 1, size=N_SEVERITIES):
        weights = rng.dirichlet(np.ones(max_claim))
        weights[-1] = 1.0 - np.sum(weights[:-1])
        severities.append(panjer.SeverityPmf.from_weights(weights))
    return severities


def panjer_checks(seed, max_grid=panjer.DEFAULT_MAX_GRID):
    families = [
        compounds.FamilyParams(compounds.GPD, 0.5, 1.0),
        compounds.FamilyParams(compounds.BARTLETT, 0.5, 1.0),
        compounds.FamilyParams(compounds.SHIFTED, 0.5, 1.0, k=2),
        compounds.FamilyParams(compounds.DELAPORTE, 0.5, 1.0, m=2),
    ]
    oracle_errors, unit_errors = [], []
    for params in families:
        count = oracle.DensePmf(np.exp(compounds.log_pmf_array(params, PANJER_SUPPORT)))
        for severity in _random_severities(seed):
            q = panjer.aggregate_pmf(
                params, severity, PANJER_SUPPORT, max_grid=max_grid
            )
            expected = oracle.compound_by_mixing(
                count,
                oracle.DensePmf(severity.f).restrict(PANJER_SUPPORT),
                PANJER_SUPPORT,
            ).p
            oracle_errors.append(relative_error(q.probabilities(), expected))
        unit = panjer.aggregate_pmf(
            params, panjer.SeverityPmf.unit(), 40, max_grid=max_grid
        )
        unit_errors.append(
            _log_residual(compounds.log_pmf_array(params, 40), unit.log_p)
        )
    return [
        _within(
            "panjer-vs-mixing",
            oracle_errors,
            1e-9,
            "{} random severities with K <= {} from seed {}".format(
                N_SEVERITIES, MAX_CLAIM, seed
            ),
        ),
        _within("panjer-unit-severity", unit_errors, 1e-10, "unit claims, n <= 40"),
    ]


def moment_checks():
    methods = []
    for theta, lam in GRID:
        cache = compounds.SConstantCache(theta, lam)
        for k in (-1, 0, 1, 2):
            p = compounds.ShiftedMixtureParams(k, theta, lam)
            lemma = [
                compounds.mixture_moment(p, o, compounds.LEMMA, cache)
                for o in range(1, 5)
            ]
            power = [
                compounds.mixture_moment(p, o, compounds.SHIFTED_POWER, cache)
                for o in range(1, 5)
            ]
            methods.append(relative_error(power, lemma))
    table = []
    for params in (
        compounds.FamilyParams(compounds.BOREL, 0.5),
        compounds.FamilyParams(compounds.BOREL_TANNER, 0.5, m=2),
        compounds.FamilyParams(compounds.GPD, 0.5, 1.0),
        compounds.FamilyParams(compounds.BARTLETT, 0.5, 1.0),
        compounds.FamilyParams(compounds.DELAPORTE, 0.5, 1.0, m=2),
    ):
        pmf = compounds.compound_log_pmf_table(params, epsilon=1e-16)
        mean = pmf.raw_moment(1)
        table.append(
            relative_error(
                [mean, pmf.raw_moment(2) - mean ** 2],
                compounds.compound_mean_var(params),
            )
        )
    return [
        _within(
            "moments-lemma-vs-shifted-power", methods, 1e-8, "orders 1..4, k=-1..2"
        ),
        _within(
            "moments-closed-form", table, 1e-10, "mean and variance against table sums"
        ),
    ]


def identity_checks():
    multinomial = [
        relative_error(*oracle.multinomial_identity_check(n, k))
        for n in range(1, oracle.ABEL_BUDGET_N + 1)
        for k in range(1, n + 1)
    ]
    hurwitz = [
        relative_error(
            *oracle.abel_sum_check(
                oracle.HURWITZ_MULTINOMIAL, m=m, n=n, theta=1.3, lam=0.4
            )
        )
        for m in range(1, oracle.ABEL_BUDGET_M + 1)
        for n in range(oracle.ABEL_BUDGET_N + 1)
    ]
    abel = [
        relative_error(*oracle.abel_sum_check(oracle.ABEL_A, n=n, k=k))
        for n in range(1, oracle.ABEL_BUDGET_N + 1)
        for k in range(2, n + 2)
    ]
    support = np.arange(41)
    progeny = [
        relative_error(
            oracle.enumerate_gw_progeny(lam, 40).p[1:],
            np.exp(borel.log_borel(lam, support))[1:],
        )
        for lam in (0.2, 0.5, 0.9, 1.0)
    ]
    tanner = [
        relative_error(
            np.exp(borel.log_borel_tanner(0.5, m, support))[m:],
            oracle.borel_tanner_dense(0.5, m, 40).p[m:],
        )
        for m in range(1, 6)
    ]
    return [
        _within("multinomial-identity", multinomial, 1e-12, "1 <= k <= n <= 12"),
        _within("abel-hurwitz-multinomial", hurwitz, 1e-11, "m <= 4, n <= 12"),
        _within("abel-a", abel, 1e-12, "2 <= k <= n + 1, n <= 12"),
        _within("galton-watson-progeny", progeny, 1e-11, "n <= 40"),
        _within("borel-tanner-convolution", tanner, 1e-10, "m <= 5, n <= 40"),
    ]


def _scaled_shifted_target(k, theta, lam):
    """
    e^(theta + lam n) S(k) p_k(n) = (theta + lam n)^(n + k - 1) / n! on
    0..DECONVOLUTION_SUPPORT, exact in rational arithmetic.
    """
    theta, lam = Fraction(theta), Fraction(lam)
    return [
        (theta + lam * n) ** (n + k - 1) / math.factorial(n)
        for n in range(DECONVOLUTION_SUPPORT + 1)
    ]


def _deconvolve_shifted(k, theta, lam):
    """
    Count sequence c with sum_m c(m) Borel^(*m) equal to the shifted law of
    order k, and the relative error of the exact target against the table.
    """
    scaled = _scaled_shifted_target(k, theta, lam)
    log_scale = -theta - compounds.log_s_constant(k, theta, lam)
    support = np.arange(DECONVOLUTION_SUPPORT + 1)
    exact = np.array([float(value) for value in scaled])
    exact *= np.exp(log_scale - lam * support)
    params = compounds.FamilyParams(compounds.SHIFTED, lam, theta, k=k)
    table_error = relative_error(
        np.exp(compounds.log_pmf_array(params, DECONVOLUTION_SUPPORT)), exact
    )
    counts = oracle.borel_deconvolve_scaled(scaled, lam, DECONVOLUTION_SUPPORT)
    counts = np.array([float(c) for c in counts]) * math.exp(log_scale)
    return counts, table_error


def deconvolution_checks(include):
    theta, lam = 0.4, 0.5
    poisson, poisson_table = _deconvolve_shifted(0, theta, lam)
    bartlett, bartlett_table = _deconvolve_shifted(1, theta, lam)
    errors = [
        relative_error(poisson, oracle.poisson_dense(theta, DECONVOLUTION_SUPPORT).p),
        relative_error(
            bartlett, oracle.bartlett_dense(theta, lam, DECONVOLUTION_SUPPORT).p
        ),
        poisson_table,
        bartlett_table,
    ]
    checks = [
        _within(
            "deconvolution",
            errors,
            1e-9,
            "k=0 recovers Poisson and k=1 Bartlett counts",
        )
    ]
    if COUNTEREXAMPLE in include:
        counts, _ = _deconvolve_shifted(-1, theta, lam)
        checks.append(
            Check(
                COUNTEREXAMPLE,
                bool(counts[2] < 0.0),
                0.0,
                expected_finding=True,
                detail="c(2) = {!r} for k=-1, theta={}, lambda={}: "
                "no count law compounds with Borel to this law".format(
                    float(counts[2]), theta, lam
                ),
            )
        )
    return checks


def numerical_range_check():
    errors = []
    for params in (
        compounds.FamilyParams(compounds.BOREL, RANGE_LAMBDA),
        compounds.FamilyParams(compounds.BOREL_TANNER, RANGE_LAMBDA, m=2),
        compounds.FamilyParams(compounds.GPD, RANGE_LAMBDA, 1.0),
        compounds.FamilyParams(compounds.BARTLETT, RANGE_LAMBDA, 1.0),
        compounds.FamilyParams(compounds.DELAPORTE, RANGE_LAMBDA, 1.0, m=2),
        compounds.FamilyParams(compounds.SHIFTED, RANGE_LAMBDA, 1.0, k=2),
    ):
        table = compounds.compound_log_pmf_table(params, RANGE_SUPPORT)
        if np.any(np.isnan(table.log_p)) or np.any(table.log_p == np.inf):
            errors.append(math.inf)
            continue
        total = table.total_mass()
        error = max(0.0, total - 1.0, 1.0 - total - table.tail_bound)
        errors.append(error)
    return _within(
        "numerical-range",
        errors,
        1e-8,
        "n <= {} at lambda = {}: mass plus certified tail".format(
            RANGE_SUPPORT, RANGE_LAMBDA
        ),
    )


def monte_carlo_checks(config):
    checks = []
    for params in (
        compounds.FamilyParams(compounds.BOREL, 0.5),
        compounds.FamilyParams(compounds.BOREL_TANNER, 0.4, m=3),
        compounds.FamilyParams(compounds.GPD, 0.5, 1.0),
        compounds.FamilyParams(compounds.BARTLETT, 0.5, 1.0),
        compounds.FamilyParams(compounds.DELAPORTE, 0.3, 1.0, m=3),
        compounds.FamilyParams(compounds.SHIFTED, 0.5, 1.0, k=2),
    ):
        target = compounds.compound_log_pmf_table(params)
        stats = distribution.monte_carlo_check(
            target,
            claim_sampler(params, FLAGS.generation_cap),
            config.samples,
            config.seed,
        )
        bound = 5.0 * math.sqrt(target.support_size / config.samples)
        checks.append(
            Check(
                "monte-carlo-{}".format(params.family),
                bool(stats.tv_distance < bound),
                stats.tv_distance,
                detail="tv distance over {} samples; bound {}; {} capped".format(
                    config.samples, bound, stats.n_cap_exceeded
                ),
            )
        )

    shifted = compounds.FamilyParams(compounds.SHIFTED, 0.5, 1.0, k=2)
    first, second = simulate.spawn_seeds(config.seed, 2)
    representation = simulate.sample_compound(
        shifted, simulate.make_rng(first, FLAGS.bit_generator), config.samples
    )
    inverse_cdf = simulate.sample_compound(
        shifted,
        simulate.make_rng(second, FLAGS.bit_generator),
        config.samples,
        route=simulate.INVERSE_CDF,
    )
    test = simulate.two_sample_chi_square(representation, inverse_cdf)
    checks.append(
        Check(
            "monte-carlo-shifted-routes",
            bool(test.pvalue > 0.001),
            0.0,
            detail="chi-square p-value {} over {} pooled bins".format(
                test.pvalue, test.n_bins
            ),
        )
    )
    return checks


def verification_report(config, include=None, mc=None):
    """
    Run every check and collect the report.

    Returns
    -------
    dict
        {"passed": bool, "checks": [...]}, each check with id, passed,
        max_rel_err, expected_finding and detail.
    """
    include = FLAGS.include if include is None else include
    mc = FLAGS.mc if mc is None else mc
    checks = []
    checks.extend(closed_form_checks())
    checks.extend(recursion_checks())
    checks.extend(s_constant_checks())
    checks.extend(panjer_checks(config.seed, config.max_grid))
    checks.extend(moment_checks())
    checks.extend(identity_checks())
    checks.extend(deconvolution_checks(include))
    checks.append(numerical_range_check())
    if mc:
        checks.extend(monte_carlo_checks(config))

    for check in checks:
        if check.passed:
            logging.info("Check {} passed.".format(check.id))
        else:
            logging.warning("Check {} failed: {}".format(check.id, check.detail))
    return {
        "passed": all(check.passed for check in checks),
        "checks": [check.to_dict() for check in checks],
    }
