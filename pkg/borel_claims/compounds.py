"""
Compound claim-number laws with Borel summands: the generalized Poisson law,
the compound Bartlett and compound Delaporte laws, and the randomly shifted
Delaporte mixtures with their normalizing constants S(k, theta, lambda).
"""

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import special

from borel_claims import borel, claim_number, numerics
from borel_claims.errors import ConvergenceError, DomainError

BOREL = "borel"
BOREL_TANNER = "borel-tanner"
GPD = "gpd"
BARTLETT = "bartlett"
DELAPORTE = "delaporte"
SHIFTED = "shifted"
FAMILIES = (BOREL, BOREL_TANNER, GPD, BARTLETT, DELAPORTE, SHIFTED)

SERIES = "series"
RECURSION = "recursion"
CLOSED = "closed"
AUTO = "auto"
S_METHODS = (SERIES, RECURSION, CLOSED)

LEMMA = "lemma"
SHIFTED_POWER = "shifted-power"
MOMENT_METHODS = (LEMMA, SHIFTED_POWER)

# Relative accuracy of the certified sums behind S(k, theta, lambda).
S_RELATIVE_EPSILON = 1e-15
S_MAX_TERMS = 100000


def _check_k(k):
    if int(k) != k:
        raise DomainError("The shift order k must be an integer, got {}.".format(k))


def check_shifted(k, theta, lam):
    _check_k(k)
    claim_number.check_open_lambda(lam)
    claim_number.check_theta(theta, positive=k <= 0)


@dataclass(frozen=True)
class GpdParams:
    theta: float
    lam: float

    def __post_init__(self):
        claim_number.check_theta(self.theta)
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError("lambda must lie in [0, 1], got {}.".format(self.lam))


@dataclass(frozen=True)
class ShiftedMixtureParams:
    k: int
    theta: float
    lam: float

    def __post_init__(self):
        check_shifted(self.k, self.theta, self.lam)


@dataclass(frozen=True)
class FamilyParams:
    """
    A claim-number law of any supported family. Only the parameters the family
    uses are validated; the others are ignored.
    """

    family: str
    lam: float
    theta: float = 0.0
    m: int = 1
    k: int = 0

    def __post_init__(self):
        if self.family == BOREL:
            borel.BorelParams(self.lam)
        elif self.family == BOREL_TANNER:
            borel.BorelTannerParams(self.lam, self.m)
        elif self.family == GPD:
            GpdParams(self.theta, self.lam)
        elif self.family == BARTLETT:
            claim_number.BartlettParams(self.theta, self.lam)
        elif self.family == DELAPORTE:
            claim_number.DelaporteParams(self.theta, self.lam, self.m)
        elif self.family == SHIFTED:
            ShiftedMixtureParams(self.k, self.theta, self.lam)
        else:
            raise DomainError(
                "Unknown family {}; choose one of {}.".format(
                    self.family, ", ".join(FAMILIES)
                )
            )


@dataclass(frozen=True)
class QTable:
    k: int
    theta: float
    lam: float
    log_q: np.ndarray

    @property
    def entries(self):
        return np.exp(self.log_q)


@dataclass(frozen=True)
class VDistribution:
    k: int
    probabilities: np.ndarray


# Log PMF kernels, vectorized over n.


def log_gpd(theta, lam, n):
    """theta (theta + lam n)^(n - 1) e^(-(theta + lam n)) / n!"""
    n = np.asarray(n, dtype=np.float64)
    if theta == 0.0:
        return np.where(n == 0, 0.0, numerics.NEG_INF)
    x = theta + lam * n
    values = math.log(theta) + special.xlogy(n - 1, x) - x - special.gammaln(n + 1.0)
    return np.where(n >= 0, values, numerics.NEG_INF)


def log_bartlett_compound(theta, lam, n):
    """(1 - lam) (theta + lam n)^n e^(-(theta + lam n)) / n!"""
    n = np.asarray(n, dtype=np.float64)
    x = theta + lam * n
    values = math.log1p(-lam) + special.xlogy(n, x) - x - special.gammaln(n + 1.0)
    return np.where(n >= 0, values, numerics.NEG_INF)


def log_delaporte_compound_point(theta, lam, m, n):
    if n < 0:
        return numerics.ZERO
    if m == 1:
        return numerics.LogWeight(log_bartlett_compound(theta, lam, n))
    x = theta + lam * n
    log_x = math.log(x) if x > 0.0 else numerics.NEG_INF
    return numerics.LogWeight(
        m * math.log1p(-lam)
        + numerics.alpha_binomial_expand(log_x, lam, m, n)
        - x
        - math.lgamma(n + 1)
    )


def log_delaporte_compound(theta, lam, m, n_max):
    """(1 - lam)^m (theta + lam n + lam alpha(m - 1))^n e^(-(theta + lam n)) / n!"""
    return np.array(
        [log_delaporte_compound_point(theta, lam, m, n) for n in range(n_max + 1)]
    )


def log_shifted(k, theta, lam, n, log_s):
    """(theta + lam n)^(n + k - 1) e^(-(theta + lam n)) / (S n!)"""
    n = np.asarray(n, dtype=np.float64)
    x = theta + lam * n
    values = special.xlogy(n + k - 1, x) - x - special.gammaln(n + 1.0) - log_s
    return np.where(n >= 0, values, numerics.NEG_INF)


# Normalizing constants.


def log_q_table(k, theta, lam):
    """
    Log of q_k(0..k-1), built from q_1 = [1] by
    q_k(n) = (theta + lam n) q_{k-1}(n) / (1 - lam)
             + lam^2 (k + n - 2) q_{k-1}(n - 1) / (1 - lam)^2.
    """
    if int(k) != k or k < 1:
        raise DomainError("q tables need an integer k >= 1, got {}.".format(k))
    log_one_minus = math.log1p(-lam)
    log_q = np.array([0.0])
    with np.errstate(divide="ignore"):
        for level in range(2, int(k) + 1):
            n = np.arange(level)
            same = np.concatenate([log_q, [numerics.NEG_INF]])
            lower = np.concatenate([[numerics.NEG_INF], log_q])
            log_q = np.logaddexp(
                np.log(theta + lam * n) + same - log_one_minus,
                2.0 * math.log(lam)
                + np.log(level + n - 2.0)
                + lower
                - 2.0 * log_one_minus,
            )
    return log_q


def q_table(k, theta, lam):
    claim_number.check_theta(theta)
    claim_number.check_open_lambda(lam)
    return QTable(k=int(k), theta=theta, lam=lam, log_q=log_q_table(k, theta, lam))


def _log_s_series(k, theta, lam):
    def log_terms(n):
        return log_shifted(k, theta, lam, n, 0.0)

    log_total, _ = numerics.certified_log_series(
        log_terms,
        numerics.limit_term_ratio(lam),
        rel_epsilon=S_RELATIVE_EPSILON,
        max_terms=S_MAX_TERMS,
    )
    return float(log_total)


def _log_s_closed(k, theta, lam):
    if k < 1:
        raise DomainError("The closed form of S needs k >= 1, got {}.".format(k))
    return float(numerics.log_sum_exp(log_q_table(k, theta, lam))) - math.log1p(-lam)


class SConstantCache:
    """
    Memo of log S(k, theta + j lambda, lambda) for a fixed base (theta, lambda),
    keyed by the exact pair (k, j). Safe to share between threads; concurrent
    duplicate computation only recomputes identical values.
    """

    def __init__(self, theta, lam):
        claim_number.check_theta(theta)
        claim_number.check_open_lambda(lam)
        self.theta = theta
        self.lam = lam
        self._values = {}
        self._lock = threading.Lock()

    def theta_at(self, j):
        return self.theta + j * self.lam

    def _lookup(self, key, compute):
        with self._lock:
            if key in self._values:
                return self._values[key]
        value = compute()
        with self._lock:
            self._values.setdefault(key, value)
        return value

    def log_s(self, k, j=0, method=AUTO):
        """
        Log S(k, theta + j lambda, lambda).

        Parameters
        ----------
        k : int
            Shift order.
        j : int
            Number of lambda shifts of theta.
        method : string
            One of S_METHODS, or AUTO (closed form for k >= 1, recursion
            otherwise).
        """
        _check_k(k)
        k = int(k)
        theta_j = self.theta_at(j)
        if k <= 0 and theta_j <= 0.0:
            raise DomainError("S(k, theta, lambda) with k <= 0 needs theta > 0.")
        if method == AUTO:
            method = CLOSED if k >= 1 else RECURSION
        if method == SERIES:
            return self._lookup(
                (SERIES, k, j), lambda: _log_s_series(k, theta_j, self.lam)
            )
        if method == CLOSED:
            return self._lookup(
                (CLOSED, k, j), lambda: _log_s_closed(k, theta_j, self.lam)
            )
        if method == RECURSION:
            return self._lookup((RECURSION, k, j), lambda: self._recursion(k, j))
        raise DomainError(
            "Unknown S method {}; choose one of {}.".format(
                method, ", ".join(S_METHODS)
            )
        )

    def _recursion(self, k, j):
        theta_j = self.theta_at(j)
        if k == 0:
            return -math.log(theta_j)
        if k == 1:
            return -math.log1p(-self.lam)
        if k < 0:
            upper = math.exp(self.log_s(k + 1, j, RECURSION))
            shifted = math.exp(self.log_s(k + 1, j + 1, RECURSION))
            value = (upper - self.lam * shifted) / theta_j
            if value <= 0.0:
                raise ConvergenceError(
                    "Downward recursion for S({}) lost all precision.".format(k)
                )
            return math.log(value)
        return self._upward(k, j)

    def _upward(self, k, j):
        """S(k, theta_j) = sum_n lam^n theta_{j+n} S(k - 1, theta_{j+n}) for k >= 2."""
        log_lam = math.log(self.lam)
        log_epsilon = math.log(S_RELATIVE_EPSILON)
        log_total = numerics.NEG_INF
        previous = numerics.NEG_INF
        for n in range(S_MAX_TERMS):
            theta_n = self.theta_at(j + n)
            if theta_n <= 0.0:
                continue
            term = n * log_lam + math.log(theta_n) + self.log_s(k - 1, j + n, RECURSION)
            log_total = np.logaddexp(log_total, term)
            if previous > numerics.NEG_INF and term < previous:
                log_r = term - previous
                log_tail = term + log_r - math.log1p(-math.exp(log_r))
                if log_tail - log_total < log_epsilon:
                    return float(log_total)
            previous = term
        raise ConvergenceError(
            "S({}) recursion did not converge within {} terms.".format(k, S_MAX_TERMS)
        )


def log_s_constant(k, theta, lam, method=AUTO, cache=None):
    check_shifted(k, theta, lam)
    if cache is None:
        cache = SConstantCache(theta, lam)
    return cache.log_s(k, 0, method)


def s_constant(k, theta, lam, method=AUTO):
    """
    Normalizing constant

        S(k, theta, lambda)
            = sum_n (theta + lambda n)^(n + k - 1) e^(-(theta + lambda n)) / n!.

    Parameters
    ----------
    k : int
        Shift order; any sign.
    theta : float
        Must be positive when k <= 0.
    lam : float
        In (0, 1).
    method : string
        SERIES (certified direct summation), RECURSION (upward sums over shifted
        theta for k >= 2, downward differences for k <= -1), CLOSED (finite q
        table, k >= 1) or AUTO.

    Returns
    -------
    float
    """
    return math.exp(log_s_constant(k, theta, lam, method))


# Public PMFs.


def gpd_pmf(p, n):
    return numerics.LogWeight(log_gpd(p.theta, p.lam, n))


def bartlett_compound_pmf(theta, lam, n):
    claim_number.BartlettParams(theta, lam)
    return numerics.LogWeight(log_bartlett_compound(theta, lam, n))


def delaporte_compound_pmf(p, n):
    if p.m < 2:
        raise DomainError(
            "The compound Delaporte law needs m >= 2; "
            "m = 1 is the compound Bartlett law."
        )
    return log_delaporte_compound_point(p.theta, p.lam, p.m, n)


def shifted_mixture_pmf(p, n, cache=None):
    log_s = log_s_constant(p.k, p.theta, p.lam, cache=cache)
    return numerics.LogWeight(log_shifted(p.k, p.theta, p.lam, n, log_s))


def weighted_gpd_pmf(k, theta, lam, n):
    """(theta + lam n)^k gpd(n) / (theta S(k, theta, lam)), for theta > 0."""
    check_shifted(k, theta, lam)
    claim_number.check_theta(theta, positive=True)
    return numerics.LogWeight(
        special.xlogy(k, theta + lam * n)
        + log_gpd(theta, lam, n)
        - math.log(theta)
        - log_s_constant(k, theta, lam)
    )


def v_distribution(k, theta, lam):
    """Law of the random shift V_k: P{V_k = n} proportional to q_k(n), n < k."""
    log_q = q_table(k, theta, lam).log_q
    return VDistribution(
        k=int(k), probabilities=np.exp(log_q - numerics.log_sum_exp(log_q))
    )


# Recursion right-hand sides, used to check the closed forms pointwise.


def _log_lead(theta, lam, n):
    return math.log(lam + theta / n)


def gpd_recursion_rhs(theta, lam, n):
    """[theta / (theta + lam)] (lam + theta / n) p(theta + lam, lam; n - 1)"""
    return (
        math.log(theta / (theta + lam))
        + _log_lead(theta, lam, n)
        + float(log_gpd(theta + lam, lam, n - 1))
    )


def bartlett_recursion_rhs(theta, lam, n):
    """(lam + theta / n) p(theta + lam, lam; n - 1)"""
    lower = float(log_bartlett_compound(theta + lam, lam, n - 1))
    return _log_lead(theta, lam, n) + lower


def delaporte_recursion_rhs(theta, lam, m, n):
    """
    lam (m - 1) / ((1 - lam) n) p(theta + lam, m + 1; n - 1)
        + (theta + lam n) / n p(theta + lam, m; n - 1)
    """
    raising = math.log(lam * (m - 1) / ((1.0 - lam) * n))
    raising += log_delaporte_compound_point(theta + lam, lam, m + 1, n - 1)
    same = math.log((theta + lam * n) / n) + log_delaporte_compound_point(
        theta + lam, lam, m, n - 1
    )
    return float(np.logaddexp(raising, same))


def shifted_recursion_rhs(k, theta, lam, n, cache=None):
    """S(k, theta + lam) / S(k, theta) (lam + theta / n) p_k(theta + lam; n - 1)"""
    if cache is None:
        cache = SConstantCache(theta, lam)
    log_s = cache.log_s(k, 0)
    log_s_next = cache.log_s(k, 1)
    return (
        log_s_next
        - log_s
        + _log_lead(theta, lam, n)
        + float(log_shifted(k, theta + lam, lam, n - 1, log_s_next))
    )


# Moments.


def mixture_moment(p, order, method=LEMMA, cache=None):
    """
    Raw moment E[X_k^order] of the shifted mixture.

    Parameters
    ----------
    p : ShiftedMixtureParams
    order : int
        Nonnegative order.
    method : string
        LEMMA lowers the order by moving to (k + 1, theta + lambda);
        SHIFTED_POWER inverts E[(theta + lambda X)^m] = S(k + m) / S(k).
    cache : SConstantCache, optional
        Memo bound to (p.theta, p.lam).

    Returns
    -------
    float
    """
    if int(order) != order or order < 0:
        raise DomainError("Moment order must be a nonnegative integer.")
    order = int(order)
    if order == 0:
        return 1.0
    if cache is None:
        cache = SConstantCache(p.theta, p.lam)
    if method == LEMMA:
        return _lemma_moment(cache, p.k, 0, order, {})
    if method == SHIFTED_POWER:
        return _shifted_power_moments(cache, p.k, order)[order]
    raise DomainError(
        "Unknown moment method {}; choose one of {}.".format(
            method, ", ".join(MOMENT_METHODS)
        )
    )


def _lemma_moment(cache, k, j, order, memo):
    if order == 0:
        return 1.0
    key = (k, j, order)
    if key not in memo:
        ratio = math.exp(cache.log_s(k + 1, j + 1) - cache.log_s(k, j))
        memo[key] = ratio * sum(
            math.comb(order - 1, ell) * _lemma_moment(cache, k + 1, j + 1, ell, memo)
            for ell in range(order)
        )
    return memo[key]


def _shifted_power_moments(cache, k, order):
    theta, lam = cache.theta, cache.lam
    log_s = cache.log_s(k, 0)
    moments = [1.0]
    for m in range(1, order + 1):
        power = math.exp(cache.log_s(k + m, 0) - log_s)
        lower = sum(
            math.comb(m, i) * theta ** (m - i) * lam ** i * moments[i] for i in range(m)
        )
        moments.append((power - lower) / lam ** m)
    return moments


def compound_mean_var(params):
    """Mean and variance of any supported law (Wald identities, or moments of X_k)."""
    family, lam = params.family, params.lam
    if family == BOREL:
        return borel.borel_mean_var(borel.BorelParams(lam))
    if family == BOREL_TANNER:
        return borel.borel_tanner_mean_var(borel.BorelTannerParams(lam, params.m))
    if family == SHIFTED:
        p = ShiftedMixtureParams(params.k, params.theta, lam)
        cache = SConstantCache(params.theta, lam)
        mean = mixture_moment(p, 1, cache=cache)
        return mean, mixture_moment(p, 2, cache=cache) - mean * mean

    if family == GPD:
        count_mean = count_var = params.theta
        if lam == 0.0:
            return count_mean, count_var
    else:
        count_mean, count_var = claim_number.delaporte_mean_var(
            claim_number.DelaporteParams(
                params.theta, lam, 1 if family == BARTLETT else params.m
            )
        )
    summand_mean, summand_var = borel.borel_mean_var(borel.BorelParams(lam))
    return (
        count_mean * summand_mean,
        count_mean * summand_var + count_var * summand_mean ** 2,
    )


def compound_pgf(params, z, cache=None):
    """
    Probability generating function from the branching structure: the claim
    count pgf evaluated at the Borel pgf G(z).
    """
    family, lam, theta = params.family, params.lam, params.theta
    if family == GPD and lam == 0.0:
        return math.exp(theta * (z - 1.0))
    g = borel.borel_pgf(borel.BorelParams(lam), z)
    if family == BOREL:
        return g
    if family == BOREL_TANNER:
        return g ** params.m
    poisson_part = math.exp(theta * (g - 1.0))
    if family == GPD or (family == SHIFTED and params.k == 0):
        return poisson_part
    geometric = (1.0 - lam) / (1.0 - lam * g)
    if family == BARTLETT:
        return geometric * poisson_part
    if family == DELAPORTE:
        return geometric ** params.m * poisson_part
    if params.k < 0:
        table = compound_log_pmf_table(params, cache=cache)
        return float(np.sum(table.probabilities() * z ** np.arange(len(table))))
    if cache is None:
        cache = SConstantCache(theta, lam)
    q = np.exp(log_q_table(params.k, theta, lam))
    ell = np.arange(params.k)
    mixing = np.sum(q * geometric ** (params.k + ell) * g ** ell) / (
        (1.0 - lam) * math.exp(cache.log_s(params.k, 0))
    )
    return poisson_part * mixing


# Tables.


def log_pmf_array(params, n_max, cache=None):
    """Log PMF of any supported law over 0..n_max."""
    n = np.arange(n_max + 1)
    family, lam, theta = params.family, params.lam, params.theta
    if family == BOREL:
        return borel.log_borel(lam, n)
    if family == BOREL_TANNER:
        return borel.log_borel_tanner(lam, params.m, n)
    if family == GPD or (family == SHIFTED and params.k == 0):
        return log_gpd(theta, lam, n)
    if (
        family == BARTLETT
        or (family == DELAPORTE and params.m == 1)
        or (family == SHIFTED and params.k == 1)
    ):
        return log_bartlett_compound(theta, lam, n)
    if family == DELAPORTE:
        return log_delaporte_compound(theta, lam, params.m, n_max)
    if family == SHIFTED:
        log_s = log_s_constant(params.k, theta, lam, cache=cache)
        return log_shifted(params.k, theta, lam, n, log_s)
    raise DomainError("Unknown family {}.".format(family))


def compound_log_pmf_table(
    params, n_max=None, epsilon=numerics.DEFAULT_EPSILON, cache=None
):
    """
    Tabulate any supported law.

    Parameters
    ----------
    params : FamilyParams
    n_max : int, optional
        Last mass point. If None, the smallest N whose certified tail is below
        `epsilon` is used (requires lambda < 1).
    epsilon : float
        Target tail bound when `n_max` is None.
    cache : SConstantCache, optional

    Returns
    -------
    numerics.LogPmf
    """
    limit_ratio = numerics.limit_term_ratio(params.lam)
    if params.family == GPD and params.theta == 0.0:
        return numerics.LogPmf(log_gpd(0.0, params.lam, np.arange((n_max or 0) + 1)))

    if params.family == SHIFTED and cache is None:
        cache = SConstantCache(params.theta, params.lam)

    def log_pmf_fn(last):
        return log_pmf_array(params, last, cache=cache)

    if n_max is None:
        return numerics.truncate_log_pmf(log_pmf_fn, limit_ratio, epsilon=epsilon)
    log_p = log_pmf_fn(n_max)
    if params.lam < 1.0:
        return numerics.LogPmf(log_p, log_tail=numerics.tail_bound(log_p, limit_ratio))
    return numerics.LogPmf(log_p, log_tail=0.0, tail_certified=False)
