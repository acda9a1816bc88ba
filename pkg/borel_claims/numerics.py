"""
Log-space arithmetic, combinatorial coefficients and certified truncation of
probability mass functions.

All probability magnitudes in the project are carried as natural logarithms;
negative infinity encodes a zero probability.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from borel_claims.errors import ConvergenceError, DomainError

NEG_INF = -np.inf

# Largest integer coefficient that is logged directly instead of through lgamma.
_EXACT_INTEGER_LIMIT = 2 ** 62

DEFAULT_EPSILON = 1e-12
DEFAULT_MAX_TERMS = 100000
_INITIAL_TERMS = 32


class LogWeight(float):
    """
    A natural-log probability weight. Negative infinity encodes zero; NaN and
    positive infinity are rejected.
    """

    def __new__(cls, value):
        value = float(value)
        if math.isnan(value):
            raise DomainError("A log weight cannot be NaN.")
        if value == math.inf:
            raise DomainError("A log weight cannot be positive infinity.")
        return super(LogWeight, cls).__new__(cls, value)

    @property
    def is_zero(self):
        return self == NEG_INF

    def exp(self):
        return math.exp(self)


ZERO = LogWeight(NEG_INF)
ONE = LogWeight(0.0)


def log_sum_exp(terms, axis=None):
    """
    Compute log(sum(exp(terms))) without leaving log space.

    Parameters
    ----------
    terms : sequence of float or np.ndarray
        Log weights. May be empty.
    axis : None or int
        Axis to reduce over. If None, the whole input is reduced and a LogWeight
        is returned.

    Returns
    -------
    LogWeight or np.ndarray
        The log of the summed weights. Empty input gives negative infinity.
    """
    terms = np.asarray(terms, dtype=np.float64)
    if axis is None:
        if terms.size == 0:
            return ZERO
        if terms.size == 1:
            return LogWeight(terms.reshape(-1)[0])
        with np.errstate(divide="ignore"):
            return LogWeight(special.logsumexp(terms))

    if terms.shape[axis] == 0:
        return np.full(np.delete(terms.shape, axis), NEG_INF)
    with np.errstate(divide="ignore", invalid="ignore"):
        return special.logsumexp(terms, axis=axis)


def log_binomial(n, k):
    """Log of the binomial coefficient C(n, k); zero weight outside 0 <= k <= n."""
    n = int(n)
    k = int(k)
    if k < 0 or k > n or n < 0:
        return ZERO
    if n <= 66:
        coefficient = math.comb(n, k)
        if coefficient < _EXACT_INTEGER_LIMIT:
            return LogWeight(math.log(coefficient))
    return LogWeight(
        special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    )


def log_binomial_array(n, k):
    """
    Vectorized log C(n, k) over broadcastable integer arrays.

    Parameters
    ----------
    n : int or np.ndarray
        Upper indices.
    k : int or np.ndarray
        Lower indices.

    Returns
    -------
    np.ndarray
        Log binomial coefficients, negative infinity where k < 0 or k > n.
    """
    n, k = np.broadcast_arrays(np.asarray(n), np.asarray(k))
    valid = (k >= 0) & (k <= n)
    safe_n = np.where(valid, n, 0)
    safe_k = np.where(valid, k, 0)
    values = (
        special.gammaln(safe_n + 1.0)
        - special.gammaln(safe_k + 1.0)
        - special.gammaln(safe_n - safe_k + 1.0)
    )
    return np.where(valid, values, NEG_INF)


@dataclass(frozen=True)
class AlphaSymbol:
    """
    Symbolic power alpha^ell(m - 1) = C(m + ell - 2, ell) * ell!, the rising
    factorial (m - 1)(m)...(m + ell - 2).
    """

    m: int
    ell: int
    log_value: LogWeight

    @property
    def value(self):
        """Exact integer value."""
        return math.perm(self.m + self.ell - 2, self.ell)


def _check_shape(m):
    if int(m) != m or m < 2:
        raise DomainError(
            "Alpha symbols need an integer shape m >= 2, got {}.".format(m)
        )


def alpha_symbol(m, ell):
    """
    Riordan alpha symbol alpha^ell(m - 1).

    Parameters
    ----------
    m : int
        Shape, at least 2.
    ell : int
        Order, at least 0.

    Returns
    -------
    AlphaSymbol
    """
    _check_shape(m)
    if int(ell) != ell or ell < 0:
        raise DomainError("Alpha symbol order must be a nonnegative integer.")
    m, ell = int(m), int(ell)
    exact = math.perm(m + ell - 2, ell) if m + ell < 40 else None
    if exact is not None and exact < _EXACT_INTEGER_LIMIT:
        log_value = math.log(exact)
    else:
        log_value = special.gammaln(m + ell - 1) - special.gammaln(m - 1)
    return AlphaSymbol(m=m, ell=ell, log_value=LogWeight(log_value))


def log_alpha_array(m, ell):
    """Vectorized log alpha^ell(m - 1) for an array of orders."""
    _check_shape(m)
    ell = np.asarray(ell, dtype=np.float64)
    return special.gammaln(m + ell - 1.0) - special.gammaln(m - 1.0)


def alpha_binomial_expand(log_x, lam, m, n):
    """
    Log of the symbolic power (x + lam * alpha(m - 1))^n, expanded by the binomial
    rule with alpha^ell(m - 1) substituted for every power alpha^ell.

    Parameters
    ----------
    log_x : float
        Log of x >= 0. Zero (negative infinity) is allowed when n >= 1.
    lam : float
        Coefficient of the symbol, in [0, 1).
    m : int
        Shape of the alpha symbols, at least 2.
    n : int
        Power, at least 0.

    Returns
    -------
    LogWeight
    """
    _check_shape(m)
    if n < 0:
        raise DomainError("The power n must be nonnegative.")
    if n == 0:
        return ONE
    log_x = float(log_x)
    ell = np.arange(n + 1)
    x_exponent = n - ell
    with np.errstate(invalid="ignore"):
        x_part = np.where(x_exponent == 0, 0.0, x_exponent * log_x)
    terms = (
        log_binomial_array(n, ell)
        + x_part
        + special.xlogy(ell, lam)
        + log_alpha_array(m, ell)
    )
    return log_sum_exp(terms)


def limit_term_ratio(lam):
    """Limit of p(n + 1) / p(n) shared by every Borel-type law: lam * e^(1 - lam)."""
    return lam * math.exp(1.0 - lam)


def tail_bound(log_p, limit_ratio):
    """
    Certified bound on the probability mass beyond the last entry of `log_p`.

    Consecutive term ratios of the laws handled here approach `limit_ratio`
    monotonically, so every later ratio is bounded by
    r = max(limit_ratio, p(N) / p(N - 1)) and the tail by p(N) * r / (1 - r).

    Parameters
    ----------
    log_p : np.ndarray
        Log weights over 0..N.
    limit_ratio : float
        Limit of the term ratio.

    Returns
    -------
    float
        Log of the bound. Zero (the trivial bound 1) when no certificate applies.
    """
    log_p = np.asarray(log_p, dtype=np.float64)
    if log_p.size < 2:
        return 0.0
    last, previous = log_p[-1], log_p[-2]
    if last == NEG_INF:
        return NEG_INF if previous > NEG_INF else 0.0
    if previous == NEG_INF:
        return 0.0
    log_r = max(math.log(limit_ratio) if limit_ratio > 0 else NEG_INF, last - previous)
    if log_r >= 0.0:
        return 0.0
    return min(0.0, last + log_r - math.log1p(-math.exp(log_r)))


def _prefix_tail_bounds(log_p, limit_ratio):
    """Tail bounds of every prefix 0..M of `log_p`, M >= 1."""
    bounds = np.zeros(log_p.size)
    for last in range(1, log_p.size):
        bounds[last] = tail_bound(log_p[last - 1 : last + 1], limit_ratio)
    return bounds


@dataclass(frozen=True)
class LogPmf:
    """
    A truncated probability mass function over 0..N stored as log weights, with
    a bound on the mass beyond N.
    """

    log_p: np.ndarray
    log_tail: float = NEG_INF
    tail_certified: bool = True

    def __post_init__(self):
        log_p = np.asarray(self.log_p, dtype=np.float64)
        if np.isnan(log_p).any() or (log_p == np.inf).any():
            raise DomainError("Log weights must not be NaN or positive infinity.")
        object.__setattr__(self, "log_p", log_p)

    def __len__(self):
        return self.log_p.size

    @property
    def support_limit(self):
        return self.log_p.size - 1

    @property
    def support_size(self):
        return self.log_p.size

    @property
    def tail_bound(self):
        return math.exp(self.log_tail)

    def log_weight(self, n):
        if n < 0 or n > self.support_limit:
            return ZERO
        return LogWeight(self.log_p[n])

    def probabilities(self):
        return np.exp(self.log_p)

    def cumulative(self):
        return np.cumsum(self.probabilities())

    def total_mass(self):
        return float(np.exp(log_sum_exp(self.log_p)))

    def raw_moment(self, order):
        """Raw moment of the given order over the computed support."""
        support = np.arange(self.log_p.size, dtype=np.float64)
        return float(np.sum(support ** order * self.probabilities()))

    def mean(self):
        return self.raw_moment(1)

    def variance(self):
        mean = self.mean()
        return self.raw_moment(2) - mean * mean


def truncate_log_pmf(
    log_pmf_fn,
    limit_ratio,
    epsilon=DEFAULT_EPSILON,
    max_terms=DEFAULT_MAX_TERMS,
):
    """
    Evaluate a PMF up to the smallest N whose certified tail is below `epsilon`.

    Parameters
    ----------
    log_pmf_fn : int -> np.ndarray
        Maps N to the log PMF over 0..N.
    limit_ratio : float
        Limit of the term ratio; must be below 1.
    epsilon : float
        Target bound on the discarded mass.
    max_terms : int
        Largest N tried before giving up.

    Returns
    -------
    LogPmf
    """
    if limit_ratio >= 1.0:
        raise DomainError(
            "Truncation needs a term ratio limit below 1 (lambda < 1), got {}.".format(
                limit_ratio
            )
        )
    log_epsilon = math.log(epsilon)
    n_terms = _INITIAL_TERMS
    while True:
        log_p = np.asarray(log_pmf_fn(n_terms - 1), dtype=np.float64)
        bounds = _prefix_tail_bounds(log_p, limit_ratio)
        certified = np.nonzero(bounds[1:] < log_epsilon)[0]
        if certified.size:
            last = int(certified[0]) + 1
            return LogPmf(log_p[: last + 1], log_tail=float(bounds[last]))
        if n_terms > max_terms:
            raise ConvergenceError(
                "No certified truncation below {} within {} terms.".format(
                    epsilon, max_terms
                )
            )
        n_terms *= 2


def certified_log_series(
    log_term_fn,
    limit_ratio,
    rel_epsilon=DEFAULT_EPSILON,
    max_terms=DEFAULT_MAX_TERMS,
):
    """
    Log of an infinite series of nonnegative terms, summed until the certified
    tail falls below `rel_epsilon` times the partial sum.

    Parameters
    ----------
    log_term_fn : np.ndarray -> np.ndarray
        Maps an array of indices 0..N to log terms.
    limit_ratio : float
        Limit of the term ratio; must be below 1.
    rel_epsilon : float
        Relative accuracy of the sum.
    max_terms : int
        Iteration cap.

    Returns
    -------
    (LogWeight, float)
        Log of the partial sum and log of the tail bound.
    """
    if limit_ratio >= 1.0:
        raise DomainError(
            "Series certification needs a term ratio limit below 1, got {}.".format(
                limit_ratio
            )
        )
    log_epsilon = math.log(rel_epsilon)
    n_terms = _INITIAL_TERMS
    while n_terms <= 2 * max_terms:
        log_terms = np.asarray(log_term_fn(np.arange(n_terms)), dtype=np.float64)
        log_total = log_sum_exp(log_terms)
        log_tail = tail_bound(log_terms, limit_ratio)
        if log_tail - log_total < log_epsilon:
            return log_total, log_tail
        n_terms *= 2
    raise ConvergenceError(
        "Series did not reach relative accuracy {} within {} terms.".format(
            rel_epsilon, max_terms
        )
    )


def moment_tail_bound(log_p, order, limit_ratio):
    """
    Certified log bound on sum_{n > N} n^order p(n) for a table over 0..N.

    Later probability ratios are bounded as in `tail_bound`, and
    ((n + 1) / n)^order decreases in n, so every later term ratio is at most
    r = max(limit_ratio, p(N) / p(N - 1)) ((N + 1) / N)^order. Returns inf when
    no certificate applies.
    """
    log_p = np.asarray(log_p, dtype=np.float64)
    last_n = log_p.size - 1
    if last_n < 2:
        return math.inf
    last, previous = log_p[-1], log_p[-2]
    if last == NEG_INF:
        return NEG_INF if previous > NEG_INF else math.inf
    if previous == NEG_INF:
        return math.inf
    log_r = max(math.log(limit_ratio) if limit_ratio > 0 else NEG_INF, last - previous)
    log_r += order * math.log1p(1.0 / last_n)
    if log_r >= 0.0:
        return math.inf
    return order * math.log(last_n) + last + log_r - math.log1p(-math.exp(log_r))


def certified_raw_moment(
    log_pmf_fn,
    order,
    limit_ratio,
    rel_epsilon=DEFAULT_EPSILON,
    max_terms=DEFAULT_MAX_TERMS,
):
    """
    Raw moment sum_n n^order p(n), summed until the certified tail of the
    weighted series falls below `rel_epsilon` times the partial sum.

    Parameters
    ----------
    log_pmf_fn : int -> np.ndarray
        Maps N to the log PMF over 0..N.
    order : int
        Moment order, at least 1.
    limit_ratio : float
        Limit of the probability term ratio; must be below 1.
    rel_epsilon : float
    max_terms : int

    Returns
    -------
    (float, float)
        The moment and the bound on its missing part.
    """
    if limit_ratio >= 1.0:
        raise DomainError(
            "Moments need a term ratio limit below 1 (lambda < 1), got {}.".format(
                limit_ratio
            )
        )
    if order < 1:
        raise DomainError("Moment order must be >= 1, got {}.".format(order))
    log_epsilon = math.log(rel_epsilon)
    n_max = _INITIAL_TERMS
    while n_max <= 2 * max_terms:
        log_p = np.asarray(log_pmf_fn(n_max), dtype=np.float64)
        log_terms = order * np.log(np.arange(1, log_p.size)) + log_p[1:]
        log_total = log_sum_exp(log_terms)
        log_tail = moment_tail_bound(log_p, order, limit_ratio)
        if log_tail - log_total < log_epsilon:
            return math.exp(log_total), math.exp(log_tail)
        n_max *= 2
    raise ConvergenceError(
        "Moment of order {} did not reach relative accuracy {} within {} terms.".format(
            order, rel_epsilon, max_terms
        )
    )
