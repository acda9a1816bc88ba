"""
Claim-number laws used as compounding distributions: Poisson, geometric,
negative binomial and their convolutions, the Bartlett and Delaporte laws.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from borel_claims import numerics
from borel_claims.errors import DomainError


def check_theta(theta, positive=False):
    if not (theta > 0.0 if positive else theta >= 0.0) or math.isinf(theta):
        raise DomainError(
            "theta must be {} and finite, got {}.".format(
                "> 0" if positive else ">= 0", theta
            )
        )


def check_open_lambda(lam):
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda must lie in (0, 1), got {}.".format(lam))


def check_shape(m, minimum=1):
    if int(m) != m or m < minimum:
        raise DomainError(
            "The shape m must be an integer >= {}, got {}.".format(minimum, m)
        )


@dataclass(frozen=True)
class BartlettParams:
    theta: float
    lam: float

    def __post_init__(self):
        check_theta(self.theta)
        check_open_lambda(self.lam)


@dataclass(frozen=True)
class DelaporteParams:
    theta: float
    lam: float
    m: int = 1

    def __post_init__(self):
        check_theta(self.theta)
        check_open_lambda(self.lam)
        check_shape(self.m)


def poisson_pmf(theta, n):
    """Log Poisson(theta) probabilities; vectorized over n."""
    n = np.asarray(n, dtype=np.float64)
    values = special.xlogy(n, theta) - theta - special.gammaln(np.maximum(n, 0) + 1.0)
    return np.where(n >= 0, values, numerics.NEG_INF)


def geometric_pmf(lam, n):
    """Log (1 - lam) lam^n on 0, 1, 2, ..."""
    return negative_binomial_pmf(1, lam, n)


def negative_binomial_pmf(m, lam, n):
    """Log C(n + m - 1, n) lam^n (1 - lam)^m on 0, 1, 2, ..."""
    n = np.asarray(n)
    values = (
        numerics.log_binomial_array(n + m - 1, n)
        + special.xlogy(n, lam)
        + m * math.log1p(-lam)
    )
    return np.where(n >= 0, values, numerics.NEG_INF)


def _convolve_with_poisson(theta, log_other, n_max):
    """Log of sum_k other(k) Poisson(theta)(n - k) for n = 0..n_max."""
    n = np.arange(n_max + 1)
    difference = n[:, None] - n[None, :]
    terms = log_other[None, :] + poisson_pmf(theta, difference)
    return numerics.log_sum_exp(terms, axis=1)


def log_bartlett(theta, lam, n_max):
    """
    Bartlett log PMF over 0..n_max,
    (1 - lam) lam^n e^(-theta) sum_{k <= n} (theta / lam)^k / k!.
    """
    n = np.arange(n_max + 1)
    partial = special.xlogy(n, theta / lam) - special.gammaln(n + 1.0)
    return (
        math.log1p(-lam)
        + n * math.log(lam)
        - theta
        + np.logaddexp.accumulate(partial)
    )


def log_delaporte(theta, lam, m, n_max):
    """Delaporte log PMF over 0..n_max: Poisson(theta) convolved with NegBin(m, lam)."""
    n = np.arange(n_max + 1)
    return _convolve_with_poisson(theta, negative_binomial_pmf(m, lam, n), n_max)


def bartlett_pmf(p, n):
    if n < 0:
        return numerics.ZERO
    return numerics.LogWeight(log_bartlett(p.theta, p.lam, n)[n])


def delaporte_pmf(p, n):
    if n < 0:
        return numerics.ZERO
    return numerics.LogWeight(log_delaporte(p.theta, p.lam, p.m, n)[n])


def delaporte_mean_var(p):
    """Mean theta + m lam / (1 - lam) and variance theta + m lam / (1 - lam)^2."""
    return (
        p.theta + p.m * p.lam / (1.0 - p.lam),
        p.theta + p.m * p.lam / (1.0 - p.lam) ** 2,
    )


def bartlett_mean_var(p):
    return delaporte_mean_var(DelaporteParams(p.theta, p.lam, 1))
