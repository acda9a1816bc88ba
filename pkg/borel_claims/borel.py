"""
Borel and Borel-Tanner laws: the total number of claims of a Galton-Watson
process with Poisson(lambda) offspring started from one or m initial claims.
"""

import math
from dataclasses import dataclass

import numpy as np
from absl import logging
from scipy import special

from borel_claims import numerics
from borel_claims.errors import ConvergenceError, DomainError

PGF_TOLERANCE = 1e-14
PGF_MAX_ITERATIONS = 10000
PGF_RESIDUAL = 1e-12


def check_lambda(lam, allow_one=True):
    """Raise a DomainError unless lam lies in (0, 1] (or (0, 1) if not allow_one)."""
    if not (lam > 0.0 and (lam <= 1.0 if allow_one else lam < 1.0)):
        raise DomainError(
            "lambda must lie in (0, {}, got {}.".format(
                "1]" if allow_one else "1)", lam
            )
        )


@dataclass(frozen=True)
class BorelParams:
    lam: float

    def __post_init__(self):
        check_lambda(self.lam)


@dataclass(frozen=True)
class BorelTannerParams:
    lam: float
    m: int = 1

    def __post_init__(self):
        check_lambda(self.lam)
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(
                "The number of initial claims m must be an integer >= 1, "
                "got {}.".format(self.m)
            )


def log_borel_tanner(lam, m, n):
    """
    Vectorized Borel-Tanner log PMF m (lam n)^(n - m) e^(-lam n) / (n (n - m)!).

    Parameters
    ----------
    lam : float
        Offspring mean in (0, 1].
    m : int
        Number of initial claims.
    n : int or np.ndarray
        Total numbers of claims.

    Returns
    -------
    np.ndarray
        Log probabilities; negative infinity where n < m.
    """
    n = np.asarray(n, dtype=np.float64)
    valid = n >= m
    safe_n = np.where(valid, n, m)
    values = (
        math.log(m)
        + special.xlogy(safe_n - m, lam * safe_n)
        - lam * safe_n
        - np.log(safe_n)
        - special.gammaln(safe_n - m + 1.0)
    )
    return np.where(valid, values, numerics.NEG_INF)


def log_borel(lam, n):
    """Vectorized Borel log PMF (lam n)^(n - 1) e^(-lam n) / n!."""
    return log_borel_tanner(lam, 1, n)


def borel_pmf(p, n):
    """Log P{Y = n} of the Borel law; zero weight for n <= 0."""
    return numerics.LogWeight(log_borel(p.lam, n))


def borel_tanner_pmf(p, n):
    """Log P{Y = n} of the Borel-Tanner law; zero weight for n < m."""
    return numerics.LogWeight(log_borel_tanner(p.lam, p.m, n))


def borel_mean_var(p):
    """
    Mean 1 / (1 - lambda) and variance lambda / (1 - lambda)^3 of the Borel law.
    The expectation does not exist at lambda = 1.
    """
    check_lambda(p.lam, allow_one=False)
    return 1.0 / (1.0 - p.lam), p.lam / (1.0 - p.lam) ** 3


def borel_tanner_mean_var(p):
    mean, variance = borel_mean_var(BorelParams(p.lam))
    return p.m * mean, p.m * variance


def generation_total_pgf(lam, z, generations):
    """
    Probability generating function of the number of claims up to and including
    the given generation, started from one claim.

    Parameters
    ----------
    lam : float
        Offspring mean.
    z : float
        Argument in [0, 1].
    generations : int
        Number of offspring generations after the initial claim.

    Returns
    -------
    float
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError("The pgf argument must lie in [0, 1], got {}.".format(z))
    value = z
    for _ in range(generations):
        value = z * math.exp(lam * (value - 1.0))
    return value


def borel_pgf_lambertw(lam, z):
    """G(z) = -W(-lam z exp(-lam)) / lam on the principal branch of Lambert W."""
    return float(-special.lambertw(-lam * z * math.exp(-lam)).real / lam)


def borel_pgf(p, z, tolerance=PGF_TOLERANCE, max_iterations=PGF_MAX_ITERATIONS):
    """
    Solve G(z) = z exp(lambda (G(z) - 1)) by fixed-point iteration from G = z.

    The contraction rate lambda G(z) tends to 1 as lambda and z both approach
    1. If the iteration cap is hit there, the Lambert W closed form is used
    once its residual in the functional equation is below PGF_RESIDUAL.

    Parameters
    ----------
    p : BorelParams
    z : float
        Argument in [0, 1].
    tolerance : float
        Stop once successive iterates differ by less than this.
    max_iterations : int
        Iteration cap.

    Returns
    -------
    float
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError("The pgf argument must lie in [0, 1], got {}.".format(z))
    value = z
    for _ in range(max_iterations):
        updated = z * math.exp(p.lam * (value - 1.0))
        if abs(updated - value) < tolerance:
            return updated
        value = updated
    closed = borel_pgf_lambertw(p.lam, z)
    residual = abs(closed - z * math.exp(p.lam * (closed - 1.0)))
    if not residual < PGF_RESIDUAL:
        raise ConvergenceError(
            "Borel pgf at z={} did not converge in {} steps and the closed form "
            "leaves a residual of {}.".format(z, max_iterations, residual)
        )
    logging.info(
        "Borel pgf at lambda={}, z={}: iteration cap hit, using Lambert W.".format(
            p.lam, z
        )
    )
    return closed


def _table(lam, log_pmf_fn, n_max, epsilon):
    limit_ratio = numerics.limit_term_ratio(lam)
    if n_max is None:
        return numerics.truncate_log_pmf(log_pmf_fn, limit_ratio, epsilon=epsilon)
    log_p = log_pmf_fn(n_max)
    if lam < 1.0:
        return numerics.LogPmf(log_p, log_tail=numerics.tail_bound(log_p, limit_ratio))
    return numerics.LogPmf(log_p, log_tail=0.0, tail_certified=False)


def borel_log_pmf_table(p, n_max=None, epsilon=numerics.DEFAULT_EPSILON):
    """
    Tabulate the Borel law over 0..N.

    If `n_max` is None, N is the smallest value whose certified tail is below
    `epsilon` (requires lambda < 1). At lambda = 1 a fixed-N table carries the
    trivial tail bound 1.
    """
    return _table(p.lam, lambda n: log_borel(p.lam, np.arange(n + 1)), n_max, epsilon)


def borel_tanner_log_pmf_table(p, n_max=None, epsilon=numerics.DEFAULT_EPSILON):
    return _table(
        p.lam,
        lambda n: log_borel_tanner(p.lam, p.m, np.arange(n + 1)),
        n_max,
        epsilon,
    )
