"""
Brute-force reference computations: exact convolutions, mixing sums,
deconvolution, branching-tree enumeration and the combinatorial identities
behind the closed forms.

Everything here runs in linear scale on short supports and shares no code
path with the log-space kernel, so the two can referee each other.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from borel_claims.errors import BudgetExceededError, DomainError

GW_MAX_SUPPORT = 60
IDENTITY_BUDGET = 14
ABEL_BUDGET_N = 12
ABEL_BUDGET_M = 4
MAX_COMPOSITIONS = 10 ** 6

HURWITZ_MULTINOMIAL = "hurwitz-multinomial"
ABEL_A = "A(1,k-1,-1,-1)"


@dataclass
class DensePmf:
    """
    Probabilities over 0..N in linear scale. `truncated` marks laws whose mass
    continues beyond N.
    """

    p: np.ndarray
    truncated: bool = True

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)

    def __len__(self):
        return self.p.size

    @property
    def support_limit(self):
        return self.p.size - 1

    def restrict(self, n_max):
        p = np.zeros(n_max + 1)
        keep = min(n_max, self.support_limit) + 1
        p[:keep] = self.p[:keep]
        return DensePmf(p, self.truncated or bool(np.any(self.p[keep:] != 0.0)))


def point_mass(n, n_max):
    p = np.zeros(n_max + 1)
    if n <= n_max:
        p[n] = 1.0
    return DensePmf(p, truncated=False)


def poisson_dense(theta, n_max):
    if theta == 0.0:
        return point_mass(0, n_max)
    return DensePmf(stats.poisson.pmf(np.arange(n_max + 1), theta))


def geometric_dense(lam, n_max):
    """Geometric law (1 - lam) lam^n on 0, 1, 2, ..."""
    return DensePmf(stats.geom.pmf(np.arange(n_max + 1), 1.0 - lam, loc=-1))


def negative_binomial_dense(m, lam, n_max):
    """C(n + m - 1, n) lam^n (1 - lam)^m on 0, 1, 2, ..."""
    return DensePmf(stats.nbinom.pmf(np.arange(n_max + 1), m, 1.0 - lam))


def convolve(a, b, n_max):
    """(a * b)(n) = sum_k a(k) b(n - k) on 0..n_max."""
    p = np.convolve(a.p, b.p)
    return DensePmf(p, a.truncated or b.truncated).restrict(n_max)


def convolution_power(a, m, n_max):
    result = point_mass(0, n_max)
    for _ in range(m):
        result = convolve(result, a, n_max)
    return result


def bartlett_dense(theta, lam, n_max):
    return convolve(poisson_dense(theta, n_max), geometric_dense(lam, n_max), n_max)


def delaporte_dense(theta, lam, m, n_max):
    return convolve(
        poisson_dense(theta, n_max), negative_binomial_dense(m, lam, n_max), n_max
    )


def compound_by_mixing(count, summand, n_max):
    """
    Law of Y_1 + ... + Y_N on 0..n_max by summing count(m) * summand^(*m).

    Parameters
    ----------
    count : DensePmf
        Law of the number of summands N.
    summand : DensePmf
        Law of the summands, supported on the positive integers.
    n_max : int
        Last mass point.

    Returns
    -------
    DensePmf
    """
    if summand.p.size and summand.p[0] != 0.0:
        raise DomainError("Summands must be supported on the positive integers.")
    result = np.zeros(n_max + 1)
    truncated = count.truncated or bool(np.any(count.p[n_max + 1 :] != 0.0))
    power = point_mass(0, n_max)
    for m in range(min(count.support_limit, n_max) + 1):
        if m > 0:
            power = convolve(power, summand, n_max)
        result += count.p[m] * power.p
        truncated = truncated or (power.truncated and count.p[m] != 0.0)
    return DensePmf(result, truncated)


def enumerate_gw_progeny(lam, n_max):
    """
    Total progeny law of a Galton-Watson process with Poisson(lam) offspring,
    computed only from Y = 1 + Y_1 + ... + Y_K with K ~ Poisson(lam).

    Parameters
    ----------
    lam : float
        Offspring mean.
    n_max : int
        Last mass point, at most GW_MAX_SUPPORT.

    Returns
    -------
    DensePmf
        Probabilities over 0..n_max (the entry at 0 is zero).
    """
    if n_max > GW_MAX_SUPPORT:
        raise BudgetExceededError(
            "Tree enumeration is limited to {} claims.".format(GW_MAX_SUPPORT)
        )
    offspring = stats.poisson.pmf(np.arange(n_max + 1), lam)
    progeny = np.zeros(n_max + 1)
    # powers[k][s]: probability that k independent subtrees hold s claims in total
    powers = np.zeros((n_max + 1, n_max + 1))
    powers[0][0] = 1.0
    for n in range(1, n_max + 1):
        s = n - 1
        for k in range(1, s + 1):
            powers[k][s] = sum(
                progeny[j] * powers[k - 1][s - j] for j in range(1, s + 1)
            )
        progeny[n] = sum(offspring[k] * powers[k][s] for k in range(s + 1))
    return DensePmf(progeny)


def borel_dense(lam, n_max):
    return enumerate_gw_progeny(lam, n_max)


def borel_tanner_dense(lam, m, n_max):
    return convolution_power(borel_dense(lam, n_max), m, n_max)


def scaled_borel_power(lam, m, n):
    """
    e^(lam n) Borel^(*m)(n) = m (lam n)^(n - m) / (n (n - m)!), as a Fraction.
    Rational whenever lam is, which a float always is.
    """
    if m == 0:
        return Fraction(int(n == 0))
    if m > n:
        return Fraction(0)
    lam = Fraction(lam)
    return m * (lam * n) ** (n - m) / (n * math.factorial(n - m))


def borel_deconvolve_scaled(scaled_target, lam, n_max):
    """
    Recover the unique sequence c with sum_m c(m) Borel^(*m) = target on
    0..n_max, in exact rational arithmetic.

    Parameters
    ----------
    scaled_target : sequence
        e^(lam n) target(n) for n = 0..n_max, as Fractions or ints; any constant
        factor carries over to c.
    lam : float
    n_max : int

    Returns
    -------
    list of Fraction
        The coefficients c(0..n_max). Entries may be negative.

    Notes
    -----
    Borel^(*m) lives on {m, m+1, ...}, so the system is triangular, and in the
    e^(lam n) scaling its diagonal is 1. The solve cancels heavily at large n,
    which rules out floating point.
    """
    if len(scaled_target) < n_max + 1:
        raise DomainError(
            "Need {} target values, got {}.".format(n_max + 1, len(scaled_target))
        )
    coefficients = []
    for n in range(n_max + 1):
        known = sum(
            (coefficients[m] * scaled_borel_power(lam, m, n) for m in range(n)),
            Fraction(0),
        )
        coefficients.append(Fraction(scaled_target[n]) - known)
    return coefficients


def borel_deconvolve(target, lam, n_max):
    """
    Deconvolve a DensePmf: the e^(lam n) scaling is applied to the rounded
    floats, so entries with large cancellation keep only a few digits. Use
    `borel_deconvolve_scaled` with exact scaled values where those matter.
    """
    p = target.restrict(n_max).p
    scaled = [
        Fraction(float(p[n])) * Fraction(math.exp(lam * n)) for n in range(n_max + 1)
    ]
    return np.array(
        [float(c) for c in borel_deconvolve_scaled(scaled, lam, n_max)]
    )


def _positive_compositions(n, k):
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        yield [bounds[i + 1] - bounds[i] for i in range(k)]


def _weak_compositions(n, m):
    for bars in itertools.combinations(range(n + m - 1), m - 1):
        bounds = (-1,) + bars + (n + m - 1,)
        yield [bounds[i + 1] - bounds[i] - 1 for i in range(m)]


def _check_count(count):
    if count > MAX_COMPOSITIONS:
        raise BudgetExceededError(
            "{} compositions exceed the enumeration budget.".format(count)
        )


def multinomial_identity_check(n, k, budget=IDENTITY_BUDGET):
    """
    Sum over compositions n_1 + ... + n_k = n into positive parts of
    n! / (n_1! ... n_k! k!) prod (n_l / n)^(n_l - 1), against C(n - 1, k - 1).

    Returns
    -------
    (float, float)
        Enumerated sum and closed form.
    """
    if not 1 <= k <= n:
        raise DomainError("Need 1 <= k <= n, got n={}, k={}.".format(n, k))
    if n > budget:
        raise BudgetExceededError("n={} exceeds the budget {}.".format(n, budget))
    _check_count(math.comb(n - 1, k - 1))
    lhs = 0.0
    for parts in _positive_compositions(n, k):
        coefficient = math.factorial(n) / (
            math.prod(math.factorial(part) for part in parts) * math.factorial(k)
        )
        lhs += coefficient * math.prod((part / n) ** (part - 1) for part in parts)
    return lhs, float(math.comb(n - 1, k - 1))


def _hurwitz_multinomial(m, n, theta, lam):
    if m > ABEL_BUDGET_M or n > ABEL_BUDGET_N:
        raise BudgetExceededError(
            "Abel sums are limited to m <= {} and n <= {}.".format(
                ABEL_BUDGET_M, ABEL_BUDGET_N
            )
        )
    _check_count(math.comb(n + m - 1, m - 1))
    shift = theta / (m * lam)
    lhs = 0.0
    for parts in _weak_compositions(n, m):
        coefficient = math.factorial(n) / math.prod(
            math.factorial(part) for part in parts
        )
        lhs += coefficient * math.prod((shift + part) ** part for part in parts)
    base = theta / lam + n
    rhs = sum(
        math.comb(n, ell) * base ** (n - ell) * math.prod(range(m - 1, m + ell - 1))
        for ell in range(n + 1)
    )
    return lhs, rhs


def _abel_a(n, k):
    if not 2 <= k <= n + 1:
        raise DomainError("Need 2 <= k <= n + 1, got n={}, k={}.".format(n, k))
    if n > ABEL_BUDGET_N:
        raise BudgetExceededError("n={} exceeds the budget.".format(n))
    top = n + 1 - k
    lhs = sum(
        math.comb(top, j) * float(j + 1) ** (j - 1) * float(n - j) ** (n - j - k)
        for j in range(top + 1)
    )
    rhs = k * float(n + 1) ** (n - k) / (k - 1)
    return lhs, rhs


def abel_sum_check(variant, **kwargs):
    """
    Evaluate an Abel-type sum by direct summation and by its closed form.

    Parameters
    ----------
    variant : string
        HURWITZ_MULTINOMIAL takes m, n, theta, lam and compares the multinomial
        sum of prod (theta / (m lam) + n_i)^(n_i) over n_1 + ... + n_m = n with
        (theta / lam + n + alpha(m - 1))^n expanded in alpha symbols.
        ABEL_A takes n, k and compares
        sum_j C(n + 1 - k, j) (j + 1)^(j - 1) (n - j)^(n - j - k) with
        k (n + 1)^(n - k) / (k - 1).

    Returns
    -------
    (float, float)
    """
    if variant == HURWITZ_MULTINOMIAL:
        return _hurwitz_multinomial(**kwargs)
    if variant == ABEL_A:
        return _abel_a(**kwargs)
    raise DomainError("Unknown Abel sum variant: {}.".format(variant))


def q_table_dense(k, theta, lam):
    """Linear-scale q_k(0..k-1) from q_1 = [1]."""
    q = np.array([1.0])
    for level in range(2, k + 1):
        padded = np.concatenate([q, [0.0]])
        shifted = np.concatenate([[0.0], q])
        n = np.arange(level)
        q = (theta + lam * n) * padded / (1.0 - lam) + lam ** 2 * (
            level + n - 2
        ) * shifted / (1.0 - lam) ** 2
    return q


def representation_count_dense(k, theta, lam, n_max):
    """
    Law of V_k + Poisson(theta) + NegBin(lam, k + V_k), the claim count whose
    Borel compound is the shifted mixture of order k >= 1.
    """
    if k < 1:
        raise DomainError("The representation needs k >= 1, got {}.".format(k))
    q = q_table_dense(k, theta, lam)
    weights = q / q.sum()
    result = np.zeros(n_max + 1)
    for shift, weight in enumerate(weights):
        if shift > n_max:
            break
        law = delaporte_dense(theta, lam, k + shift, n_max)
        result[shift:] += weight * law.p[: n_max + 1 - shift]
    return DensePmf(result)
