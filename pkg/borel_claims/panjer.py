"""
Total claim size distributions by Panjer-type recursions in which every step
shifts theta to theta + lambda.

The grid entry (j, n) holds q(theta + j lambda, lambda; n), the probability that
the total claim size equals n when the claim number has parameter
theta + j lambda. Entries with j + n <= N are enough for q(theta, lambda; 0..N).
The compound Delaporte law adds a shape offset i, giving a pyramid of entries
q(theta + j lambda, lambda, m + i; n).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from borel_claims import claim_number, compounds, numerics
from borel_claims.errors import (
    AccuracyError,
    BudgetExceededError,
    DomainError,
    GridBoundsError,
)

DEFAULT_MAX_GRID = 25000000
SEVERITY_TOLERANCE = 1e-12
SUPPORT_STDDEVS = 10.0

RESOLVED = "resolved"
LITERAL = "literal"
COEFFICIENT_VARIANTS = (RESOLVED, LITERAL)

_ROUNDING = 2.0 ** -52


@dataclass(frozen=True)
class SeverityPmf:
    """
    Claim-size law f(1..K) on the positive integers. `f[0]` is always zero.
    """

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64)
        if f.ndim != 1 or f.size < 2:
            raise DomainError("A severity needs at least one positive claim size.")
        if f[0] != 0.0:
            raise DomainError("Claim sizes must be positive: f(0) must be zero.")
        if not np.all(np.isfinite(f)) or np.any(f < 0.0):
            raise DomainError("Severity probabilities must be finite and nonnegative.")
        total = float(np.sum(f))
        if abs(total - 1.0) > SEVERITY_TOLERANCE:
            raise DomainError(
                "Severity probabilities sum to {!r}, not 1; weights are not "
                "renormalized.".format(total)
            )
        object.__setattr__(self, "f", f)

    @classmethod
    def from_weights(cls, weights):
        """
        Build from probabilities of the claim sizes 1..K.

        Parameters
        ----------
        weights : sequence of float or dict
            Either f(1), ..., f(K) in order, or a mapping from claim size to
            probability.
        """
        if isinstance(weights, dict):
            if any(int(size) != size or size < 1 for size in weights):
                raise DomainError("Claim sizes must be positive integers.")
            f = np.zeros(int(max(weights)) + 1)
            for size, probability in weights.items():
                f[int(size)] = probability
            return cls(f)
        return cls(np.concatenate([[0.0], np.asarray(weights, dtype=np.float64)]))

    @classmethod
    def unit(cls):
        """Every claim has size 1."""
        return cls(np.array([0.0, 1.0]))

    @property
    def max_claim(self):
        return self.f.size - 1

    @property
    def log_f(self):
        with np.errstate(divide="ignore"):
            return np.log(self.f)

    def mean(self):
        return float(np.sum(np.arange(self.f.size) * self.f))

    def variance(self):
        sizes = np.arange(self.f.size)
        return float(np.sum(sizes ** 2 * self.f)) - self.mean() ** 2


@dataclass(frozen=True)
class PanjerFamily:
    """
    Claim-number law fulfilling p(theta; n) = (a + b / n) p(theta + lambda; n - 1),
    with (a, b) depending on the current shift level theta.
    """

    tag: str
    theta: float
    lam: float
    k: int = 0

    @classmethod
    def from_params(cls, params):
        if params.family == compounds.DELAPORTE and params.m == 1:
            return cls(compounds.BARTLETT, params.theta, params.lam)
        if params.family in (compounds.GPD, compounds.BARTLETT):
            return cls(params.family, params.theta, params.lam)
        if params.family == compounds.SHIFTED:
            return cls(compounds.SHIFTED, params.theta, params.lam, params.k)
        raise DomainError(
            "No single-shape Panjer scheme for the {} family.".format(params.family)
        )

    def thetas(self, levels):
        return self.theta + self.lam * np.arange(levels)

    def coefficients(self, levels, cache=None):
        """Arrays a_j, b_j for j = 0..levels-1."""
        theta_j = self.thetas(levels)
        if self.tag == compounds.GPD:
            scale = np.ones(levels)
            if self.lam > 0.0:
                scale = theta_j / (theta_j + self.lam)
            return scale * self.lam, scale * theta_j
        if self.tag == compounds.BARTLETT:
            return np.full(levels, self.lam), theta_j
        log_s = self._log_s(levels + 1, cache)
        ratio = np.exp(log_s[1:] - log_s[:-1])
        return ratio * self.lam, ratio * theta_j

    def log_base(self, levels, cache=None):
        """log p(theta + j lambda; 0) for j = 0..levels-1."""
        theta_j = self.thetas(levels)
        if self.tag == compounds.GPD:
            return -theta_j
        if self.tag == compounds.BARTLETT:
            return math.log1p(-self.lam) - theta_j
        return special.xlogy(self.k - 1, theta_j) - theta_j - self._log_s(levels, cache)

    def _log_s(self, levels, cache):
        if cache is None:
            cache = compounds.SConstantCache(self.theta, self.lam)
        return np.array([cache.log_s(self.k, j) for j in range(levels)])


class RecursionGrid:
    """
    Triangle (or pyramid) of log probabilities filled by the shifted Panjer
    recursion. Entries outside the computed region raise GridBoundsError.
    """

    def __init__(self, theta, lam, n_max, levels, shape=None):
        self.theta = theta
        self.lam = lam
        self.n_max = n_max
        self.shape = shape
        self._levels = levels

    def log_q(self, j, n, i=0):
        if n < 0 or n > self.n_max or j < 0 or j > self.n_max - n:
            raise GridBoundsError(
                "Entry (j={}, n={}) lies outside the grid j + n <= {}.".format(
                    j, n, self.n_max
                )
            )
        level = self._levels[n]
        if self.shape is None:
            if i != 0:
                raise GridBoundsError("This grid has no shape offsets.")
            return float(level[j])
        if i < 0 or i >= level.shape[1]:
            raise GridBoundsError(
                "Shape offset i={} lies outside the grid at n={}.".format(i, n)
            )
        return float(level[j, i])

    def column(self):
        """log q(theta, lambda; n) for n = 0..N as a LogPmf."""
        if self.shape is None:
            log_p = np.array([level[0] for level in self._levels])
        else:
            log_p = np.array([level[0, 0] for level in self._levels])
        return _complement_pmf(log_p)


def _complement_pmf(log_p):
    """The laws here are proper: the missing mass is the complement up to rounding."""
    missing = max(0.0, 1.0 - float(np.sum(np.exp(log_p))))
    bound = missing + (log_p.size + 1) * _ROUNDING
    return numerics.LogPmf(log_p, log_tail=math.log(bound))


def triangle_cells(n_max):
    return (n_max + 1) * (n_max + 2) // 2


def pyramid_cells(n_max):
    size = n_max + 1
    return size * (size + 1) * (2 * size + 1) // 6


def _check_budget(cells, max_grid):
    if cells > max_grid:
        raise BudgetExceededError(
            "The recursion grid needs {} cells, above the budget of {}.".format(
                cells, max_grid
            )
        )


def _active_sizes(severity, n):
    sizes = np.arange(1, min(n, severity.max_claim) + 1)
    return sizes[severity.f[sizes] > 0.0]


def aggregate_grid(params, severity, n_max, max_grid=DEFAULT_MAX_GRID, cache=None):
    """
    Fill the triangle of q(theta + j lambda; n), j + n <= N.

    Parameters
    ----------
    params : compounds.FamilyParams
        A gpd, bartlett or shifted law (or delaporte with m = 1).
    severity : SeverityPmf
    n_max : int
        Last aggregate mass point N.
    max_grid : int
        Maximum number of grid cells.
    cache : compounds.SConstantCache, optional
        Memo bound to (params.theta, params.lam) for the shifted family.

    Returns
    -------
    RecursionGrid
    """
    if n_max < 0:
        raise DomainError("N must be nonnegative, got {}.".format(n_max))
    _check_budget(triangle_cells(n_max), max_grid)
    family = PanjerFamily.from_params(params)
    if family.tag == compounds.SHIFTED and cache is None:
        cache = compounds.SConstantCache(family.theta, family.lam)

    levels = [family.log_base(n_max + 1, cache)]
    a, b = family.coefficients(max(n_max, 1), cache)
    log_f = severity.log_f
    with np.errstate(divide="ignore"):
        for n in range(1, n_max + 1):
            width = n_max - n + 1
            sizes = _active_sizes(severity, n)
            if sizes.size == 0:
                levels.append(np.full(width, numerics.NEG_INF))
                continue
            previous = np.stack([levels[n - size][1 : width + 1] for size in sizes])
            weights = a[None, :width] + b[None, :width] * sizes[:, None] / n
            terms = log_f[sizes][:, None] + np.log(weights) + previous
            levels.append(numerics.log_sum_exp(terms, axis=0))
    return RecursionGrid(params.theta, params.lam, n_max, levels)


def aggregate_grid_delaporte(
    severity,
    theta,
    lam,
    m,
    n_max,
    coefficients=RESOLVED,
    max_grid=DEFAULT_MAX_GRID,
):
    """
    Fill the pyramid of q(theta + j lambda, lambda, m + i; n) for j, i <= N - n.

    Each step has a shape-raising branch with coefficients
    (0, (m' - 1) lambda / (1 - lambda)) at the current shape m', reading
    (j + 1, i + 1), and a same-shape branch reading (j + 1, i). The same-shape
    branch uses (lambda, theta') at the current shift theta' (RESOLVED) or
    (0, theta' + lambda n) with n the aggregate index (LITERAL).
    """
    claim_number.DelaporteParams(theta, lam, m)
    if m < 2:
        raise DomainError("The Delaporte pyramid needs m >= 2, got {}.".format(m))
    if coefficients not in COEFFICIENT_VARIANTS:
        raise DomainError(
            "Unknown coefficient variant {}; choose one of {}.".format(
                coefficients, ", ".join(COEFFICIENT_VARIANTS)
            )
        )
    if n_max < 0:
        raise DomainError("N must be nonnegative, got {}.".format(n_max))
    _check_budget(pyramid_cells(n_max), max_grid)

    size = n_max + 1
    theta_j = theta + lam * np.arange(size)
    shapes = m + np.arange(size)
    log_one_minus = math.log1p(-lam)
    levels = [shapes[None, :] * log_one_minus - theta_j[:, None]]
    raising = (shapes - 1) * lam / (1.0 - lam)
    log_f = severity.log_f
    with np.errstate(divide="ignore"):
        for n in range(1, n_max + 1):
            width = n_max - n + 1
            sizes = _active_sizes(severity, n)
            if sizes.size == 0:
                levels.append(np.full((width, width), numerics.NEG_INF))
                continue
            ratio = sizes[:, None, None] / n
            raise_terms = (
                log_f[sizes][:, None, None]
                + np.log(raising[None, None, :width] * ratio)
                + np.stack([levels[n - s][1 : width + 1, 1 : width + 1] for s in sizes])
            )
            if coefficients == RESOLVED:
                same_weight = lam + theta_j[None, :width, None] * ratio
            else:
                same_weight = (theta_j[None, :width, None] + lam * n) * ratio
            same_terms = (
                log_f[sizes][:, None, None]
                + np.log(np.broadcast_to(same_weight, (sizes.size, width, width)))
                + np.stack([levels[n - s][1 : width + 1, 0:width] for s in sizes])
            )
            levels.append(
                numerics.log_sum_exp(np.concatenate([raise_terms, same_terms]), axis=0)
            )
    return RecursionGrid(theta, lam, n_max, levels, shape=m)


def aggregate_mean_var(params, severity):
    """Wald moments of the total claim size."""
    count_mean, count_var = compounds.compound_mean_var(params)
    severity_mean = severity.mean()
    return (
        count_mean * severity_mean,
        count_mean * severity.variance() + count_var * severity_mean ** 2,
    )


def default_support_limit(params, severity):
    """ceil(mean + 10 standard deviations) of the total claim size."""
    mean, variance = aggregate_mean_var(params, severity)
    return int(math.ceil(mean + SUPPORT_STDDEVS * math.sqrt(variance)))


def aggregate_pmf(params, severity, n_max=None, max_grid=DEFAULT_MAX_GRID, cache=None):
    """
    Law of the total claim size over 0..N for a gpd, bartlett or shifted claim
    number. N defaults to `default_support_limit`.
    """
    if params.family == compounds.DELAPORTE and params.m >= 2:
        return aggregate_pmf_delaporte(
            severity, params.theta, params.lam, params.m, n_max, max_grid=max_grid
        )
    if n_max is None:
        n_max = default_support_limit(params, severity)
    return aggregate_grid(params, severity, n_max, max_grid, cache).column()


def aggregate_pmf_delaporte(
    severity,
    theta,
    lam,
    m,
    n_max=None,
    coefficients=RESOLVED,
    max_grid=DEFAULT_MAX_GRID,
):
    if n_max is None:
        n_max = default_support_limit(
            compounds.FamilyParams(compounds.DELAPORTE, lam, theta=theta, m=m), severity
        )
    return aggregate_grid_delaporte(
        severity, theta, lam, m, n_max, coefficients, max_grid
    ).column()


@dataclass(frozen=True)
class StopLoss:
    premium: float
    tail_bound: float


def stop_loss(q, d, mean=None, accuracy=None):
    """
    Stop-loss premium E[(T - d)+] over the computed support.

    Parameters
    ----------
    q : numerics.LogPmf
        Law of the total claim size.
    d : int
        Retention, at least 0.
    mean : float, optional
        Exact E[T]. Bounds the contribution beyond N by E[T] - sum n q(n).
        Without it the bound is zero only for an exact table and infinite
        otherwise.
    accuracy : float, optional
        Raise AccuracyError if the bound exceeds this.

    Returns
    -------
    StopLoss
    """
    if d < 0:
        raise DomainError("The retention must be nonnegative, got {}.".format(d))
    support = np.arange(len(q), dtype=np.float64)
    probabilities = q.probabilities()
    premium = float(np.sum(np.maximum(support - d, 0.0) * probabilities))
    if mean is not None:
        bound = max(0.0, mean - float(np.sum(support * probabilities)))
    elif q.log_tail == numerics.NEG_INF:
        bound = 0.0
    else:
        bound = math.inf
    if accuracy is not None and bound > accuracy:
        raise AccuracyError(
            "Stop-loss tail bound {} exceeds the requested accuracy {}.".format(
                bound, accuracy
            )
        )
    return StopLoss(premium=premium, tail_bound=bound)
