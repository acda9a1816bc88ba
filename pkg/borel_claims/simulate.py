"""
Exact samplers for the claim-number laws and a Monte Carlo harness that compares
empirical frequencies against a tabulated law.

Borel draws come from the branching process itself: every claim causes a
Poisson(lambda) number of further claims, and only the size of the current
generation is tracked.
"""

from dataclasses import dataclass

import numpy as np
from absl import logging
from scipy import stats

from borel_claims import borel, compounds
from borel_claims.errors import DomainError, GenerationCapExceeded

DEFAULT_GENERATION_CAP = 10 ** 7
# Draws whose accumulated claims passed the generation cap.
CAP_EXCEEDED = -1
MIN_MONTE_CARLO_SAMPLES = 10 ** 4
MIN_EXPECTED_COUNT = 5.0

BIT_GENERATORS = {
    "pcg64": np.random.PCG64,
    "philox": np.random.Philox,
    "sfc64": np.random.SFC64,
}
DEFAULT_BIT_GENERATOR = "pcg64"

REPRESENTATION = "representation"
INVERSE_CDF = "inverse-cdf"
ROUTES = (REPRESENTATION, INVERSE_CDF)


def make_rng(seed, bit_generator=DEFAULT_BIT_GENERATOR):
    """
    A numpy Generator on the named bit generator.

    Parameters
    ----------
    seed : int or numpy.random.SeedSequence
    bit_generator : string
        One of the keys of BIT_GENERATORS.
    """
    if bit_generator not in BIT_GENERATORS:
        raise DomainError(
            "Unknown bit generator {}; choose one of {}.".format(
                bit_generator, ", ".join(sorted(BIT_GENERATORS))
            )
        )
    return np.random.Generator(BIT_GENERATORS[bit_generator](seed))


def spawn_seeds(seed, n_batches):
    """Independent child seed sequences, one per batch."""
    if n_batches < 1:
        raise DomainError("Need at least one batch, got {}.".format(n_batches))
    return np.random.SeedSequence(seed).spawn(n_batches)


def _branch(lam, rng, initial, generation_cap, generations=None):
    total = np.array(initial, dtype=np.int64)
    current = total.copy()
    exceeded = np.zeros(total.shape, dtype=bool)
    generation = 0
    active = current > 0
    while active.any() and (generations is None or generation < generations):
        offspring = rng.poisson(lam * current[active])
        current[active] = offspring
        total[active] += offspring
        exceeded |= total > generation_cap
        current[exceeded] = 0
        active = current > 0
        generation += 1
    n_exceeded = int(np.count_nonzero(exceeded))
    if n_exceeded:
        logging.warning(str(GenerationCapExceeded(generation_cap, n_exceeded)))
        total[exceeded] = CAP_EXCEEDED
    return total


def _single(draws, generation_cap):
    if draws[0] == CAP_EXCEEDED:
        raise GenerationCapExceeded(generation_cap)
    return int(draws[0])


def sample_borel_batch(
    lam, rng, size=None, initial=1, generation_cap=DEFAULT_GENERATION_CAP
):
    """
    Total progeny of Galton-Watson processes with Poisson(lam) offspring.

    Parameters
    ----------
    lam : float
        Offspring mean in (0, 1].
    rng : numpy.random.Generator
    size : int, optional
        Number of draws. If None, the shape of `initial` is used.
    initial : int or array of int
        Number of claims in generation zero. With initial = m every draw is a
        sum of m Borel draws.
    generation_cap : int
        Maximum number of accumulated claims per draw. A draw passing it stops
        branching and is returned as CAP_EXCEEDED.

    Returns
    -------
    numpy.ndarray of int64
    """
    borel.check_lambda(lam)
    initial = np.asarray(initial, dtype=np.int64)
    if np.any(initial < 0):
        raise DomainError("Initial generation sizes must be nonnegative.")
    if size is not None:
        initial = np.broadcast_to(initial, (size,))
    return _branch(lam, rng, initial, generation_cap)


def sample_borel(lam, rng, generation_cap=DEFAULT_GENERATION_CAP):
    """One Borel(lam) draw. Raises GenerationCapExceeded past the cap."""
    draws = sample_borel_batch(lam, rng, 1, generation_cap=generation_cap)
    return _single(draws, generation_cap)


def sample_generation_totals(
    lam, rng, generations, size, generation_cap=DEFAULT_GENERATION_CAP
):
    """Number of claims up to and including the given generation, from one claim."""
    borel.check_lambda(lam)
    if generations < 0:
        raise DomainError(
            "generations must be nonnegative, got {}.".format(generations)
        )
    initial = np.ones(size, dtype=np.int64)
    return _branch(lam, rng, initial, generation_cap, generations)


def sample_claim_count(params, rng, size):
    """
    Draws of the number of Borel summands N of a compound family.

    Parameters
    ----------
    params : compounds.FamilyParams
        A gpd, bartlett, delaporte or shifted (k >= 1) law.
    """
    family, theta, lam = params.family, params.theta, params.lam
    if family == compounds.GPD:
        return rng.poisson(theta, size)
    if family == compounds.BARTLETT:
        return rng.poisson(theta, size) + rng.geometric(1.0 - lam, size) - 1
    if family == compounds.DELAPORTE:
        extra = rng.negative_binomial(params.m, 1.0 - lam, size)
        return rng.poisson(theta, size) + extra
    if family == compounds.SHIFTED:
        if params.k < 1:
            raise DomainError(
                "The shifted law of order {} has no compound representation; "
                "use the inverse-cdf route.".format(params.k)
            )
        shift_law = compounds.v_distribution(params.k, theta, lam)
        shifts = rng.choice(params.k, size=size, p=shift_law.probabilities)
        return (
            shifts
            + rng.poisson(theta, size)
            + rng.negative_binomial(params.k + shifts, 1.0 - lam)
        )
    raise DomainError("The {} family is not a compound of Borel draws.".format(family))


def sample_compound(
    params,
    rng,
    size=None,
    route=REPRESENTATION,
    generation_cap=DEFAULT_GENERATION_CAP,
):
    """
    Exact draws from any supported law.

    The representation route draws the claim count and then the Borel total
    progeny of that many claims. The inverse-cdf route samples from the
    certified table of the law.

    Parameters
    ----------
    params : compounds.FamilyParams
    rng : numpy.random.Generator
    size : int, optional
        If None, a single int is returned.
    route : string
        REPRESENTATION or INVERSE_CDF.
    generation_cap : int
        Representation draws passing it are returned as CAP_EXCEEDED. A single
        draw (size None) raises GenerationCapExceeded instead.

    Returns
    -------
    int or numpy.ndarray of int64
    """
    if route not in ROUTES:
        raise DomainError(
            "Unknown sampling route {}; choose one of {}.".format(
                route, ", ".join(ROUTES)
            )
        )
    n_draws = 1 if size is None else size
    if route == INVERSE_CDF:
        draws = sample_from_pmf(compounds.compound_log_pmf_table(params), rng, n_draws)
    elif params.family == compounds.BOREL:
        draws = sample_borel_batch(params.lam, rng, n_draws, 1, generation_cap)
    elif params.family == compounds.BOREL_TANNER:
        draws = sample_borel_batch(params.lam, rng, n_draws, params.m, generation_cap)
    else:
        counts = sample_claim_count(params, rng, n_draws)
        draws = _branch(params.lam, rng, counts, generation_cap)
    return _single(draws, generation_cap) if size is None else draws


def sample_from_pmf(pmf, rng, size):
    """
    Inverse-cdf draws from a LogPmf over 0..N. Draws landing in the mass beyond
    N are returned as N + 1.
    """
    cumulative = pmf.cumulative()
    return np.searchsorted(cumulative, rng.random(size), side="right").astype(np.int64)


def sample_aggregate(claim_sampler, severity, rng, size):
    """
    Total claim size draws.

    Parameters
    ----------
    claim_sampler : callable (rng, size) -> array of int
        Draws of the claim number.
    severity : panjer.SeverityPmf
    rng : numpy.random.Generator
    size : int

    Claim counts returned as CAP_EXCEEDED stay CAP_EXCEEDED.
    """
    counts = np.asarray(claim_sampler(rng, size), dtype=np.int64)
    capped = counts == CAP_EXCEEDED
    counts = np.where(capped, 0, counts)
    claims = rng.choice(severity.f.size, size=int(counts.sum()), p=severity.f)
    owners = np.repeat(np.arange(size), counts)
    totals = np.bincount(owners, weights=claims, minlength=size).astype(np.int64)
    totals[capped] = CAP_EXCEEDED
    return totals


@dataclass(frozen=True)
class SampleStats:
    """
    Empirical frequencies against a target law over 0..N. The last bin of
    `frequencies` counts every draw beyond N, including the n_cap_exceeded
    draws stopped at the generation cap.
    """

    seed: int
    n_samples: int
    frequencies: np.ndarray
    target: object
    tv_distance: float
    max_abs_dev: float
    n_cap_exceeded: int = 0

    @classmethod
    def from_frequencies(cls, seed, frequencies, target, n_cap_exceeded=0):
        frequencies = np.asarray(frequencies, dtype=np.int64)
        n_samples = int(frequencies.sum())
        deviation = frequencies / n_samples - _target_bins(target)
        return cls(
            seed=seed,
            n_samples=n_samples,
            frequencies=frequencies,
            target=target,
            tv_distance=0.5 * float(np.sum(np.abs(deviation))),
            max_abs_dev=float(np.max(np.abs(deviation))),
            n_cap_exceeded=int(n_cap_exceeded),
        )

    def merge(self, other):
        """Pool two batches drawn against the same target."""
        if self.frequencies.size != other.frequencies.size:
            raise DomainError("Cannot merge statistics over different supports.")
        return SampleStats.from_frequencies(
            min(self.seed, other.seed),
            self.frequencies + other.frequencies,
            self.target,
            self.n_cap_exceeded + other.n_cap_exceeded,
        )

    def z_scores(self):
        """(empirical - target) / binomial standard error, per bin."""
        expected = _target_bins(self.target)
        empirical = self.frequencies / self.n_samples
        scale = np.sqrt(expected * (1.0 - expected) / self.n_samples)
        z = np.zeros_like(expected)
        positive = scale > 0.0
        z[positive] = (empirical[positive] - expected[positive]) / scale[positive]
        z[~positive & (empirical != expected)] = np.inf
        return z

    def to_dict(self):
        z = self.z_scores()
        return {
            "seed": int(self.seed),
            "n_samples": self.n_samples,
            "support_limit": int(self.frequencies.size - 2),
            "tv_distance": self.tv_distance,
            "max_abs_dev": self.max_abs_dev,
            "max_abs_z": float(np.max(np.abs(z))),
            "n_cap_exceeded": self.n_cap_exceeded,
            "frequencies": self.frequencies.tolist(),
            "z_scores": z.tolist(),
        }


def _target_bins(target):
    p = target.probabilities()
    return np.append(p, max(0.0, 1.0 - float(np.sum(p))))


def _count_batch(sampler, seed_sequence, size, n_bins, bit_generator):
    draws = np.asarray(sampler(make_rng(seed_sequence, bit_generator), size))
    capped = draws == CAP_EXCEEDED
    bins = np.where(capped, n_bins - 1, np.minimum(draws, n_bins - 1))
    return np.bincount(bins, minlength=n_bins), int(np.count_nonzero(capped))


def monte_carlo_check(
    target,
    sampler,
    n_samples,
    seed,
    n_batches=1,
    bit_generator=DEFAULT_BIT_GENERATOR,
    map_fn=map,
):
    """
    Draw `n_samples` values and compare their frequencies with `target`.

    Parameters
    ----------
    target : numerics.LogPmf
    sampler : callable (rng, size) -> array of int
        Draws equal to CAP_EXCEEDED count in the bin beyond N, which is exact
        whenever the generation cap is at least N.
    n_samples : int
        At least MIN_MONTE_CARLO_SAMPLES.
    seed : int
    n_batches : int
        Number of independent streams spawned from `seed`. Results depend on
        (seed, n_batches) only.
    bit_generator : string
    map_fn : callable
        A `map` to run the batches with, such as an executor's.

    Returns
    -------
    SampleStats
    """
    if n_samples < MIN_MONTE_CARLO_SAMPLES:
        raise DomainError(
            "A Monte Carlo check needs at least {} samples, got {}.".format(
                MIN_MONTE_CARLO_SAMPLES, n_samples
            )
        )
    n_bins = target.support_size + 1
    base, extra = divmod(n_samples, n_batches)
    sizes = [base + (1 if b < extra else 0) for b in range(n_batches)]
    seeds = spawn_seeds(seed, n_batches)
    batches = list(
        map_fn(
            lambda args: _count_batch(sampler, args[0], args[1], n_bins, bit_generator),
            zip(seeds, sizes),
        )
    )
    frequencies = np.sum([counts for counts, _ in batches], axis=0)
    n_cap_exceeded = sum(capped for _, capped in batches)
    if n_cap_exceeded:
        logging.warning(
            "{} of {} draws stopped at the generation cap; counted beyond N.".format(
                n_cap_exceeded, n_samples
            )
        )
    return SampleStats.from_frequencies(seed, frequencies, target, n_cap_exceeded)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    pvalue: float
    dof: int
    n_bins: int


def _pooled_columns(counts, totals):
    min_row = min(totals)
    grand = sum(totals)
    columns, pending = [], np.zeros(2, dtype=np.int64)
    for column in counts.T:
        pending = pending + column
        if pending.sum() * min_row / grand >= MIN_EXPECTED_COUNT:
            columns.append(pending)
            pending = np.zeros(2, dtype=np.int64)
    if pending.sum() > 0:
        if columns:
            columns[-1] = columns[-1] + pending
        else:
            columns.append(pending)
    return np.array(columns).T


def two_sample_chi_square(a, b):
    """
    Chi-square homogeneity test of two samples of nonnegative integers, with
    adjacent outcomes pooled until every expected count is at least 5.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.min() < 0 or b.min() < 0:
        raise DomainError("Samples must be nonnegative; drop capped draws first.")
    length = int(max(a.max(), b.max())) + 1
    counts = np.stack(
        [np.bincount(a, minlength=length), np.bincount(b, minlength=length)]
    )
    table = _pooled_columns(counts, (a.size, b.size))
    if table.shape[1] < 2:
        raise DomainError("Both samples fall into a single pooled bin.")
    statistic, pvalue, dof, _ = stats.chi2_contingency(table, correction=False)
    return ChiSquareResult(float(statistic), float(pvalue), int(dof), table.shape[1])
