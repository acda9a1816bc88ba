"""
The `simulate` command: Monte Carlo draws of the configured law compared with
its table. Statistics are written as JSON whatever the --format.
"""

import math

from absl import flags, logging

from borel_claims import compounds, data, distribution, panjer, simulate

FLAGS = flags.FLAGS


def claim_sampler(params, generation_cap):
    """A sampler (rng, size) -> draws of the configured claim-number law."""
    route = simulate.REPRESENTATION
    if params.family == compounds.SHIFTED and params.k < 1:
        logging.info(
            "Order k={} has no compound representation; sampling its table.".format(
                params.k
            )
        )
        route = simulate.INVERSE_CDF

    def sampler(rng, size):
        return simulate.sample_compound(
            params, rng, size, route=route, generation_cap=generation_cap
        )

    return sampler


def simulation_report(config):
    params = config.params
    claims = claim_sampler(params, FLAGS.generation_cap)
    if config.severity_path is None:
        target = compounds.compound_log_pmf_table(
            params, config.n_max, epsilon=config.tol
        )
        sampler = claims
    else:
        severity = data.load_severity(config.severity_path)
        target = panjer.aggregate_pmf(
            params, severity, config.n_max, max_grid=config.max_grid
        )

        def sampler(rng, size):
            return simulate.sample_aggregate(claims, severity, rng, size)

    stats = distribution.monte_carlo_check(target, sampler, config.samples, config.seed)
    report = config.describe()
    report.update(stats.to_dict())
    report["n_batches"] = distribution.num_batches()
    report["bit_generator"] = FLAGS.bit_generator
    report["aggregate"] = config.severity_path is not None
    report["tv_bound"] = 5.0 * math.sqrt(target.support_size / config.samples)
    logging.info(
        "TV distance {} against the bound {}.".format(
            stats.tv_distance, report["tv_bound"]
        )
    )
    return report
