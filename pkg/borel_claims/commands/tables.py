"""
The `pmf`, `moments` and `sconst` commands.
"""

import numpy as np
from absl import flags, logging

from borel_claims import compounds, numerics
from borel_claims.utils import Table

FLAGS = flags.FLAGS

flags.DEFINE_integer(
    "order", 4, "Highest raw moment reported by `moments`.", lower_bound=1
)
flags.DEFINE_multi_enum(
    "methods",
    list(compounds.S_METHODS),
    compounds.S_METHODS,
    "Methods used by `sconst`. Methods that do not apply to --k are skipped.",
)


def pmf_table(config):
    """Rows (n, p, log p, cumulative) of the configured law, with its tail bound."""
    table = compounds.compound_log_pmf_table(
        config.params, config.n_max, epsilon=config.tol
    )
    logging.info("Truncation point: N={}.".format(table.support_limit))
    if table.tail_bound > config.tol:
        logging.warning(
            "Tail bound {} beyond N={} exceeds --tol={}.".format(
                table.tail_bound, table.support_limit, config.tol
            )
        )
    values = np.column_stack(
        [
            np.arange(len(table)),
            table.probabilities(),
            table.log_p,
            table.cumulative(),
        ]
    )
    return Table(
        ["n", "p", "log_p", "cumulative"], values, {"tail_bound": table.tail_bound}
    )


def moments_table(config, order=None):
    """
    Raw moments 1..order with the closed-form mean and variance. For the
    shifted family both moment methods are reported; otherwise raw moments are
    summed until the tail of n^order p(n) is certified below --tol relative
    to the sum.
    """
    order = FLAGS.order if order is None else order
    params = config.params
    mean, variance = compounds.compound_mean_var(params)
    orders = np.arange(1, order + 1)
    if params.family == compounds.SHIFTED:
        mixture = compounds.ShiftedMixtureParams(params.k, params.theta, params.lam)
        cache = compounds.SConstantCache(params.theta, params.lam)
        columns = ["order", compounds.LEMMA, compounds.SHIFTED_POWER]
        values = np.column_stack(
            [orders]
            + [
                [compounds.mixture_moment(mixture, o, method, cache) for o in orders]
                for method in (compounds.LEMMA, compounds.SHIFTED_POWER)
            ]
        )
    elif params.family == compounds.GPD and params.theta == 0.0:
        columns = ["order", "certified_sum"]
        values = np.column_stack([orders, np.zeros(order)])
    else:
        limit_ratio = numerics.limit_term_ratio(params.lam)

        def log_pmf_fn(last):
            return compounds.log_pmf_array(params, last)

        moments, tails = zip(
            *[
                numerics.certified_raw_moment(
                    log_pmf_fn, int(o), limit_ratio, rel_epsilon=config.tol
                )
                for o in orders
            ]
        )
        logging.info("Largest moment tail bound: {}.".format(max(tails)))
        columns = ["order", "certified_sum"]
        values = np.column_stack([orders, moments])
    return Table(columns, values, {"mean": mean, "variance": variance})


def sconst_table(config, methods=None):
    """S(k, theta, lambda) by every requested method that applies to k."""
    methods = FLAGS.methods if methods is None else methods
    params = config.params
    columns, values = ["k"], [params.k]
    for method in compounds.S_METHODS:
        if method not in methods:
            continue
        if method == compounds.CLOSED and params.k < 1:
            logging.info("Skipping the closed form of S for k={}.".format(params.k))
            continue
        columns.append("S_{}".format(method))
        values.append(
            compounds.s_constant(params.k, params.theta, params.lam, method=method)
        )
    return Table(columns, np.array([values], dtype=np.float64))
