"""
The `aggregate` command: law of the total claim size by the Panjer schemes.
"""

import numpy as np
from absl import flags, logging

from borel_claims import compounds, data, panjer
from borel_claims.utils import Table

FLAGS = flags.FLAGS

flags.DEFINE_integer(
    "retention", 0, "Retention d of the reported stop-loss premium.", lower_bound=0
)
flags.DEFINE_enum(
    "coefficients",
    panjer.RESOLVED,
    panjer.COEFFICIENT_VARIANTS,
    "Same-shape branch coefficients of the Delaporte scheme.",
)


def aggregate_table(config, retention=None, coefficients=None):
    retention = FLAGS.retention if retention is None else retention
    coefficients = FLAGS.coefficients if coefficients is None else coefficients
    params = config.params
    severity = data.load_severity(config.severity_path)

    mean, variance = panjer.aggregate_mean_var(params, severity)
    n_max = config.n_max
    if n_max is None:
        n_max = panjer.default_support_limit(params, severity)
        logging.info("Support limit from mean + 10 stddev: N={}.".format(n_max))

    if params.family == compounds.DELAPORTE and params.m >= 2:
        logging.info(
            "Delaporte pyramid with {} cells, {} coefficients.".format(
                panjer.pyramid_cells(n_max), coefficients
            )
        )
        q = panjer.aggregate_pmf_delaporte(
            severity,
            params.theta,
            params.lam,
            params.m,
            n_max,
            coefficients=coefficients,
            max_grid=config.max_grid,
        )
    else:
        logging.info(
            "Panjer triangle with {} cells.".format(panjer.triangle_cells(n_max))
        )
        q = panjer.aggregate_pmf(params, severity, n_max, max_grid=config.max_grid)

    if config.n_max is None and q.tail_bound > config.tol:
        logging.warning(
            "Default N={} leaves a complement tail of {} above --tol={}.".format(
                n_max, q.tail_bound, config.tol
            )
        )
    premium = panjer.stop_loss(q, retention, mean=mean)
    values = np.column_stack(
        [np.arange(len(q)), q.probabilities(), q.log_p, q.cumulative()]
    )
    return Table(
        ["n", "p", "log_p", "cumulative"],
        values,
        {
            "tail_bound": q.tail_bound,
            "mean": mean,
            "variance": variance,
            "retention": retention,
            "stop_loss": premium.premium,
            "stop_loss_tail_bound": premium.tail_bound,
        },
    )
