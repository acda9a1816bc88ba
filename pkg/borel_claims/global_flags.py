"""
Defines flags that are used project-wide.
"""

import os

from absl import flags

from borel_claims import compounds, numerics, panjer
from borel_claims.errors import DomainError

FLAGS = flags.FLAGS

flags.DEFINE_enum(
    "family", compounds.GPD, compounds.FAMILIES, "Distribution family to evaluate."
)
flags.DEFINE_float("theta", 1.0, "Poisson part theta of the claim-number law.")
flags.DEFINE_float("lambda", 0.5, "Borel parameter lambda (offspring mean).")
flags.DEFINE_integer("m", 1, "Shape m of the Borel-Tanner and Delaporte laws.")
flags.DEFINE_integer("k", 0, "Shift order k of the shifted mixtures.")
flags.DEFINE_integer(
    "N",
    None,
    "Last mass point of every table. If unspecified, it is chosen from --tol "
    "(or by the mean + 10 stddev rule for aggregate laws).",
    lower_bound=0,
)
flags.DEFINE_alias("n", "N")

flags.DEFINE_enum("format", "csv", ["csv", "json"], "Output format.")
flags.DEFINE_string(
    "out", None, "File to write the output to. If unspecified, write to stdout."
)

flags.DEFINE_integer(
    "seed", 1337, "Random seed used for all sampling and random test severities."
)
flags.DEFINE_integer(
    "samples", 10 ** 6, "Number of Monte Carlo samples.", lower_bound=1
)
flags.DEFINE_float(
    "tol",
    numerics.DEFAULT_EPSILON,
    "Tail-mass tolerance used to choose N and to warn about truncated tables.",
)
flags.DEFINE_integer(
    "max_grid",
    int(os.environ.get("BOREL_CLAIMS_MAX_GRID", panjer.DEFAULT_MAX_GRID)),
    "Maximum number of cells of a Panjer grid. Defaults to $BOREL_CLAIMS_MAX_GRID.",
    lower_bound=1,
)


@flags.validator("tol", message="--tol must be positive.")
def _check_tol(value):
    return value > 0.0


@flags.multi_flags_validator(["family", "theta", "lambda", "m", "k"])
def _check_family_params(values):
    try:
        compounds.FamilyParams(
            values["family"],
            values["lambda"],
            theta=values["theta"],
            m=values["m"],
            k=values["k"],
        )
    except DomainError as error:
        raise flags.ValidationError("{}: {}".format(values["family"], error))
    return True


def lam():
    """Value of --lambda, which is not a legal attribute name."""
    return FLAGS["lambda"].value


def family_params():
    return compounds.FamilyParams(
        FLAGS.family, lam(), theta=FLAGS.theta, m=FLAGS.m, k=FLAGS.k
    )
