"""
Utilities to load claim-size (severity) distributions.

A severity file is plain text with one `n probability` pair per line, where n is
a positive integer claim size. Blank lines and everything after a `#` are
ignored. Probabilities must already sum to 1.
"""

import math

from absl import flags, logging

from borel_claims.errors import DomainError, SeverityFormatError
from borel_claims.panjer import SEVERITY_TOLERANCE, SeverityPmf

FLAGS = flags.FLAGS

flags.DEFINE_string(
    "severity",
    None,
    "Path to a severity file of `n probability` lines. "
    "If unspecified, every claim has size 1.",
)


def parse_severity_lines(lines, path="<severity>"):
    """
    Parse severity lines into a mapping from claim size to probability.

    Parameters
    ----------
    lines : iterable of string
        Lines of a severity file.
    path : string
        Name used in error messages.

    Returns
    -------
    dict
        Claim size -> probability.
    """
    weights = {}
    for line_number, line in enumerate(lines, start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        if len(fields) != 2:
            raise SeverityFormatError(
                path, line_number, "expected `n probability`, got {!r}".format(content)
            )
        try:
            size = int(fields[0])
        except ValueError:
            raise SeverityFormatError(
                path, line_number, "claim size {!r} is not an integer".format(fields[0])
            )
        try:
            probability = float(fields[1])
        except ValueError:
            raise SeverityFormatError(
                path,
                line_number,
                "probability {!r} is not a number".format(fields[1]),
            )
        if size < 1:
            raise SeverityFormatError(
                path, line_number, "claim sizes must be positive, got {}".format(size)
            )
        if not math.isfinite(probability) or probability < 0.0:
            raise SeverityFormatError(
                path,
                line_number,
                "probability must be finite and nonnegative, got {}".format(fields[1]),
            )
        if size in weights:
            raise SeverityFormatError(
                path, line_number, "claim size {} appears twice".format(size)
            )
        weights[size] = probability

    if not weights:
        raise DomainError("{}: no claim sizes found.".format(path))
    total = math.fsum(weights.values())
    if abs(total - 1.0) > SEVERITY_TOLERANCE:
        raise DomainError(
            "{}: probabilities sum to {!r}, not 1; weights are not "
            "renormalized.".format(path, total)
        )
    return weights


def load_severity_file(path):
    """Read a severity file into a SeverityPmf."""
    logging.info("Loading severity: {}".format(path))
    with open(path) as severity_file:
        weights = parse_severity_lines(severity_file, path)
    severity = SeverityPmf.from_weights(weights)
    logging.info(
        "Severity has {} claim sizes up to {} with mean {}.".format(
            len(weights), severity.max_claim, severity.mean()
        )
    )
    return severity


def load_severity(path=None):
    """The severity at `path`, or the unit severity if no path is given."""
    if path is None:
        return SeverityPmf.unit()
    return load_severity_file(path)
