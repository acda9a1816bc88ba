"""
Script which evaluates, aggregates, samples and verifies the compound laws with
Borel summands.

Run as `python3 borel_claims/scripts/run_borel_claims.py <command> [flags]` (or
`borel-claims <command> [flags]` once installed), where <command> is one of
pmf, moments, sconst, aggregate, simulate and verify. Run with `--helpfull` for
a complete list of flags. With a command only, the command's default flagfiles
from borel_claims/parameters are loaded.

Exit codes: 0 on success, 1 when `verify` finds a failing check, 2 on usage and
domain errors.
"""

import os
import sys

from absl import app, flags, logging

from borel_claims import distribution, parameters, utils
from borel_claims.commands import COMMANDS
from borel_claims.commands.config import RunConfig
from borel_claims.errors import (
    AccuracyError,
    BudgetExceededError,
    ConvergenceError,
    DomainError,
    GenerationCapExceeded,
)

FLAGS = flags.FLAGS

CHECK_FAILURE = 1
USAGE_ERROR = 2

DEFAULT_FLAGFILES = {"simulate": ["montecarlo.cfg"], "verify": ["verify.cfg"]}

# Violated preconditions: bad parameters, budgets, caps and unreadable inputs.
PRECONDITION_ERRORS = (
    DomainError,
    AccuracyError,
    BudgetExceededError,
    ConvergenceError,
    GenerationCapExceeded,
    OSError,
)


def flagfile_path(name):
    return os.path.join(os.path.dirname(parameters.__file__), name)


def default_flagfiles(command):
    names = ["global_defaults.cfg"] + DEFAULT_FLAGFILES.get(command, [])
    return ["--flagfile={}".format(flagfile_path(name)) for name in names]


def _usage_error(message):
    sys.stderr.write("borel-claims: {}\n".format(message))
    sys.exit(USAGE_ERROR)


def parse_flags(argv):
    """Parse flags, mapping every parse or validation error to exit code 2."""
    if len(argv) == 2 and argv[1] in COMMANDS:
        argv = argv + default_flagfiles(argv[1])
    try:
        remaining = FLAGS(argv)
    except flags.Error as error:
        _usage_error(error)
    if len(remaining) != 2 or remaining[1] not in COMMANDS:
        _usage_error(
            "expected exactly one command out of {}, got {}.".format(
                ", ".join(COMMANDS), remaining[1:]
            )
        )
    return remaining


def main(argv):
    command = argv[1]
    try:
        config = RunConfig.from_flags(command)
        distribution.initialize()
        result = COMMANDS[command](config)
        utils.write_output(result, config.output_format, config.out)
    except PRECONDITION_ERRORS as error:
        message = " ".join(str(error).split())
        sys.stderr.write(
            "borel-claims {}: {}: {}\n".format(command, type(error).__name__, message)
        )
        return USAGE_ERROR
    finally:
        distribution.shutdown()

    if command == "verify" and not result["passed"]:
        logging.warning("Verification failed.")
        return CHECK_FAILURE
    return 0


def run():
    app.run(main, flags_parser=parse_flags)


if __name__ == "__main__":
    run()
