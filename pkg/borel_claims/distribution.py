"""
Utilities for running Monte Carlo batches in parallel.
"""
from concurrent.futures import ThreadPoolExecutor

from absl import flags, logging

from borel_claims import simulate

FLAGS = flags.FLAGS

flags.DEFINE_integer(
    "num_workers",
    1,
    "Number of threads running Monte Carlo batches. Results do not depend on it.",
    lower_bound=1,
)
flags.DEFINE_integer(
    "mc_batches",
    8,
    "Number of independent random streams spawned from --seed for a Monte Carlo run.",
    lower_bound=1,
)
flags.DEFINE_enum(
    "bit_generator",
    simulate.DEFAULT_BIT_GENERATOR,
    sorted(simulate.BIT_GENERATORS),
    "Bit generator behind every random stream.",
)
flags.DEFINE_integer(
    "generation_cap",
    simulate.DEFAULT_GENERATION_CAP,
    "Maximum number of accumulated claims in one branching draw.",
    lower_bound=1,
)

# Internal globals
_executor = None
_initialized = False


def _assert_initialized():
    if not _initialized:
        raise RuntimeError(
            "Parallel execution is not initialized. Call distribution.initialize()."
        )


def num_workers():
    _assert_initialized()
    return FLAGS.num_workers


def num_batches():
    """Number of random streams; fixes the result together with the seed."""
    return FLAGS.mc_batches


def batch_map():
    """A `map` running its calls on the worker pool, or the builtin without one."""
    _assert_initialized()
    if _executor is None:
        return map
    return _executor.map


def monte_carlo_check(target, sampler, n_samples, seed):
    """simulate.monte_carlo_check with the batch settings of the flags."""
    _assert_initialized()
    logging.info(
        "Monte Carlo: {} samples in {} batches from seed {}.".format(
            n_samples, num_batches(), seed
        )
    )
    return simulate.monte_carlo_check(
        target,
        sampler,
        n_samples,
        seed,
        n_batches=num_batches(),
        bit_generator=FLAGS.bit_generator,
        map_fn=batch_map(),
    )


def initialize():
    """
    Set up the worker pool. Must be called before any other function here.
    """
    global _executor
    global _initialized

    shutdown()
    if FLAGS.num_workers > 1:
        logging.info("Setting up {} Monte Carlo workers.".format(FLAGS.num_workers))
        _executor = ThreadPoolExecutor(max_workers=FLAGS.num_workers)
    else:
        logging.info("Monte Carlo batches will run serially.")
        _executor = None

    _initialized = True
    logging.info("Batches: {}.".format(num_batches()))
    logging.info("Bit generator: {}.".format(FLAGS.bit_generator))


def shutdown():
    global _executor
    global _initialized

    if _executor is not None:
        _executor.shutdown()
    _executor = None
    _initialized = False
