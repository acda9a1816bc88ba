"""
The configuration a command runs with, read once from the flags.
"""

from dataclasses import dataclass
from typing import Optional

from absl import flags, logging

from borel_claims import compounds, data, global_flags, numerics, panjer  # noqa

FLAGS = flags.FLAGS


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: compounds.FamilyParams
    n_max: Optional[int] = None
    severity_path: Optional[str] = None
    output_format: str = "csv"
    out: Optional[str] = None
    seed: int = 1337
    samples: int = 10 ** 6
    tol: float = numerics.DEFAULT_EPSILON
    max_grid: int = panjer.DEFAULT_MAX_GRID

    @classmethod
    def from_flags(cls, command):
        logging.debug("Flags:\n{}".format(FLAGS.flags_into_string()))
        return cls(
            command=command,
            params=global_flags.family_params(),
            n_max=FLAGS.N,
            severity_path=FLAGS.severity,
            output_format=FLAGS.format,
            out=FLAGS.out,
            seed=FLAGS.seed,
            samples=FLAGS.samples,
            tol=FLAGS.tol,
            max_grid=FLAGS.max_grid,
        )

    def describe(self):
        """Family and parameters, as reported next to results."""
        p = self.params
        described = {"family": p.family, "lambda": p.lam}
        if p.family not in (compounds.BOREL, compounds.BOREL_TANNER):
            described["theta"] = p.theta
        if p.family in (compounds.BOREL_TANNER, compounds.DELAPORTE):
            described["m"] = p.m
        if p.family == compounds.SHIFTED:
            described["k"] = p.k
        return described
