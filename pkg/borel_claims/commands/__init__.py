"""
Subcommands of the borel-claims script. Each maps a RunConfig to a Table or a
JSON-able report.
"""

from borel_claims.commands import aggregate, simulation, tables, verify

COMMANDS = {
    "pmf": tables.pmf_table,
    "moments": tables.moments_table,
    "sconst": tables.sconst_table,
    "aggregate": aggregate.aggregate_table,
    "simulate": simulation.simulation_report,
    "verify": verify.verification_report,
}
