"""Exception types shared across the package."""


class DegenerateDistributionError(ValueError):
    """A bootstrap distribution is too degenerate for the requested interval.

    Raised e.g. when every replicate falls on one side of the point estimate
    (BCa bias correction undefined) or when too many studentized replicates
    have zero variance. Callers may fall back to a simpler interval.
    """


class PopulationParseError(ValueError):
    """A population file is malformed (bad header or unparseable row)."""
