"""The two citation indicators and the closed-form dispersion helpers.

Both indicators are means of a per-record value: the citation score for
MNCS, and 100/0 for the top-10% flag for PP(top 10%). Keeping proportions
on the percent scale end to end means interval lengths for the two
indicators are directly comparable in reports.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .sampling import Population, PublicationRecord, Sample


class EstimatorKind(enum.Enum):
    """Which indicator to compute over a set of records."""

    MNCS = "mncs"
    PP_TOP10 = "pp_top10"


@dataclass(frozen=True)
class EstimateResult:
    """A point estimate: indicator kind, value, and the sample size used."""

    kind: EstimatorKind
    value: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind is EstimatorKind.PP_TOP10 and not 0.0 <= self.value <= 100.0:
            raise ValueError(f"PP(top 10%) must lie in [0, 100], got {self.value}")
        if self.kind is EstimatorKind.MNCS and self.value < 0.0:
            raise ValueError(f"MNCS must be >= 0, got {self.value}")


def _score_array(records) -> np.ndarray:
    if isinstance(records, (Population, Sample)):
        return records.ncs
    seq = list(records)
    if seq and isinstance(seq[0], PublicationRecord):
        return np.array([r.ncs for r in seq], dtype=np.float64)
    return np.asarray(seq, dtype=np.float64)


def _flag_array(records) -> np.ndarray:
    if isinstance(records, (Population, Sample)):
        return records.top10
    seq = list(records)
    if seq and isinstance(seq[0], PublicationRecord):
        return np.array([r.top10 for r in seq], dtype=bool)
    return np.asarray(seq, dtype=bool)


def unit_values(kind: EstimatorKind, records) -> np.ndarray:
    """Per-record values whose plain mean is the indicator.

    MNCS: the citation scores. PP(top 10%): 100.0 for flagged records and
    0.0 otherwise, so the mean is already in percent. Every resampling
    engine evaluates statistics through this array, which keeps the
    indicator, its bootstrap replicates, and the population truth on one
    numeric path.
    """
    if kind is EstimatorKind.MNCS:
        return _score_array(records)
    if kind is EstimatorKind.PP_TOP10:
        return np.where(_flag_array(records), 100.0, 0.0)
    raise ValueError(f"unknown estimator kind: {kind!r}")


def mncs(records) -> float:
    """Mean normalized citation score of the records."""
    arr = _score_array(records)
    if arr.size < 1:
        raise ValueError("mncs requires at least one record")
    return float(arr.mean())


def pp_top10(records) -> float:
    """Percentage of records flagged as top-10% most cited."""
    flags = _flag_array(records)
    if flags.size < 1:
        raise ValueError("pp_top10 requires at least one record")
    return float(np.where(flags, 100.0, 0.0).mean())


def estimate(kind: EstimatorKind, records) -> float:
    """Evaluate the indicator ``kind`` over ``records``."""
    arr = unit_values(kind, records)
    if arr.size < 1:
        raise ValueError("estimate requires at least one record")
    return float(arr.mean())


def estimate_result(kind: EstimatorKind, records) -> EstimateResult:
    arr = unit_values(kind, records)
    if arr.size < 1:
        raise ValueError("estimate requires at least one record")
    return EstimateResult(kind=kind, value=float(arr.mean()), n=int(arr.size))


def sample_variance(values) -> float:
    """Unbiased sample variance, denominator n - 1.

    Exactly 0.0 for a bitwise-constant input, so degenerate census cases
    propagate true zeros instead of rounding dust.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise ValueError("sample_variance requires at least two values")
    if np.all(arr == arr[0]):
        return 0.0
    return float(arr.var(ddof=1))


def se_mean_fpc(s2: float, n: int, N: int) -> float:
    """Standard error of the mean under SRSWOR from a finite population.

    sqrt(s2 / n) * sqrt((N - n) / (N - 1)), with the sample variance s2
    plugged in for the unobservable population variance.
    """
    if n > N:
        raise ValueError(f"sample size {n} exceeds population size {N}")
    if n < 2:
        raise ValueError("se_mean_fpc requires n >= 2")
    if not np.isfinite(s2) or s2 < 0:
        raise ValueError(f"s2 must be finite and >= 0, got {s2!r}")
    return math.sqrt(s2 / n) * math.sqrt((N - n) / (N - 1))
