"""Bootstrap engines and finite-population correction factors.

Three resampling schemes for a sample drawn without replacement from a
finite population:

* standard: with-replacement resamples of size n from the sample (ignores
  the finite population, so it overstates variance when f = n/N is large);
* pseudo-population: replicate the sample into an N-sized pseudo-population
  (floor(N/n) whole copies plus a without-replacement remainder), then
  redraw the original design (SRSWOR of size n) from it;
* mirror-match: concatenate k small without-replacement subsamples whose
  own sampling fraction mirrors the original design.

All engines evaluate the statistic through ``unit_values`` so both
indicators ride the same mean-of-values path, and consume their stream in
fixed-size blocks so results never depend on caller memory or threading.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .estimators import EstimatorKind, sample_variance, unit_values
from .sampling import RngStream, Sample, _partial_permutation

# Engines draw in blocks of this many replicates. Fixed: the stream
# consumption pattern is part of the reproducibility contract.
_BLOCK = 512


class Method(enum.Enum):
    """Which resampling scheme produced a set of bootstrap replicates."""

    STANDARD = "standard"
    PPB = "ppb"
    MIRROR_MATCH = "mirror"


@dataclass(frozen=True)
class FpcFactors:
    """The two finite-population correction factors for a given (n, N)."""

    one_minus_f: float
    bias_adjusted: float

    def __post_init__(self):
        if not 0.0 <= self.one_minus_f < 1.0:
            raise ValueError(f"one_minus_f out of range: {self.one_minus_f}")
        if not 0.0 <= self.bias_adjusted <= 1.0:
            raise ValueError(f"bias_adjusted out of range: {self.bias_adjusted}")


def fpc(n: int, N: int) -> FpcFactors:
    """Correction factors 1 - n/N and (N - n)/(N - 1)."""
    if N < 2:
        raise ValueError(f"population size must be >= 2, got {N}")
    if not 1 <= n <= N:
        raise ValueError(f"sample size must satisfy 1 <= n <= {N}, got {n}")
    return FpcFactors(one_minus_f=(N - n) / N, bias_adjusted=(N - n) / (N - 1))


def corrected_variance(v_star: float, n: int, N: int) -> float:
    """Bias-adjusted bootstrap variance: ((N - n) / (N - 1)) * v_star."""
    if not np.isfinite(v_star) or v_star < 0:
        raise ValueError(f"variance must be finite and >= 0, got {v_star!r}")
    return fpc(n, N).bias_adjusted * v_star


@dataclass(frozen=True)
class BootstrapReplicates:
    """B bootstrap estimates, optionally with per-replicate variance estimates."""

    B: int
    estimates: np.ndarray
    t_variances: np.ndarray | None
    method: Method

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=np.float64)
        object.__setattr__(self, "estimates", est)
        if self.B < 1 or est.size != self.B:
            raise ValueError(f"expected {self.B} estimates, got {est.size}")
        if not np.all(np.isfinite(est)):
            raise ValueError("bootstrap estimates must be finite")
        if self.t_variances is not None:
            tv = np.asarray(self.t_variances, dtype=np.float64)
            object.__setattr__(self, "t_variances", tv)
            if tv.size != self.B:
                raise ValueError(f"expected {self.B} t_variances, got {tv.size}")
            if np.any(tv < 0) or not np.all(np.isfinite(tv)):
                raise ValueError("t_variances must be finite and >= 0")


def bootstrap_variance(reps: BootstrapReplicates) -> float:
    """Sample variance (denominator B - 1) of the bootstrap estimates."""
    if reps.B < 2:
        raise ValueError("bootstrap_variance requires at least two replicates")
    return sample_variance(reps.estimates)


def _srswor_rows(gen: np.random.Generator, rows: int, n_take: int, pool_size: int) -> np.ndarray:
    """One SRSWOR index set of size n_take from range(pool_size) per row.

    Partial Fisher-Yates vectorized across rows; exact uniformity over
    subsets, one batched integer draw per block.
    """
    idx = np.tile(np.arange(pool_size, dtype=np.int64), (rows, 1))
    draws = gen.integers(np.arange(n_take, dtype=np.int64)[:, None], pool_size, size=(n_take, rows))
    rr = np.arange(rows)
    for i in range(n_take):
        j = draws[i]
        vi = idx[:, i].copy()
        idx[:, i] = idx[rr, j]
        idx[rr, j] = vi
    return idx[:, :n_take]


def _blocks(B: int):
    for lo in range(0, B, _BLOCK):
        yield lo, min(lo + _BLOCK, B)


def standard_bootstrap(
    sample: Sample,
    B: int,
    kind: EstimatorKind,
    rng: RngStream,
    with_t_variances: bool = False,
) -> BootstrapReplicates:
    """Efron's with-replacement bootstrap of the sample statistic.

    Each replicate resamples n records with replacement from the sample
    and re-evaluates the statistic. When requested, per-replicate variance
    estimates use the analytic form for a mean, s2_b * (n - 1) / n**2.
    """
    n = sample.n
    if n < 2:
        raise ValueError("standard_bootstrap requires a sample of size >= 2")
    if B < 1:
        raise ValueError("B must be >= 1")
    vals = unit_values(kind, sample)
    gen = rng.generator
    est = np.empty(B)
    tvar = np.empty(B) if with_t_variances else None
    for lo, hi in _blocks(B):
        idx = gen.integers(0, n, size=(hi - lo, n))
        m = vals[idx]
        est[lo:hi] = m.mean(axis=1)
        if tvar is not None:
            tvar[lo:hi] = m.var(axis=1, ddof=1) * (n - 1) / (n * n)
    return BootstrapReplicates(B=B, estimates=est, t_variances=tvar, method=Method.STANDARD)


@dataclass(frozen=True)
class PseudoPopulation:
    """An N-sized stand-in population assembled from whole copies of a sample.

    k whole copies of the sample plus a without-replacement remainder of
    r = N - k*n of its records, laid out copies-first.
    """

    k: int
    remainder: int
    ncs: np.ndarray
    top10: np.ndarray

    def __post_init__(self):
        if self.k < 1 or self.remainder < 0:
            raise ValueError("invalid pseudo-population shape")
        if self.ncs.size != self.top10.size:
            raise ValueError("ncs and top10 must have equal length")

    @property
    def size(self) -> int:
        return int(self.ncs.size)


def build_pseudo_population(sample: Sample, N: int, rng: RngStream) -> PseudoPopulation:
    """Materialize one pseudo-population of size N from the sample."""
    n = sample.n
    if N < n:
        raise ValueError(f"population size {N} smaller than sample size {n}")
    k, r = divmod(N, n)
    if r > 0:
        rem = np.sort(_partial_permutation(rng.generator, r, n))
        ncs = np.concatenate([np.tile(sample.ncs, k), sample.ncs[rem]])
        top10 = np.concatenate([np.tile(sample.top10, k), sample.top10[rem]])
    else:
        ncs = np.tile(sample.ncs, k)
        top10 = np.tile(sample.top10, k)
    return PseudoPopulation(k=k, remainder=r, ncs=ncs, top10=top10)


def ppb_bootstrap(
    sample: Sample,
    N: int,
    B: int,
    kind: EstimatorKind,
    rng: RngStream,
    with_t_variances: bool = False,
    fixed_completion: bool = False,
) -> BootstrapReplicates:
    """Pseudo-population bootstrap: rerun the SRSWOR design on an N-sized replica.

    Each replicate completes the pseudo-population (k whole copies of the
    sample plus r = N - k*n records redrawn without replacement from the
    sample; redrawn per replicate unless ``fixed_completion``), draws an
    SRSWOR sample of size n from it, and re-evaluates the statistic.
    Per-replicate variance estimates carry the 1 - f correction.
    """
    n = sample.n
    if N < n:
        raise ValueError(f"population size {N} smaller than sample size {n}")
    if B < 1:
        raise ValueError("B must be >= 1")
    if n < 2:
        raise ValueError("ppb_bootstrap requires a sample of size >= 2")
    vals = unit_values(kind, sample)
    gen = rng.generator
    one_minus_f = (N - n) / N
    t_scale = one_minus_f * (n - 1) / (n * n)

    if n == N:
        # Census: every SRSWOR resample of size N from the replica is the
        # whole sample, so all replicates coincide bit for bit.
        c = float(vals.mean())
        tvar = np.zeros(B) if with_t_variances else None
        return BootstrapReplicates(B=B, estimates=np.full(B, c), t_variances=tvar, method=Method.PPB)

    k, r = divmod(N, n)
    kn = k * n
    base = np.tile(vals, k)
    est = np.empty(B)
    tvar = np.empty(B) if with_t_variances else None
    fixed_rem = None
    if fixed_completion and r > 0:
        fixed_rem = vals[_srswor_rows(gen, 1, r, n)]
    for lo, hi in _blocks(B):
        rows = hi - lo
        sel = _srswor_rows(gen, rows, n, N)
        if r > 0:
            rem = fixed_rem if fixed_rem is not None else vals[_srswor_rows(gen, rows, r, n)]
            inside = sel < kn
            chosen = np.where(
                inside,
                base[np.minimum(sel, kn - 1)],
                np.take_along_axis(np.broadcast_to(rem, (rows, r)), np.maximum(sel - kn, 0), axis=1),
            )
        else:
            chosen = base[sel]
        est[lo:hi] = chosen.mean(axis=1)
        if tvar is not None:
            tvar[lo:hi] = chosen.var(axis=1, ddof=1) * t_scale
    return BootstrapReplicates(B=B, estimates=est, t_variances=tvar, method=Method.PPB)


@dataclass(frozen=True)
class MirrorMatchPlan:
    """Subsample size and repeat-count schedule for the mirror-match bootstrap.

    Each bootstrap sample concatenates k subsamples of size n_prime drawn
    without replacement from the original sample; k is randomized between
    k_low and k_high so its mean equals k_target.
    """

    n_prime: int
    f_prime: float
    k_target: float
    k_low: int
    k_high: int
    p_high: float

    def __post_init__(self):
        if self.n_prime < 1:
            raise ValueError("n_prime must be >= 1")
        if not self.k_low <= self.k_high:
            raise ValueError("k_low must not exceed k_high")
        if not 0.0 <= self.p_high <= 1.0:
            raise ValueError(f"p_high out of range: {self.p_high}")


def mirror_match_plan(n: int, N: int) -> MirrorMatchPlan:
    """Choose mirror-match parameters for sample size n from population size N.

    The subsample size n' = round(f * n) mirrors the original sampling
    fraction; the repeat count targets k = n * (1 - f') / (n' * (1 - f)),
    which makes the bootstrap variance of a mean reproduce (1 - f) * s2 / n
    exactly when f' = f and approximately otherwise. k is randomized
    between floor and ceil of the target so that E[k] = k_target.
    """
    if n > N:
        raise ValueError(f"sample size {n} exceeds population size {N}")
    if n < 2:
        raise ValueError("mirror_match_plan requires n >= 2")
    f = n / N
    n_prime = int(min(n, max(1, math.floor(f * n + 0.5))))
    f_prime = n_prime / n
    if n_prime == n:
        k_target = 1.0
    else:
        k_target = n * (1.0 - f_prime) / (n_prime * (1.0 - f))
    k_low = max(1, math.floor(k_target))
    k_high = math.ceil(k_target)
    p_high = 0.0 if k_high == k_low else (k_target - k_low) / (k_high - k_low)
    return MirrorMatchPlan(
        n_prime=n_prime,
        f_prime=f_prime,
        k_target=k_target,
        k_low=k_low,
        k_high=k_high,
        p_high=p_high,
    )


def mirror_match_bootstrap(
    sample: Sample,
    N: int,
    B: int,
    kind: EstimatorKind,
    rng: RngStream,
    with_t_variances: bool = False,
) -> BootstrapReplicates:
    """Sitter-style direct bootstrap for SRSWOR.

    Each replicate draws k independent SRSWOR subsamples of size n' from
    the sample (k randomized per replicate between the plan's bounds),
    concatenates them, and evaluates the statistic on the concatenation.
    """
    n = sample.n
    plan = mirror_match_plan(n, N)
    if B < 1:
        raise ValueError("B must be >= 1")
    vals = unit_values(kind, sample)
    gen = rng.generator
    one_minus_f = (N - n) / N
    t_scale = one_minus_f * (n - 1) / (n * n)

    if plan.n_prime == n:
        # k = 1 and the subsample is the whole sample: all replicates coincide.
        c = float(vals.mean())
        tvar = np.full(B, sample_variance(vals) * t_scale) if with_t_variances else None
        return BootstrapReplicates(B=B, estimates=np.full(B, c), t_variances=tvar, method=Method.MIRROR_MATCH)

    n_p, k_hi = plan.n_prime, plan.k_high
    est = np.empty(B)
    tvar = np.empty(B) if with_t_variances else None
    for lo, hi in _blocks(B):
        rows = hi - lo
        if plan.k_high > plan.k_low:
            kb = plan.k_low + (gen.random(rows) < plan.p_high)
        else:
            kb = np.full(rows, plan.k_low)
        # Draw k_high subsamples for every replicate and mask the unused
        # one: stream consumption stays independent of the realized k.
        sub = _srswor_rows(gen, rows * k_hi, n_p, n).reshape(rows, k_hi, n_p)
        v = vals[sub]
        sums = v.sum(axis=2)
        use = np.arange(k_hi)[None, :] < kb[:, None]
        total = (sums * use).sum(axis=1)
        m = (kb * n_p).astype(np.float64)
        est[lo:hi] = total / m
        if tvar is not None:
            sqs = (v * v).sum(axis=2)
            qtot = (sqs * use).sum(axis=1)
            s2 = np.where(m > 1, (qtot - total * total / m) / np.maximum(m - 1.0, 1.0), 0.0)
            tvar[lo:hi] = np.maximum(s2, 0.0) * t_scale
    return BootstrapReplicates(B=B, estimates=est, t_variances=tvar, method=Method.MIRROR_MATCH)
