"""Monte Carlo coverage studies over a fixed finite population.

The harness repeatedly draws SRSWOR samples from the population, runs a
bootstrap engine per sample, builds the requested confidence intervals,
and aggregates containment of the population truth plus interval lengths
per (n, method, CI type, estimator) cell.

Reproducibility model: replication r of the cell keyed by (n, method,
estimator) uses stream_id = stable_hash(cell) * 2**32 + r, so any subset
of cells, any worker count, and any scheduling order produce identical
reports. CI types share one bootstrap run per replication.
"""

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDistributionError
from .estimators import EstimatorKind, estimate
from .intervals import (
    CiType,
    ConfidenceInterval,
    ci_bca,
    ci_bootstrap_t,
    ci_normal,
    ci_percentile,
    jackknife_acceleration,
)
from .resampling import (
    Method,
    bootstrap_variance,
    mirror_match_bootstrap,
    ppb_bootstrap,
    standard_bootstrap,
)
from .sampling import Population, RngStream, make_rng, srswor

# Stream id reserved for synthetic population generation; cell streams are
# hash * 2**32 + r with r far below 2**32, so they cannot collide with it.
SYNTH_STREAM_ID = 2**64 - 1


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic population with pinned indicator values.

    Scores are log-normal with the given shape (sigma), rescaled so the
    population mean equals ``target_mncs``; the floor(target_pp / 100 * size)
    largest scores are flagged as top-10%.
    """

    size: int
    target_mncs: float
    target_pp: float
    shape: float = 1.0

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"population size must be >= 1, got {self.size}")
        if not np.isfinite(self.target_mncs) or self.target_mncs <= 0:
            raise ValueError(f"target_mncs must be > 0, got {self.target_mncs!r}")
        if not 0.0 < self.target_pp < 100.0:
            raise ValueError(f"target_pp must lie in (0, 100), got {self.target_pp!r}")
        if not np.isfinite(self.shape) or self.shape <= 0:
            raise ValueError(f"shape must be > 0, got {self.shape!r}")


def synth_population(spec: SynthSpec, rng: RngStream) -> Population:
    """Generate the population described by ``spec``."""
    z = rng.generator.standard_normal(spec.size)
    raw = np.exp(spec.shape * z)
    ncs = raw * (spec.target_mncs / raw.mean())
    count = int(math.floor(spec.target_pp * spec.size / 100.0 + 1e-9))
    top10 = np.zeros(spec.size, dtype=bool)
    if count > 0:
        order = np.argsort(-ncs, kind="stable")
        top10[order[:count]] = True
    return Population(ncs, top10)


@dataclass(frozen=True)
class StudyConfig:
    """Full description of a coverage study.

    ``population_source`` is either a file path (the caller loads and
    passes the population) or a :class:`SynthSpec` generated from
    ``master_seed``. ``ci_pairing`` "paper" skips bootstrap-t for the
    standard bootstrap and BCa for the finite-population engines; "all"
    builds every requested interval for every method.
    """

    population_source: object
    sample_sizes: tuple[int, ...]
    B: int = 1000
    repetitions: int = 1000
    methods: tuple[Method, ...] = (Method.STANDARD, Method.PPB, Method.MIRROR_MATCH)
    ci_types: tuple[CiType, ...] = (CiType.NORMAL, CiType.PERCENTILE)
    estimators: tuple[EstimatorKind, ...] = (EstimatorKind.MNCS, EstimatorKind.PP_TOP10)
    level: float = 0.95
    master_seed: int = 0
    ci_pairing: str = "paper"
    ppb_completion: str = "per-replicate"

    def __post_init__(self):
        if self.B < 2:
            raise ValueError("B must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.ci_pairing not in ("paper", "all"):
            raise ValueError(f"unknown ci_pairing: {self.ci_pairing!r}")
        if self.ppb_completion not in ("per-replicate", "fixed"):
            raise ValueError(f"unknown ppb_completion: {self.ppb_completion!r}")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 1")


@dataclass(frozen=True)
class CellReport:
    """Aggregated results for one (n, method, CI type, estimator) cell."""

    n: int
    method: Method
    ci_type: CiType
    estimator: EstimatorKind
    coverage: float
    avg_length: float
    avg_variance: float
    r_effective: int


@dataclass(frozen=True)
class StudyReport:
    """Coverage-study output: config echo, population identity, truths, cells."""

    config: StudyConfig
    population_info: dict
    true_values: dict
    cells: tuple[CellReport, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "config": config_dict(self.config),
            "population": dict(self.population_info),
            "true_values": dict(self.true_values),
            "cells": [
                {
                    "n": c.n,
                    "method": c.method.value,
                    "ci_type": c.ci_type.value,
                    "estimator": c.estimator.value,
                    "coverage": c.coverage,
                    "avg_length": c.avg_length,
                    "avg_variance": c.avg_variance,
                    "R": c.r_effective,
                }
                for c in self.cells
            ],
        }


def config_dict(config: StudyConfig) -> dict:
    """Plain-dict echo of a config, with enums rendered as their tokens."""
    source = config.population_source
    if isinstance(source, SynthSpec):
        src = {
            "synth": {
                "size": source.size,
                "mncs": source.target_mncs,
                "pp": source.target_pp,
                "shape": source.shape,
            }
        }
    else:
        src = {"population": str(source)}
    out = dict(src)
    out.update(
        {
            "sample_sizes": list(config.sample_sizes),
            "B": config.B,
            "repetitions": config.repetitions,
            "methods": [m.value for m in config.methods],
            "ci_types": [c.value for c in config.ci_types],
            "estimators": [e.value for e in config.estimators],
            "level": config.level,
            "master_seed": config.master_seed,
            "ci_pairing": config.ci_pairing,
            "ppb_completion": config.ppb_completion,
        }
    )
    return out


def effective_ci_types(method: Method, requested, pairing: str = "paper") -> tuple[CiType, ...]:
    """CI types actually built for a method under the given pairing rule."""
    requested = tuple(requested)
    if pairing == "all":
        return requested
    if method is Method.STANDARD:
        return tuple(c for c in requested if c is not CiType.BOOTSTRAP_T)
    return tuple(c for c in requested if c is not CiType.BCA)


def cell_stream_base(n: int, method: Method, estimator: EstimatorKind) -> int:
    """Stable 64-bit stream base for the cell keyed by (n, method, estimator)."""
    key = f"{n}|{method.value}|{estimator.value}".encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=4).digest(), "big")
    return h << 32


# Worker-side population; set once per process by _init_worker.
_POP: Population | None = None


def _init_worker(ncs: np.ndarray, top10: np.ndarray):
    global _POP
    _POP = Population(ncs, top10)


def _build_interval(
    ci: CiType,
    *,
    reps,
    theta_hat: float,
    v_hat: float,
    accel: float,
    level: float,
) -> ConfidenceInterval | None:
    """One interval for one replication; None when it cannot be formed."""
    if ci is CiType.NORMAL:
        return ci_normal(theta_hat, v_hat, level)
    if ci is CiType.PERCENTILE:
        return ci_percentile(reps, level)
    if ci is CiType.BCA:
        try:
            return ci_bca(reps, theta_hat, accel, level)
        except DegenerateDistributionError:
            # one-sided bootstrap distribution: fall back to the percentile rule
            p = ci_percentile(reps, level)
            return ConfidenceInterval(CiType.BCA, level, p.lower, p.upper)
    if ci is CiType.BOOTSTRAP_T:
        if v_hat == 0.0:
            # census limit: the studentized interval degenerates to a point
            return ConfidenceInterval(CiType.BOOTSTRAP_T, level, theta_hat, theta_hat)
        try:
            return ci_bootstrap_t(reps, theta_hat, v_hat, level)
        except DegenerateDistributionError:
            return None
    raise ValueError(f"unknown CI type: {ci!r}")


def _run_replications(task: dict):
    """Run replications [lo, hi) of one cell group; returns per-rep arrays."""
    pop = _POP
    n = task["n"]
    method = task["method"]
    kind = task["estimator"]
    cis = task["ci_types"]
    B = task["B"]
    level = task["level"]
    master_seed = task["master_seed"]
    base = task["stream_base"]
    lo, hi = task["lo"], task["hi"]
    ppb_fixed = task["ppb_fixed"]
    theta_true = task["true_value"]

    count = hi - lo
    n_ci = len(cis)
    v_hats = np.empty(count)
    ok = np.zeros((n_ci, count), dtype=bool)
    contained = np.zeros((n_ci, count), dtype=bool)
    lengths = np.zeros((n_ci, count))
    need_t = CiType.BOOTSTRAP_T in cis
    need_a = CiType.BCA in cis

    for t, r in enumerate(range(lo, hi)):
        rng = make_rng(master_seed, base + r)
        sample = srswor(pop, n, rng)
        theta_hat = estimate(kind, sample)
        if method is Method.STANDARD:
            reps = standard_bootstrap(sample, B, kind, rng, with_t_variances=need_t)
        elif method is Method.PPB:
            reps = ppb_bootstrap(
                sample, pop.size, B, kind, rng, with_t_variances=need_t, fixed_completion=ppb_fixed
            )
        elif method is Method.MIRROR_MATCH:
            reps = mirror_match_bootstrap(sample, pop.size, B, kind, rng, with_t_variances=need_t)
        else:
            raise ValueError(f"unknown method: {method!r}")
        v_hat = bootstrap_variance(reps)
        v_hats[t] = v_hat
        accel = jackknife_acceleration(sample, kind) if need_a else 0.0
        for i, ci in enumerate(cis):
            interval = _build_interval(
                ci, reps=reps, theta_hat=theta_hat, v_hat=v_hat, accel=accel, level=level
            )
            if interval is None:
                continue
            ok[i, t] = True
            contained[i, t] = interval.contains(theta_true)
            lengths[i, t] = interval.length
    return task["group"], lo, v_hats, ok, contained, lengths


def _execute(tasks, pop: Population, workers: int):
    if workers <= 1:
        _init_worker(pop.ncs, pop.top10)
        return [_run_replications(t) for t in tasks]
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(pop.ncs, pop.top10)
    ) as pool:
        futures = [pool.submit(_run_replications, t) for t in tasks]
        return [f.result() for f in futures]


def _group_tasks(group_id, *, n, method, estimator, cis, B, R, level, master_seed, ppb_fixed, true_value, chunk):
    base = cell_stream_base(n, method, estimator)
    tasks = []
    for lo in range(1, R + 1, chunk):
        hi = min(lo + chunk, R + 1)
        tasks.append(
            {
                "group": group_id,
                "n": n,
                "method": method,
                "estimator": estimator,
                "ci_types": cis,
                "B": B,
                "level": level,
                "master_seed": master_seed,
                "stream_base": base,
                "lo": lo,
                "hi": hi,
                "ppb_fixed": ppb_fixed,
                "true_value": true_value,
            }
        )
    return tasks


def _aggregate(group, results, *, n, method, estimator, cis, R) -> list[CellReport]:
    """Reassemble per-rep arrays in replication order and reduce to cells."""
    n_ci = len(cis)
    v_hats = np.empty(R)
    ok = np.zeros((n_ci, R), dtype=bool)
    contained = np.zeros((n_ci, R), dtype=bool)
    lengths = np.zeros((n_ci, R))
    for g, lo, v, o, c, ln in results:
        if g != group:
            continue
        s = slice(lo - 1, lo - 1 + v.size)
        v_hats[s] = v
        ok[:, s] = o
        contained[:, s] = c
        lengths[:, s] = ln
    avg_variance = float(v_hats.mean())
    cells = []
    for i, ci in enumerate(cis):
        r_eff = int(np.count_nonzero(ok[i]))
        hits = int(np.count_nonzero(contained[i] & ok[i]))
        coverage = hits / r_eff if r_eff else 0.0
        avg_length = float(lengths[i][ok[i]].mean()) if r_eff else 0.0
        cells.append(
            CellReport(
                n=n,
                method=method,
                ci_type=ci,
                estimator=estimator,
                coverage=coverage,
                avg_length=avg_length,
                avg_variance=avg_variance,
                r_effective=r_eff,
            )
        )
    return cells


def run_cell(
    pop: Population,
    *,
    n: int,
    B: int,
    R: int,
    method: Method,
    ci_types,
    estimator: EstimatorKind,
    level: float = 0.95,
    master_seed: int = 0,
    workers: int = 1,
    ci_pairing: str = "paper",
    ppb_fixed_completion: bool = False,
    true_value: float | None = None,
) -> list[CellReport]:
    """Coverage/length accounting for one (n, method, estimator) cell group.

    Draws R independent SRSWOR samples (replication r on its own stream),
    bootstraps each, builds every requested CI type from the shared
    replicates, and aggregates containment of the population truth.
    """
    if not 1 <= n <= pop.size:
        raise ValueError(f"sample size must satisfy 1 <= n <= {pop.size}, got {n}")
    if B < 2:
        raise ValueError("B must be >= 2")
    if R < 1:
        raise ValueError("R must be >= 1")
    cis = effective_ci_types(method, ci_types, ci_pairing)
    if not cis:
        return []
    theta = estimate(estimator, pop) if true_value is None else float(true_value)
    chunk = R if workers <= 1 else max(1, math.ceil(R / (workers * 4)))
    tasks = _group_tasks(
        0,
        n=n,
        method=method,
        estimator=estimator,
        cis=cis,
        B=B,
        R=R,
        level=level,
        master_seed=master_seed,
        ppb_fixed=ppb_fixed_completion,
        true_value=theta,
        chunk=chunk,
    )
    results = _execute(tasks, pop, workers)
    return _aggregate(0, results, n=n, method=method, estimator=estimator, cis=cis, R=R)


def resolve_population(config: StudyConfig, population: Population | None = None) -> Population:
    """Population for a study: as passed, or synthesized from the config."""
    if population is not None:
        return population
    source = config.population_source
    if isinstance(source, SynthSpec):
        return synth_population(source, make_rng(config.master_seed, SYNTH_STREAM_ID))
    if isinstance(source, Population):
        return source
    raise ValueError("a file-backed study needs the loaded population passed in")


def _population_info(config: StudyConfig, pop: Population) -> dict:
    digest = hashlib.sha256()
    digest.update(pop.ncs.tobytes())
    digest.update(pop.top10.tobytes())
    source = config.population_source
    if isinstance(source, SynthSpec):
        kind, path = "synthetic", None
    elif isinstance(source, Population):
        kind, path = "in-memory", None
    else:
        kind, path = "file", str(source)
    return {"source": kind, "path": path, "size": pop.size, "sha256": digest.hexdigest()}


def coverage_study(
    config: StudyConfig,
    population: Population | None = None,
    workers: int = 1,
) -> StudyReport:
    """Run the full Cartesian study described by ``config``.

    The report is a pure function of (population bytes, config): cells and
    replications are distributed over ``workers`` processes but aggregated
    in a fixed order.
    """
    pop = resolve_population(config, population)
    for n in config.sample_sizes:
        if n > pop.size:
            raise ValueError(f"sample size {n} exceeds population size {pop.size}")
    true_values = {k.value: estimate(k, pop) for k in config.estimators}
    ppb_fixed = config.ppb_completion == "fixed"

    groups = []
    gid = 0
    for n in config.sample_sizes:
        for method in config.methods:
            for estimator in config.estimators:
                cis = effective_ci_types(method, config.ci_types, config.ci_pairing)
                if not cis:
                    continue
                groups.append((gid, n, method, estimator, cis))
                gid += 1

    R = config.repetitions
    chunk = R if workers <= 1 else max(1, math.ceil(R / (workers * 2)))
    tasks = []
    for gid, n, method, estimator, cis in groups:
        tasks.extend(
            _group_tasks(
                gid,
                n=n,
                method=method,
                estimator=estimator,
                cis=cis,
                B=config.B,
                R=R,
                level=config.level,
                master_seed=config.master_seed,
                ppb_fixed=ppb_fixed,
                true_value=true_values[estimator.value],
                chunk=chunk,
            )
        )
    results = _execute(tasks, pop, workers)

    cells: list[CellReport] = []
    for gid, n, method, estimator, cis in groups:
        cells.extend(_aggregate(gid, results, n=n, method=method, estimator=estimator, cis=cis, R=R))
    return StudyReport(
        config=config,
        population_info=_population_info(config, pop),
        true_values=true_values,
        cells=tuple(cells),
    )


def length_sweep(
    config: StudyConfig,
    population: Population | None = None,
    workers: int = 1,
) -> list[dict]:
    """Average CI length per (n, method, ci_type, estimator), plot-ready."""
    report = coverage_study(config, population=population, workers=workers)
    return [
        {
            "n": c.n,
            "method": c.method.value,
            "ci_type": c.ci_type.value,
            "estimator": c.estimator.value,
            "avg_length": c.avg_length,
        }
        for c in report.cells
    ]
