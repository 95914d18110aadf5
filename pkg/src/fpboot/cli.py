"""Command-line front door: population files, study configs, reports.

Subcommands: ``synth`` writes a synthetic population CSV, ``estimate``
prints point estimates plus one bootstrap CI, ``simulate`` runs a full
coverage study from a config file, ``sweep`` emits average CI lengths over
a grid of sample sizes. Exit codes: 0 success, 1 validation error, 2
I/O or parse error.
"""

import argparse
import json
import math
import os
import sys

from .errors import PopulationParseError
from .estimators import EstimatorKind, estimate
from .intervals import CiType, ci_bca, ci_bootstrap_t, ci_normal, ci_percentile, jackknife_acceleration
from .resampling import (
    Method,
    bootstrap_variance,
    mirror_match_bootstrap,
    ppb_bootstrap,
    standard_bootstrap,
)
from .sampling import Population, Sample, make_rng, srswor
from .study import (
    StudyConfig,
    StudyReport,
    SynthSpec,
    SYNTH_STREAM_ID,
    coverage_study,
    length_sweep,
    synth_population,
)

_POPULATION_HEADER = "ncs,top10"
_FLAG_TOKENS = {"0": False, "false": False, "1": True, "true": True}
_METHOD_TOKENS = {m.value: m for m in Method}
_CI_TOKENS = {c.value: c for c in CiType}
_ESTIMATOR_TOKENS = {e.value: e for e in EstimatorKind}
_ESTIMATOR_TOKENS["pp"] = EstimatorKind.PP_TOP10

_CONFIG_KEYS = {
    "population",
    "synth",
    "sample_sizes",
    "B",
    "repetitions",
    "methods",
    "ci_types",
    "estimators",
    "level",
    "master_seed",
    "ci_pairing",
    "ppb_completion",
}


def load_population(path) -> Population:
    """Read a population CSV (header ``ncs,top10``; rows: score, 0/1 flag)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
        if header != _POPULATION_HEADER:
            raise PopulationParseError(
                f"{path}:1: expected header {_POPULATION_HEADER!r}, got {header!r}"
            )
        ncs = []
        top10 = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise PopulationParseError(f"{path}:{lineno}: expected two comma-separated fields")
            try:
                score = float(parts[0])
            except ValueError:
                raise PopulationParseError(f"{path}:{lineno}: bad ncs value {parts[0]!r}") from None
            flag = _FLAG_TOKENS.get(parts[1].strip().lower())
            if flag is None:
                raise PopulationParseError(f"{path}:{lineno}: bad top10 flag {parts[1]!r}")
            if not math.isfinite(score) or score < 0:
                raise ValueError(f"{path}:{lineno}: ncs must be finite and >= 0, got {parts[0]}")
            ncs.append(score)
            top10.append(flag)
    if not ncs:
        raise ValueError(f"{path}: population file contains no records")
    return Population(ncs, top10)


def write_population(pop: Population, path):
    """Write a population CSV with full-precision scores."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_POPULATION_HEADER + "\n")
        for score, flag in zip(pop.ncs, pop.top10):
            fh.write(f"{float(score)!r},{1 if flag else 0}\n")


def _g12(x: float) -> str:
    return format(x, ".12g")


def emit_report(report: StudyReport, fmt: str, path):
    """Write a study report as CSV (one row per cell) or structured JSON."""
    if fmt == "csv":
        lines = ["n,method,ci_type,estimator,coverage,avg_length,avg_variance,R"]
        for c in report.cells:
            lines.append(
                ",".join(
                    [
                        str(c.n),
                        c.method.value,
                        c.ci_type.value,
                        c.estimator.value,
                        _g12(c.coverage),
                        _g12(c.avg_length),
                        _g12(c.avg_variance),
                        str(c.r_effective),
                    ]
                )
            )
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        raise ValueError(f"unknown report format: {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_sweep(rows, path):
    """Write a length-sweep table (n, method, ci_type, estimator, avg_length)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,method,ci_type,estimator,avg_length\n")
        for row in rows:
            fh.write(
                f"{row['n']},{row['method']},{row['ci_type']},{row['estimator']},{_g12(row['avg_length'])}\n"
            )


def load_report(path) -> dict:
    """Read back a JSON report."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _parse_tokens(values, table, what):
    out = []
    for v in values:
        token = v.strip().lower()
        if token not in table:
            raise ValueError(f"unknown {what}: {v!r} (choose from {sorted(table)})")
        item = table[token]
        if item not in out:
            out.append(item)
    return tuple(out)


def _parse_sizes(text) -> tuple[int, ...]:
    try:
        sizes = tuple(int(tok) for tok in str(text).replace(" ", "").split(",") if tok)
    except ValueError:
        raise ValueError(f"bad sample-size list: {text!r}") from None
    if not sizes:
        raise ValueError("sample-size list is empty")
    return sizes


def read_config_file(path) -> dict:
    """Parse and validate the raw key-value study config."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PopulationParseError(f"{path}: invalid config file: {exc}") from None
    if not isinstance(raw, dict):
        raise PopulationParseError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {sorted(unknown)}")
    if "population" in raw and "synth" in raw:
        raise ValueError(f"{path}: give either 'population' or 'synth', not both")
    return raw


def _config_from(raw: dict, args) -> StudyConfig:
    """Merge a raw config dict with command-line overrides."""
    population = getattr(args, "population", None) or raw.get("population")
    synth = raw.get("synth")
    if population is not None:
        source = str(population)
    elif synth is not None:
        if not isinstance(synth, dict):
            raise ValueError("'synth' must be an object")
        unknown = set(synth) - {"size", "mncs", "pp", "shape"}
        if unknown:
            raise ValueError(f"unknown synth keys: {sorted(unknown)}")
        source = SynthSpec(
            size=int(synth["size"]),
            target_mncs=float(synth["mncs"]),
            target_pp=float(synth["pp"]),
            shape=float(synth.get("shape", 1.0)),
        )
    else:
        raise ValueError("config must name a 'population' file or a 'synth' spec")

    sizes = getattr(args, "sizes", None) or raw.get("sample_sizes")
    if sizes is None:
        raise ValueError("no sample sizes given (config 'sample_sizes' or --sizes)")
    if isinstance(sizes, str):
        sizes = _parse_sizes(sizes)
    else:
        sizes = tuple(int(s) for s in sizes)

    methods = getattr(args, "method", None) or raw.get("methods") or [m.value for m in Method]
    cis = getattr(args, "ci", None) or raw.get("ci_types") or ["normal", "percentile"]
    ests = (
        getattr(args, "estimator", None)
        or raw.get("estimators")
        or [e.value for e in EstimatorKind]
    )
    b = getattr(args, "B", None)
    reps = getattr(args, "reps", None)
    level = getattr(args, "level", None)
    seed = getattr(args, "seed", None)
    return StudyConfig(
        population_source=source,
        sample_sizes=sizes,
        B=int(b if b is not None else raw.get("B", 1000)),
        repetitions=int(reps if reps is not None else raw.get("repetitions", 1000)),
        methods=_parse_tokens(methods, _METHOD_TOKENS, "method"),
        ci_types=_parse_tokens(cis, _CI_TOKENS, "ci type"),
        estimators=_parse_tokens(ests, _ESTIMATOR_TOKENS, "estimator"),
        level=float(level if level is not None else raw.get("level", 0.95)),
        master_seed=int(seed if seed is not None else raw.get("master_seed", 0)),
        ci_pairing=str(raw.get("ci_pairing", "paper")),
        ppb_completion=str(raw.get("ppb_completion", "per-replicate")),
    )


def _workers(args) -> int:
    threads = getattr(args, "threads", 0) or 0
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def _census_sample(pop: Population) -> Sample:
    import numpy as np

    idx = np.arange(pop.size)
    return Sample(idx, pop.ncs, pop.top10, pop.size)


def _cmd_synth(args) -> int:
    spec = SynthSpec(size=args.n, target_mncs=args.mncs, target_pp=args.pp, shape=args.shape)
    pop = synth_population(spec, make_rng(args.seed, SYNTH_STREAM_ID))
    write_population(pop, args.out)
    print(f"wrote {pop.size} records to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    pop = load_population(args.population)
    kind = _parse_tokens([args.estimator], _ESTIMATOR_TOKENS, "estimator")[0]
    rng = make_rng(args.seed, 0)
    if args.n is None:
        sample = _census_sample(pop)
    else:
        sample = srswor(pop, args.n, rng)
    method = _parse_tokens([args.method], _METHOD_TOKENS, "method")[0]
    ci_kind = _parse_tokens([args.ci], _CI_TOKENS, "ci type")[0]
    value = estimate(kind, sample)
    need_t = ci_kind is CiType.BOOTSTRAP_T
    if method is Method.STANDARD:
        reps = standard_bootstrap(sample, args.B, kind, rng, with_t_variances=need_t)
    elif method is Method.PPB:
        reps = ppb_bootstrap(sample, pop.size, args.B, kind, rng, with_t_variances=need_t)
    else:
        reps = mirror_match_bootstrap(sample, pop.size, args.B, kind, rng, with_t_variances=need_t)
    v_hat = bootstrap_variance(reps)
    if ci_kind is CiType.NORMAL:
        interval = ci_normal(value, v_hat, args.level)
    elif ci_kind is CiType.PERCENTILE:
        interval = ci_percentile(reps, args.level)
    elif ci_kind is CiType.BCA:
        accel = jackknife_acceleration(sample, kind)
        interval = ci_bca(reps, value, accel, args.level)
    else:
        if v_hat == 0.0:
            from .intervals import ConfidenceInterval

            interval = ConfidenceInterval(CiType.BOOTSTRAP_T, args.level, value, value)
        else:
            interval = ci_bootstrap_t(reps, value, v_hat, args.level)
    print(f"{kind.value} {_g12(value)}")
    print(f"variance {_g12(v_hat)}")
    print(f"ci {interval.method.value} {_g12(interval.lower)} {_g12(interval.upper)}")
    return 0


def _cmd_simulate(args) -> int:
    raw = read_config_file(args.config) if args.config else {}
    if not args.config and not getattr(args, "population", None):
        raise ValueError("simulate needs --config or --population")
    config = _config_from(raw, args)
    population = load_population(config.population_source) if isinstance(config.population_source, str) else None
    report = coverage_study(config, population=population, workers=_workers(args))
    emit_report(report, args.format, args.out)
    print(f"wrote {len(report.cells)} cells to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    raw = read_config_file(args.config) if args.config else {}
    config = _config_from(raw, args)
    population = load_population(config.population_source) if isinstance(config.population_source, str) else None
    rows = length_sweep(config, population=population, workers=_workers(args))
    emit_sweep(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpboot", description="Finite-population bootstrap toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic population CSV")
    p_synth.add_argument("--n", type=int, required=True, help="population size")
    p_synth.add_argument("--mncs", type=float, default=1.275, help="population mean citation score")
    p_synth.add_argument("--pp", type=float, default=13.7, help="population %% of top-10%% records")
    p_synth.add_argument("--shape", type=float, default=1.0, help="log-normal shape parameter")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_est = sub.add_parser("estimate", help="point estimate and one bootstrap CI")
    p_est.add_argument("--population", required=True)
    p_est.add_argument("--estimator", required=True, help="mncs | pp_top10")
    p_est.add_argument("--n", type=int, default=None, help="sample size (default: whole file)")
    p_est.add_argument("--method", default="standard", help="standard | ppb | mirror")
    p_est.add_argument("--ci", default="percentile", help="normal | percentile | bca | boot-t")
    p_est.add_argument("--B", type=int, default=1000)
    p_est.add_argument("--level", type=float, default=0.95)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.set_defaults(func=_cmd_estimate)

    def common_run_flags(p):
        p.add_argument("--config", default=None, help="JSON study config")
        p.add_argument("--population", default=None, help="population CSV (overrides config)")
        p.add_argument("--sizes", default=None, help="comma-separated sample sizes (overrides config)")
        p.add_argument("--B", type=int, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--method", action="append", default=None, help="repeatable: standard | ppb | mirror")
        p.add_argument("--ci", action="append", default=None, help="repeatable: normal | percentile | bca | boot-t")
        p.add_argument("--estimator", action="append", default=None, help="repeatable: mncs | pp_top10")
        p.add_argument("--level", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=0, help="worker processes (0 = all cores; never affects results)")
        p.add_argument("--out", required=True)

    p_sim = sub.add_parser("simulate", help="run a coverage study")
    common_run_flags(p_sim)
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="average CI length over a sample-size grid")
    common_run_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code else 0
    try:
        return int(args.func(args) or 0)
    except PopulationParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))
