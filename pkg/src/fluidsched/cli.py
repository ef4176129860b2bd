"""Experiment runner CLI and result/workload serialization.

Subcommands
-----------
simulate     run each requested scheduler once and print/write summaries
sweep-sigma  repeated runs per estimation-error level at fixed load and d/n
sweep-load   repeated runs per load level at fixed sigma and d/n
sweep-dn     repeated runs per d/n level at fixed sigma and load
gen-trace    generate a synthetic workload file

Workloads come from ``--trace PATH`` (a SWIM-style tab-separated file, or a
sized workload file produced by gen-trace) or ``--synthetic SPEC`` where
SPEC looks like ``pareto:n=5000,rate=1,shape=1.5,scale=1`` or
``uniform:n=10,rate=2,lo=5,hi=5`` (optional ``seed=`` key, default 0).

SWIM trace workloads are calibrated so total size over the submission span
matches ``--load`` at the requested ``--dn`` ratio.  Already-sized
workloads (synthetic or gen-trace output) are rescaled to each sweep's
load value the same way; the simulate command instead runs them exactly as
given and reports their empirical load.  ``--dn`` never affects sized
workloads since their sizes carry no disk/network decomposition.

Sweep output is a CSV with header
``scheduler,sigma,load,dn,run_id,mean_sojourn,mean_slowdown,job_count``,
floats rendered with 9 significant digits, rows sorted by (scheduler, grid
value, run id).  Output is byte-identical for identical configurations,
including under ``--jobs`` parallelism.  Exit codes: 0 success, 2 bad
configuration, 3 input error, 4 simulation failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import engine, errmodel, metrics, schedulers, trace

CSV_HEADER = "scheduler,sigma,load,dn,run_id,mean_sojourn,mean_slowdown,job_count"
WORKLOAD_HEADER = "label\tsubmit_time\ttrue_size"
JOB_DUMP_HEADER = "label,submit_time,true_size,est_size,completed_at,sojourn"

DEFAULT_SIGMA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_LOAD_GRID = tuple(round(0.1 * i, 10) for i in range(1, 21))
DEFAULT_DN_GRID = (1.0, 2.0, 4.0, 8.0, 16.0)

_COLUMN_KEYS = {
    "label": "label",
    "submit": "submit_time",
    "input": "input_bytes",
    "shuffle": "shuffle_bytes",
    "output": "output_bytes",
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class WorkloadSource:
    """Workload input held in raw form so each grid point can re-price it.

    kind "swim" carries JobSpecs (calibrated per load/dn); kind "sized"
    carries SizedJobs (rescaled to the target load, dn inert).
    """

    kind: str
    specs: tuple = ()
    sized: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    source: WorkloadSource
    schedulers: tuple[str, ...]
    sigma_grid: tuple[float, ...]
    load_grid: tuple[float, ...]
    dn_grid: tuple[float, ...]
    runs_per_point: int = 100
    base_seed: int = 42
    parallelism: int = 1

    def validate(self) -> None:
        if not self.schedulers:
            raise ConfigError("no schedulers selected")
        for name in self.schedulers:
            if name not in schedulers.SCHEDULER_NAMES:
                raise ConfigError(f"unknown scheduler {name!r}")
        for grid, what in (
            (self.sigma_grid, "sigma"),
            (self.load_grid, "load"),
            (self.dn_grid, "dn"),
        ):
            if not grid:
                raise ConfigError(f"empty {what} grid")
            for v in grid:
                if not math.isfinite(v):
                    raise ConfigError(f"non-finite {what} value {v}")
        if any(s < 0 for s in self.sigma_grid):
            raise ConfigError("sigma must be >= 0")
        if any(v <= 0 for v in self.load_grid):
            raise ConfigError("load must be > 0")
        if any(v <= 0 for v in self.dn_grid):
            raise ConfigError("dn must be > 0")
        if self.runs_per_point < 1:
            raise ConfigError("runs_per_point must be >= 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")


def materialize(
    source: WorkloadSource, load: float, dn: float, rescale_sized: bool = True
) -> list[trace.SizedJob]:
    """Produce the sized workload for one (load, dn) grid point.

    SWIM sources are always calibrated at (load, dn).  Already-sized sources
    are rescaled so their total size over the submission span matches the
    load, unless ``rescale_sized`` is false (the simulate command runs sized
    workloads exactly as given).  Jobs come back sorted by submission time
    with input order preserved on ties.
    """
    if source.kind == "swim":
        cal = trace.calibrate(list(source.specs), trace.CalibrationConfig(load, dn))
        jobs = trace.size_jobs(list(source.specs), cal)
    else:
        jobs = list(source.sized)
        if rescale_sized:
            jobs = trace.rescale_to_load(jobs, load)
    return sorted(jobs, key=lambda j: j.submit_time)


def empirical_load(jobs: list[trace.SizedJob]) -> float:
    """Total size over the submission span; 0.0 when the span is empty."""
    t0 = min(j.submit_time for j in jobs)
    te = max(j.submit_time for j in jobs)
    if te <= t0:
        return 0.0
    return sum(j.true_size for j in jobs) / (te - t0)


# ---------------------------------------------------------------------------
# serialization

def format_float(x: float) -> str:
    return f"{x:.9g}"


def write_swim(specs: Iterable[trace.JobSpec], stream) -> None:
    """Write JobSpecs in the default SWIM column layout; floats use repr so
    that parse_swim round-trips them exactly."""
    for s in specs:
        stream.write(
            f"{s.label}\t{s.submit_time!r}\t{s.input_bytes!r}"
            f"\t{s.shuffle_bytes!r}\t{s.output_bytes!r}\n"
        )


def write_workload(jobs: Iterable[trace.SizedJob], stream) -> None:
    stream.write(WORKLOAD_HEADER + "\n")
    for j in jobs:
        stream.write(f"{j.label}\t{j.submit_time!r}\t{j.true_size!r}\n")


def read_workload(lines: Iterable[str]) -> list[trace.SizedJob]:
    """Read the sized workload interchange format (gen-trace output)."""
    jobs = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped == WORKLOAD_HEADER:
            continue
        parts = stripped.split("\t")
        if len(parts) != 3:
            raise trace.MalformedRow(line_no, f"expected 3 fields, got {len(parts)}")
        try:
            submit, size = float(parts[1]), float(parts[2])
        except ValueError:
            raise trace.MalformedRow(line_no, "non-numeric field") from None
        if submit < 0:
            raise trace.NegativeValue(line_no, "submit_time")
        if size <= 0:
            raise trace.ZeroSizeJob(parts[0])
        jobs.append(trace.SizedJob(submit, size, parts[0]))
    return jobs


def _summary_row(s: metrics.RunSummary) -> str:
    return ",".join(
        (
            s.scheduler_name,
            format_float(s.sigma),
            format_float(s.load),
            format_float(s.dn_ratio),
            str(s.run_id),
            format_float(s.mean_sojourn),
            format_float(s.mean_slowdown),
            str(s.job_count),
        )
    )


def render_csv(summaries: Sequence[metrics.RunSummary]) -> str:
    ordered = sorted(
        summaries,
        key=lambda s: (s.scheduler_name, s.sigma, s.load, s.dn_ratio, s.run_id),
    )
    return "\n".join([CSV_HEADER, *map(_summary_row, ordered)]) + "\n"


def _write_atomically(text: str, path: str) -> None:
    # leave no partial output behind on failure
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# sweep execution

def _runs_for(scheduler: str, sigma: float, runs_per_point: int) -> int:
    # error-free runs and size-blind schedulers are identical across runs
    if sigma == 0 or scheduler in schedulers.SIZE_BLIND:
        return 1
    return runs_per_point


_WORKER_SOURCE: WorkloadSource | None = None
_WORKER_MEMO: tuple | None = None


def _worker_init(source: WorkloadSource) -> None:
    global _WORKER_SOURCE, _WORKER_MEMO
    _WORKER_SOURCE = source
    _WORKER_MEMO = None


def _sized_for(source: WorkloadSource, load: float, dn: float) -> list[trace.SizedJob]:
    # consecutive tasks share a grid point, so a one-slot memo suffices
    global _WORKER_MEMO
    key = (load, dn)
    if _WORKER_MEMO is None or _WORKER_MEMO[0] != key:
        _WORKER_MEMO = (key, materialize(source, load, dn))
    return _WORKER_MEMO[1]


def _run_sized(
    sized: list[trace.SizedJob],
    scheduler: str,
    sigma: float,
    load: float,
    dn: float,
    run_id: int,
    base_seed: int,
) -> tuple[metrics.RunSummary, engine.RunResult]:
    model = errmodel.ErrorModel(sigma=sigma, seed=base_seed + run_id)
    estimated = errmodel.estimate(sized, model)
    result = engine.run(estimated, schedulers.make_scheduler(scheduler))
    summary = metrics.summarize(result, scheduler, sigma, load, dn, run_id)
    return summary, result


def simulate_one(
    source: WorkloadSource,
    scheduler: str,
    sigma: float,
    load: float,
    dn: float,
    run_id: int,
    base_seed: int,
) -> tuple[metrics.RunSummary, engine.RunResult]:
    """One deterministic run: size, estimate with seed base_seed + run_id,
    simulate, summarize.  Sized workloads run as given; their summary
    reports the empirical load."""
    sized = materialize(source, load, dn, rescale_sized=False)
    if source.kind == "sized":
        load = empirical_load(sized)
    return _run_sized(sized, scheduler, sigma, load, dn, run_id, base_seed)


def _worker_task(task: tuple) -> metrics.RunSummary:
    scheduler, sigma, load, dn, run_id, base_seed = task
    sized = _sized_for(_WORKER_SOURCE, load, dn)
    return _run_sized(sized, scheduler, sigma, load, dn, run_id, base_seed)[0]


def _execute(config: ExperimentConfig, tasks: list[tuple]) -> list[metrics.RunSummary]:
    if config.parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
            max_workers=config.parallelism,
            initializer=_worker_init,
            initargs=(config.source,),
        ) as pool:
            chunk = max(1, len(tasks) // (4 * config.parallelism))
            summaries = list(pool.map(_worker_task, tasks, chunksize=chunk))
    else:
        _worker_init(config.source)
        summaries = [_worker_task(t) for t in tasks]
    return summaries


def _sweep(
    config: ExperimentConfig,
    sigmas: Sequence[float],
    loads: Sequence[float],
    dns: Sequence[float],
) -> list[metrics.RunSummary]:
    tasks = []
    for scheduler in config.schedulers:
        for sigma in sigmas:
            for load in loads:
                for dn in dns:
                    for run_id in range(_runs_for(scheduler, sigma, config.runs_per_point)):
                        tasks.append((scheduler, sigma, load, dn, run_id, config.base_seed))
    return _execute(config, tasks)


def _single(grid: tuple[float, ...], what: str) -> tuple[float, ...]:
    if len(grid) != 1:
        raise ConfigError(f"{what} must be a single value for this sweep")
    return grid


def sweep_sigma(config: ExperimentConfig) -> list[metrics.RunSummary]:
    """One run set per (scheduler, sigma) at fixed load and d/n."""
    config.validate()
    return _sweep(
        config,
        config.sigma_grid,
        _single(config.load_grid, "load"),
        _single(config.dn_grid, "dn"),
    )


def sweep_load(config: ExperimentConfig) -> list[metrics.RunSummary]:
    """One run set per (scheduler, load) at fixed sigma and d/n."""
    config.validate()
    return _sweep(
        config,
        _single(config.sigma_grid, "sigma"),
        config.load_grid,
        _single(config.dn_grid, "dn"),
    )


def sweep_dn(config: ExperimentConfig) -> list[metrics.RunSummary]:
    """One run set per (scheduler, d/n) at fixed sigma and load."""
    config.validate()
    return _sweep(
        config,
        _single(config.sigma_grid, "sigma"),
        _single(config.load_grid, "load"),
        config.dn_grid,
    )


# ---------------------------------------------------------------------------
# argument handling

def _parse_columns(text: str) -> dict[str, int]:
    columns: dict[str, int] = {}
    for item in text.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in _COLUMN_KEYS:
            raise ConfigError(f"unknown column key {key!r}")
        try:
            columns[_COLUMN_KEYS[key]] = int(value)
        except ValueError:
            raise ConfigError(f"bad column index {value!r}") from None
    for field in ("submit_time", "input_bytes", "shuffle_bytes", "output_bytes"):
        if field not in columns:
            raise ConfigError(f"--columns is missing {field}")
    return columns


def _parse_synthetic(spec: str) -> list[trace.SizedJob]:
    dist_name, _, rest = spec.partition(":")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            params[key.strip()] = value.strip()
    try:
        n = int(params.pop("n"))
        rate = float(params.pop("rate"))
        seed = int(params.pop("seed", "0"))
        if dist_name == "pareto":
            dist: trace.SizeDistribution = trace.HeavyTail(
                shape=float(params.pop("shape")), scale=float(params.pop("scale"))
            )
        elif dist_name == "uniform":
            dist = trace.Uniform(lo=float(params.pop("lo")), hi=float(params.pop("hi")))
        else:
            raise ConfigError(f"unknown synthetic distribution {dist_name!r}")
    except KeyError as missing:
        raise ConfigError(f"synthetic spec is missing {missing}") from None
    except ValueError as bad:
        raise ConfigError(f"bad synthetic spec value: {bad}") from None
    if params:
        raise ConfigError(f"unknown synthetic spec keys: {', '.join(sorted(params))}")
    return trace.gen_synthetic(n, rate, dist, seed)


def _load_source(args) -> WorkloadSource:
    if getattr(args, "synthetic", None):
        return WorkloadSource(kind="sized", sized=tuple(_parse_synthetic(args.synthetic)))
    path = args.trace
    columns = _parse_columns(args.columns) if args.columns else None
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as e:
        raise trace.TraceError(f"cannot read trace {path!r}: {e}") from None
    first = next((ln.strip() for ln in lines if ln.strip()), "")
    if first == WORKLOAD_HEADER:
        return WorkloadSource(kind="sized", sized=tuple(read_workload(lines)))
    return WorkloadSource(
        kind="swim", specs=tuple(trace.parse_swim(lines, columns, args.time_unit))
    )


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad float list {text!r}") from None


def _scheduler_list(text: str) -> tuple[str, ...]:
    names = []
    for name in text.split(","):
        name = name.strip()
        if name not in schedulers.SCHEDULER_NAMES:
            raise ConfigError(f"unknown scheduler {name!r}")
        if name not in names:
            names.append(name)
    return tuple(names)


def _config_from_args(args, sigmas, loads, dns) -> ExperimentConfig:
    config = ExperimentConfig(
        source=_load_source(args),
        schedulers=_scheduler_list(args.schedulers),
        sigma_grid=sigmas,
        load_grid=loads,
        dn_grid=dns,
        runs_per_point=args.runs,
        base_seed=args.seed,
        parallelism=args.jobs,
    )
    config.validate()
    return config


def _cmd_simulate(args) -> None:
    source = _load_source(args)
    names = _scheduler_list(args.schedulers)
    if args.dump_jobs and len(names) != 1:
        raise ConfigError("--dump-jobs needs exactly one scheduler")
    summaries = []
    for name in names:
        summary, result = simulate_one(
            source, name, args.sigma, args.load, args.dn, 0, args.seed
        )
        summaries.append(summary)
        if args.dump_jobs:
            rows = [JOB_DUMP_HEADER]
            rows += [
                f"{j.label},{format_float(j.submit_time)},{format_float(j.true_size)},"
                f"{format_float(j.est_size)},{format_float(j.completed_at)},"
                f"{format_float(j.sojourn)}"
                for j in result.jobs
            ]
            _write_atomically("\n".join(rows) + "\n", args.dump_jobs)
    text = render_csv(summaries)
    if args.out:
        _write_atomically(text, args.out)
    else:
        sys.stdout.write(text)


def _run_sweep(args, sweep) -> None:
    if args.command == "sweep-sigma":
        sigmas = _csv_floats(args.sigmas) if args.sigmas else DEFAULT_SIGMA_GRID
        loads, dns = (args.load,), (args.dn,)
    elif args.command == "sweep-load":
        loads = _csv_floats(args.loads) if args.loads else DEFAULT_LOAD_GRID
        sigmas, dns = (args.sigma,), (args.dn,)
    else:
        dns = _csv_floats(args.dns) if args.dns else DEFAULT_DN_GRID
        sigmas, loads = (args.sigma,), (args.load,)
    config = _config_from_args(args, sigmas, loads, dns)
    summaries = sweep(config)
    _write_atomically(render_csv(summaries), args.out)


def _cmd_gen_trace(args) -> None:
    jobs = _parse_synthetic(args.synthetic)
    directory = os.path.dirname(os.path.abspath(args.out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".tsv")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            if args.format == "sized":
                write_workload(jobs, handle)
            else:
                specs = [
                    trace.JobSpec(j.submit_time, j.true_size, 0.0, 0.0, j.label)
                    for j in jobs
                ]
                write_swim(specs, handle)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluidsched",
        description="Fluid-rate scheduling simulator for size-based policies "
        "under imperfect size estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    workload = argparse.ArgumentParser(add_help=False)
    group = workload.add_mutually_exclusive_group(required=True)
    group.add_argument("--trace", help="SWIM-style .tsv trace or sized workload file")
    group.add_argument(
        "--synthetic",
        help="inline workload, e.g. pareto:n=5000,rate=1,shape=1.5,scale=1 "
        "or uniform:n=10,rate=2,lo=5,hi=5 (optional seed=N)",
    )
    workload.add_argument(
        "--columns",
        help="SWIM column indices, default label=0,submit=1,input=2,shuffle=3,output=4",
    )
    workload.add_argument(
        "--time-unit",
        choices=("seconds", "milliseconds"),
        default="seconds",
        help="unit of trace submit times",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--schedulers",
        default=",".join(schedulers.SCHEDULER_NAMES),
        help="comma-separated canonical scheduler names (default: all)",
    )
    common.add_argument("--seed", type=int, default=42, help="base seed for error draws")

    sweep_common = argparse.ArgumentParser(add_help=False)
    sweep_common.add_argument("--runs", type=int, default=100, help="runs per grid point")
    sweep_common.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep_common.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser(
        "simulate", parents=[workload, common], help="single run per scheduler"
    )
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--load", type=float, default=0.9)
    p.add_argument("--dn", type=float, default=4.0)
    p.add_argument("--dump-jobs", help="write per-job completion records to this CSV")
    p.add_argument("--out", help="write summaries to this CSV instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "sweep-sigma",
        parents=[workload, common, sweep_common],
        help="sojourn versus estimation error",
    )
    p.add_argument("--sigmas", help="comma-separated sigma grid (default 0,0.25,...,1)")
    p.add_argument("--load", type=float, default=0.9)
    p.add_argument("--dn", type=float, default=4.0)
    p.set_defaults(func=lambda a: _run_sweep(a, sweep_sigma))

    p = sub.add_parser(
        "sweep-load",
        parents=[workload, common, sweep_common],
        help="sojourn versus load",
    )
    p.add_argument("--loads", help="comma-separated load grid (default 0.1..2.0)")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--dn", type=float, default=4.0)
    p.set_defaults(func=lambda a: _run_sweep(a, sweep_load))

    p = sub.add_parser(
        "sweep-dn",
        parents=[workload, common, sweep_common],
        help="sojourn versus disk/network cost ratio",
    )
    p.add_argument("--dns", help="comma-separated d/n grid (default 1,2,4,8,16)")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--load", type=float, default=0.9)
    p.set_defaults(func=lambda a: _run_sweep(a, sweep_dn))

    p = sub.add_parser("gen-trace", help="write a synthetic workload file")
    p.add_argument("--synthetic", required=True, help="spec, see simulate --help")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--format",
        choices=("sized", "swim"),
        default="sized",
        help="sized interchange file or SWIM-style rows (sizes as input bytes)",
    )
    p.set_defaults(func=_cmd_gen_trace)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, trace.InvalidConfig, trace.InvalidParams) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (trace.TraceError, errmodel.NonPositiveSize) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (engine.PolicyViolation, engine.NonTermination, metrics.IncompleteRun) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except OSError as e:
        # input-side OSErrors are wrapped as TraceError above; what remains
        # is an unusable output location
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
