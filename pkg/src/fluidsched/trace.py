"""Workload ingestion: SWIM-style .tsv parsing, load calibration, job sizing.

A raw trace row carries a submission time plus three byte counts (input read
from disk, data shuffled over the network, output written to disk).  The
byte counts are collapsed into a single job size in seconds by pricing disk
and network bytes with per-byte unit costs ``d`` and ``n``.  Rather than
asking the user for hardware speeds, the unit costs are calibrated so that
the total size of all jobs equals ``load * (t_e - t_0)`` for a requested
load, subject to a fixed disk/network cost ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Union

import numpy as np

DEFAULT_COLUMNS = {
    "label": 0,
    "submit_time": 1,
    "input_bytes": 2,
    "shuffle_bytes": 3,
    "output_bytes": 4,
}

_NUMERIC_FIELDS = ("submit_time", "input_bytes", "shuffle_bytes", "output_bytes")


class TraceError(Exception):
    """Base class for workload ingestion errors."""


class MalformedRow(TraceError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class NegativeValue(TraceError):
    def __init__(self, line_no: int, field: str):
        super().__init__(f"line {line_no}: negative value for {field}")
        self.line_no = line_no
        self.field = field


class DegenerateTrace(TraceError):
    """Trace cannot be calibrated (zero submission span or zero total bytes)."""


class InvalidConfig(TraceError):
    """Calibration parameters out of range."""


class ZeroSizeJob(TraceError):
    def __init__(self, label: str):
        super().__init__(f"job {label!r} has zero bytes in all fields")
        self.label = label


class InvalidParams(TraceError):
    """Synthetic workload parameters out of range."""


@dataclass(frozen=True, slots=True)
class JobSpec:
    """One raw trace row; byte counts are non-negative, times in seconds."""

    submit_time: float
    input_bytes: float
    shuffle_bytes: float
    output_bytes: float
    label: str


@dataclass(frozen=True, slots=True)
class CalibrationConfig:
    load: float = 0.9
    dn_ratio: float = 4.0


@dataclass(frozen=True, slots=True)
class Calibration:
    """Per-byte unit costs (seconds/byte) plus the trace submission span."""

    d: float
    n: float
    t0: float
    te: float


@dataclass(frozen=True, slots=True)
class SizedJob:
    """A job whose work is a single positive duration in seconds."""

    submit_time: float
    true_size: float
    label: str


@dataclass(frozen=True, slots=True)
class HeavyTail:
    """Pareto sizes: ``scale * (1 + Pareto(shape))``, support [scale, inf)."""

    shape: float
    scale: float


@dataclass(frozen=True, slots=True)
class Uniform:
    lo: float
    hi: float


SizeDistribution = Union[HeavyTail, Uniform]


def parse_swim(
    lines: Iterable[str],
    column_map: dict[str, int] | None = None,
    time_unit: str = "seconds",
) -> list[JobSpec]:
    """Parse tab-separated trace lines into JobSpecs, in file order.

    Empty lines and lines starting with ``#`` are skipped.  ``column_map``
    assigns zero-based column indices to the fields in ``DEFAULT_COLUMNS``;
    mapping ``label`` to None synthesizes ``rowN`` labels.  ``time_unit``
    is ``seconds`` or ``milliseconds`` and applies to submit_time only.
    """
    columns = dict(DEFAULT_COLUMNS if column_map is None else column_map)
    for field in _NUMERIC_FIELDS:
        if field not in columns:
            raise InvalidConfig(f"column_map is missing {field!r}")
    indices = [columns[f] for f in _NUMERIC_FIELDS]
    if columns.get("label") is not None:
        indices.append(columns["label"])
    if len(set(indices)) != len(indices):
        raise InvalidConfig("column_map assigns the same index twice")
    if time_unit not in ("seconds", "milliseconds"):
        raise InvalidConfig(f"unknown time_unit {time_unit!r}")
    scale = 1e-3 if time_unit == "milliseconds" else 1.0

    jobs = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        values = {}
        for field in _NUMERIC_FIELDS:
            idx = columns[field]
            if idx >= len(parts):
                raise MalformedRow(line_no, f"missing column {idx} for {field}")
            try:
                value = float(parts[idx])
            except ValueError:
                raise MalformedRow(
                    line_no, f"non-numeric {field} value {parts[idx]!r}"
                ) from None
            if not math.isfinite(value):
                raise MalformedRow(line_no, f"non-finite {field} value")
            if value < 0:
                raise NegativeValue(line_no, field)
            values[field] = value
        label_idx = columns.get("label")
        if label_idx is None:
            label = f"row{line_no}"
        elif label_idx >= len(parts):
            raise MalformedRow(line_no, f"missing column {label_idx} for label")
        else:
            label = parts[label_idx]
        jobs.append(
            JobSpec(
                submit_time=values["submit_time"] * scale,
                input_bytes=values["input_bytes"],
                shuffle_bytes=values["shuffle_bytes"],
                output_bytes=values["output_bytes"],
                label=label,
            )
        )
    return jobs


def calibrate(jobs: list[JobSpec], config: CalibrationConfig) -> Calibration:
    """Solve for the unit costs (d, n) that realize the configured load.

    The defining system is ``sum_j d*(i_j + o_j) + n*s_j = load*(t_e - t_0)``
    with ``d = dn_ratio * n``, which is linear in n:

        n = load * (t_e - t_0) / (dn_ratio * sum(i + o) + sum(s))
    """
    if not (math.isfinite(config.load) and config.load > 0):
        raise InvalidConfig(f"load must be positive, got {config.load}")
    if not (math.isfinite(config.dn_ratio) and config.dn_ratio > 0):
        raise InvalidConfig(f"dn_ratio must be positive, got {config.dn_ratio}")
    if not jobs:
        raise DegenerateTrace("empty trace")
    t0 = min(j.submit_time for j in jobs)
    te = max(j.submit_time for j in jobs)
    if te <= t0:
        raise DegenerateTrace("all jobs share one submission time")
    disk_bytes = sum(j.input_bytes + j.output_bytes for j in jobs)
    net_bytes = sum(j.shuffle_bytes for j in jobs)
    weighted = config.dn_ratio * disk_bytes + net_bytes
    if weighted <= 0:
        raise DegenerateTrace("trace has zero total bytes")
    n = config.load * (te - t0) / weighted
    return Calibration(d=config.dn_ratio * n, n=n, t0=t0, te=te)


def size_jobs(jobs: list[JobSpec], cal: Calibration) -> list[SizedJob]:
    """Price each job's bytes into a duration: ``d*(i + o) + n*s`` seconds."""
    sized = []
    for job in jobs:
        if job.input_bytes + job.shuffle_bytes + job.output_bytes == 0:
            raise ZeroSizeJob(job.label)
        size = cal.d * (job.input_bytes + job.output_bytes) + cal.n * job.shuffle_bytes
        sized.append(SizedJob(job.submit_time, size, job.label))
    return sized


def gen_synthetic(
    n_jobs: int,
    arrival_rate: float,
    size_distribution: SizeDistribution,
    seed: int,
) -> list[SizedJob]:
    """Poisson arrivals with i.i.d. sizes; deterministic for a given seed."""
    if n_jobs < 1:
        raise InvalidParams(f"n_jobs must be >= 1, got {n_jobs}")
    if not (math.isfinite(arrival_rate) and arrival_rate > 0):
        raise InvalidParams(f"arrival_rate must be positive, got {arrival_rate}")
    rng = np.random.default_rng(seed)
    times = np.cumsum(rng.exponential(1.0 / arrival_rate, n_jobs))
    if isinstance(size_distribution, HeavyTail):
        if size_distribution.shape <= 0 or size_distribution.scale <= 0:
            raise InvalidParams(f"bad heavy-tail parameters {size_distribution}")
        sizes = size_distribution.scale * (1.0 + rng.pareto(size_distribution.shape, n_jobs))
    elif isinstance(size_distribution, Uniform):
        if not (0 < size_distribution.lo <= size_distribution.hi):
            raise InvalidParams(f"bad uniform bounds {size_distribution}")
        sizes = rng.uniform(size_distribution.lo, size_distribution.hi, n_jobs)
    else:
        raise InvalidParams(f"unknown size distribution {size_distribution!r}")
    return [
        SizedJob(float(t), float(s), f"j{i}")
        for i, (t, s) in enumerate(zip(times, sizes))
    ]


def rescale_to_load(jobs: list[SizedJob], load: float) -> list[SizedJob]:
    """Scale all sizes so total size over the submission span equals ``load``.

    Applies the same algebra as :func:`calibrate` to an already-sized
    workload (sizes are linear in the unit costs, so only the common factor
    changes).  Raises DegenerateTrace when the span is zero.
    """
    if not (math.isfinite(load) and load > 0):
        raise InvalidConfig(f"load must be positive, got {load}")
    if not jobs:
        raise DegenerateTrace("empty workload")
    t0 = min(j.submit_time for j in jobs)
    te = max(j.submit_time for j in jobs)
    if te <= t0:
        raise DegenerateTrace("all jobs share one submission time")
    total = sum(j.true_size for j in jobs)
    if total <= 0:
        raise DegenerateTrace("workload has zero total size")
    factor = load * (te - t0) / total
    return [replace(j, true_size=j.true_size * factor) for j in jobs]
