"""Per-run and cross-run statistics: sojourn, slowdown, box-plot aggregates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import RunResult


class IncompleteRun(Exception):
    """The run has jobs without a completion record."""


class EmptyInput(Exception):
    pass


@dataclass(frozen=True, slots=True)
class RunSummary:
    """One CSV row: the experiment context plus this run's mean metrics."""

    scheduler_name: str
    sigma: float
    load: float
    dn_ratio: float
    run_id: int
    mean_sojourn: float
    mean_slowdown: float
    job_count: int


@dataclass(frozen=True, slots=True)
class BoxStats:
    """Tukey box-plot statistics: whiskers reach the most extreme data point
    within 1.5 IQR of the box; anything beyond is an outlier."""

    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    n_outliers: int


def summarize(
    result: RunResult,
    scheduler_name: str,
    sigma: float,
    load: float,
    dn_ratio: float,
    run_id: int,
) -> RunSummary:
    """Reduce a run to mean sojourn and mean slowdown (sojourn / true size)."""
    if any(job is None or job.completed_at is None for job in result.jobs):
        raise IncompleteRun("run has uncompleted jobs")
    sojourns = [job.sojourn for job in result.jobs]
    slowdowns = [job.sojourn / job.true_size for job in result.jobs]
    count = len(result.jobs)
    return RunSummary(
        scheduler_name=scheduler_name,
        sigma=sigma,
        load=load,
        dn_ratio=dn_ratio,
        run_id=run_id,
        mean_sojourn=sum(sojourns) / count,
        mean_slowdown=sum(slowdowns) / count,
        job_count=count,
    )


def box_stats(values: list[float]) -> BoxStats:
    """Median and quartiles by linear interpolation, Tukey 1.5-IQR whiskers."""
    if len(values) == 0:
        raise EmptyInput("box_stats needs at least one value")
    arr = np.asarray(values, dtype=float)
    q1, median, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    reach = 1.5 * (q3 - q1)
    inliers = arr[(arr >= q1 - reach) & (arr <= q3 + reach)]
    # interpolated quartiles need not be data points, so a whisker can only
    # be guaranteed to reach the box by clamping it there
    return BoxStats(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_lo=float(min(inliers.min(), q1)),
        whisker_hi=float(max(inliers.max(), q3)),
        n_outliers=int(arr.size - inliers.size),
    )
