"""Shared test workload builders and hypothesis strategies."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from fluidsched.errmodel import EstimatedJob
from fluidsched.trace import JobSpec

LABELS = st.text("abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=8)

byte_counts = st.floats(min_value=0, max_value=1e12, allow_nan=False)
submit_times = st.floats(min_value=0, max_value=1e6, allow_nan=False)


@st.composite
def job_specs(draw, min_jobs=1, max_jobs=12):
    n = draw(st.integers(min_jobs, max_jobs))
    times = sorted(draw(st.lists(submit_times, min_size=n, max_size=n)))
    specs = []
    for i, t in enumerate(times):
        i_b = draw(byte_counts)
        s_b = draw(byte_counts)
        o_b = draw(byte_counts)
        specs.append(JobSpec(t, i_b, s_b, o_b, f"j{i}"))
    return specs


@st.composite
def workloads(draw, min_jobs=1, max_jobs=8, max_size=20.0, max_gap=10.0, sigma=0.0):
    """Small estimated workloads with bounded sizes and arrival gaps."""
    n = draw(st.integers(min_jobs, max_jobs))
    gaps = draw(
        st.lists(st.floats(0, max_gap, allow_nan=False), min_size=n, max_size=n)
    )
    sizes = draw(
        st.lists(st.floats(0.1, max_size, allow_nan=False), min_size=n, max_size=n)
    )
    t = 0.0
    jobs = []
    for i, (gap, size) in enumerate(zip(gaps, sizes)):
        t += gap
        est = size
        if sigma > 0:
            est = size * float(
                np.exp(sigma * draw(st.floats(-2.0, 2.0, allow_nan=False)))
            )
        jobs.append(EstimatedJob(t, size, est, f"j{i}"))
    return jobs


def wl(*rows):
    """Workload from (submit, true, est, label) or (submit, size, label) rows."""
    jobs = []
    for row in rows:
        if len(row) == 3:
            t, size, label = row
            jobs.append(EstimatedJob(t, size, size, label))
        else:
            t, size, est, label = row
            jobs.append(EstimatedJob(t, size, est, label))
    return jobs


def completions(result):
    return {j.label: j.completed_at for j in result.jobs}


def random_workloads(n_workloads, *, max_jobs, seed, shape=2.0, scale=1.0):
    """Seeded corpus of heavy-tailed workloads at roughly unit load."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_workloads):
        n = int(rng.integers(3, max_jobs + 1))
        sizes = scale * (1.0 + rng.pareto(shape, n))
        rate = n / (1.1 * float(sizes.sum()))
        times = np.cumsum(rng.exponential(1.0 / rate, n))
        out.append(
            [
                EstimatedJob(float(t), float(s), float(s), f"j{i}")
                for i, (t, s) in enumerate(zip(times, sizes))
            ]
        )
    return out


def with_errors(workload, sigma, seed):
    """Fresh log-normal estimates on an existing workload."""
    rng = np.random.default_rng(seed)
    return [
        EstimatedJob(
            j.submit_time,
            j.true_size,
            j.true_size * float(np.exp(sigma * rng.standard_normal())),
            j.label,
        )
        for j in workload
    ]
