"""Multiplicative log-normal size-estimation errors.

A job of true size ``s`` is estimated as ``s * exp(sigma * Z)`` with
``Z ~ N(0, 1)``, i.e. the error factor is log-normal with log-stddev
``sigma``.  Under-estimating by a factor k is as likely as over-estimating
by k, and ``sigma = 0`` reproduces the true sizes exactly.  Draws come from
a single seeded stream in job-list order, so results are reproducible for a
fixed (jobs, sigma, seed) triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trace import SizedJob


class NonPositiveSize(Exception):
    def __init__(self, label: str):
        super().__init__(f"job {label!r} has non-positive true size")
        self.label = label


@dataclass(frozen=True, slots=True)
class ErrorModel:
    sigma: float
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")


@dataclass(frozen=True, slots=True)
class EstimatedJob:
    submit_time: float
    true_size: float
    est_size: float
    label: str


def estimate(jobs: list[SizedJob], model: ErrorModel) -> list[EstimatedJob]:
    """Attach an estimated size to every job.

    With sigma = 0 the estimate equals the true size bit-for-bit.
    """
    for job in jobs:
        if not job.true_size > 0:
            raise NonPositiveSize(job.label)
    if model.sigma == 0:
        return [
            EstimatedJob(j.submit_time, j.true_size, j.true_size, j.label)
            for j in jobs
        ]
    rng = np.random.default_rng(model.seed)
    factors = np.exp(model.sigma * rng.standard_normal(len(jobs)))
    return [
        EstimatedJob(j.submit_time, j.true_size, j.true_size * float(f), j.label)
        for j, f in zip(jobs, factors)
    ]
