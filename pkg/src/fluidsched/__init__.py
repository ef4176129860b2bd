"""Fluid-rate simulator for size-based job scheduling under noisy estimates."""

from .engine import (
    JobOutcome,
    NonTermination,
    PendingJob,
    PendingView,
    PolicyViolation,
    RunResult,
    SchedulerDecision,
    run,
    run_discretized,
)
from .errmodel import ErrorModel, EstimatedJob, NonPositiveSize, estimate
from .metrics import BoxStats, RunSummary, box_stats, summarize
from .schedulers import SCHEDULER_NAMES, SIZE_BLIND, LatePolicy, Policy, make_scheduler
from .trace import (
    Calibration,
    CalibrationConfig,
    DegenerateTrace,
    HeavyTail,
    InvalidConfig,
    InvalidParams,
    JobSpec,
    MalformedRow,
    NegativeValue,
    SizedJob,
    Uniform,
    ZeroSizeJob,
    calibrate,
    gen_synthetic,
    parse_swim,
    rescale_to_load,
    size_jobs,
)

__version__ = "0.1.0"

__all__ = [
    "BoxStats",
    "Calibration",
    "CalibrationConfig",
    "DegenerateTrace",
    "ErrorModel",
    "EstimatedJob",
    "HeavyTail",
    "InvalidConfig",
    "InvalidParams",
    "JobOutcome",
    "JobSpec",
    "LatePolicy",
    "MalformedRow",
    "NegativeValue",
    "NonPositiveSize",
    "NonTermination",
    "PendingJob",
    "PendingView",
    "Policy",
    "PolicyViolation",
    "RunResult",
    "RunSummary",
    "SCHEDULER_NAMES",
    "SIZE_BLIND",
    "SchedulerDecision",
    "SizedJob",
    "Uniform",
    "ZeroSizeJob",
    "box_stats",
    "calibrate",
    "estimate",
    "gen_synthetic",
    "make_scheduler",
    "parse_swim",
    "rescale_to_load",
    "run",
    "run_discretized",
    "size_jobs",
    "summarize",
]
