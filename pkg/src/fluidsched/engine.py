"""Event-driven fluid simulation core.

Jobs receive continuous fractional service rates chosen by a scheduling
policy; between events every pending job's attained service grows linearly
at its assigned rate.  Events are job arrivals, job completions, and policy
wake-ups (self-scheduled re-consultation points, used by policies whose
priorities change with time even when no job arrives or completes).  The
policy is re-consulted at every event.

Policies never see true sizes: a :class:`PendingJob` exposes the submitted
estimate and the true service received so far, which is exactly the
information available to a scheduler acting on size estimates.  True
remaining work is engine-private and determines actual completions.

Simultaneous events at one timestamp are processed as completions, then
arrivals, then wake-ups, followed by a single policy re-consultation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errmodel import EstimatedJob

EPS_ABS = 1e-12
EPS_REL = 1e-9
RATE_SUM_TOL = 1e-9


class PolicyViolation(Exception):
    """The policy returned rates that break the allocation contract."""


class NonTermination(Exception):
    """Event count exceeded the configured bound."""


@dataclass(slots=True)
class PendingJob:
    """Policy-visible state of one pending job.

    ``attained`` is true service received; the only size signal a policy may
    derive is ``est_size - attained``.  ``became_late_at`` is stamped by
    aging policies when a job outlives its estimate and is carried through
    to the run result for diagnostics.
    """

    jid: int
    label: str
    submit_time: float
    est_size: float
    attained: float = 0.0
    became_late_at: float | None = None


@dataclass(slots=True)
class PendingView:
    """Snapshot handed to a policy: current time plus pending jobs in
    admission order.  Owned by the engine; policies must not hold onto it."""

    now: float
    jobs: tuple[PendingJob, ...]


@dataclass(frozen=True, slots=True)
class SchedulerDecision:
    """Rates per pending jid (sparse; omitted jobs get 0) plus an optional
    absolute wake-up time.  Rates must be non-negative and sum to 1 whenever
    any job is pending.  Wake-ups at or before the current time are ignored."""

    rates: dict[int, float]
    wakeup: float | None = None


@dataclass(frozen=True, slots=True)
class JobOutcome:
    label: str
    submit_time: float
    true_size: float
    est_size: float
    completed_at: float
    sojourn: float
    became_late_at: float | None = None


@dataclass(frozen=True, slots=True)
class RunResult:
    """Per-job completion records in workload order.

    ``total_simulated_time`` is the clock value at the last completion and
    ``service_delivered`` the total work actually handed out, which must
    match the summed true sizes up to completion tolerance.
    """

    jobs: list[JobOutcome]
    total_simulated_time: float
    service_delivered: float


def completion_tolerance(true_size: float) -> float:
    """Remaining work at or below this counts as done (floating-point slack)."""
    return max(EPS_ABS, EPS_REL * true_size)


def _resolve_policy(policy):
    if isinstance(policy, str):
        from .schedulers import make_scheduler

        return make_scheduler(policy)
    return policy


def _validate_workload(workload: list[EstimatedJob]) -> None:
    if not workload:
        raise ValueError("workload is empty")
    prev = -math.inf
    for job in workload:
        if not (math.isfinite(job.submit_time) and job.submit_time >= 0):
            raise ValueError(f"job {job.label!r} has invalid submit time")
        if not (job.true_size > 0 and job.est_size > 0):
            raise ValueError(f"job {job.label!r} has non-positive size")
        if job.submit_time < prev:
            raise ValueError("workload is not sorted by submit time")
        prev = job.submit_time


def _check_rates(rates: dict[int, float], pending: dict[int, PendingJob]) -> None:
    total = 0.0
    for jid, rate in rates.items():
        if jid not in pending:
            raise PolicyViolation(f"rate assigned to non-pending job {jid}")
        if not (rate >= 0 and math.isfinite(rate)):
            raise PolicyViolation(f"invalid rate {rate} for job {jid}")
        total += rate
    if pending and abs(total - 1.0) > RATE_SUM_TOL:
        raise PolicyViolation(f"rates sum to {total}, expected 1")


def run(workload: list[EstimatedJob], policy, *, max_events: int = 10**8) -> RunResult:
    """Simulate the workload to completion under the given policy.

    ``workload`` must be sorted by submit time with positive sizes; jobs
    with equal submit times keep their input order.  ``policy`` is a
    scheduler instance (one fresh instance per run) or a canonical policy
    name.  The result is a pure function of (workload, policy configuration).
    """
    _validate_workload(workload)
    policy = _resolve_policy(policy)

    n = len(workload)
    pending: dict[int, PendingJob] = {}
    remaining: dict[int, float] = {}
    outcomes: list[JobOutcome | None] = [None] * n
    view = PendingView(0.0, ())
    view_stale = True

    i = 0
    now = workload[0].submit_time
    events = 0
    delivered = 0.0

    while pending or i < n:
        if not pending:
            # idle gap: jump straight to the next arrival
            now = workload[i].submit_time
        while i < n and workload[i].submit_time <= now:
            job = workload[i]
            pending[i] = PendingJob(i, job.label, job.submit_time, job.est_size)
            remaining[i] = job.true_size
            i += 1
            view_stale = True

        if view_stale:
            view.jobs = tuple(pending.values())
            view_stale = False
        view.now = now
        decision = policy.decide(view)
        rates = decision.rates
        _check_rates(rates, pending)

        events += 1
        if events > max_events:
            raise NonTermination(f"exceeded {max_events} events at t={now}")

        t_next = math.inf
        if i < n:
            t_next = workload[i].submit_time
        for jid, rate in rates.items():
            if rate > 0:
                t_done = now + remaining[jid] / rate
                if t_done < t_next:
                    t_next = t_done
        wakeup = decision.wakeup
        if wakeup is not None and now < wakeup < t_next:
            t_next = wakeup

        dt = t_next - now
        if dt > 0:
            for jid, rate in rates.items():
                if rate > 0:
                    served = rate * dt
                    pending[jid].attained += served
                    remaining[jid] -= served
                    delivered += served
        now = t_next

        for jid, rate in rates.items():
            if rate > 0 and remaining[jid] <= completion_tolerance(workload[jid].true_size):
                job = pending.pop(jid)
                del remaining[jid]
                outcomes[jid] = JobOutcome(
                    label=job.label,
                    submit_time=job.submit_time,
                    true_size=workload[jid].true_size,
                    est_size=job.est_size,
                    completed_at=now,
                    sojourn=now - job.submit_time,
                    became_late_at=job.became_late_at,
                )
                view_stale = True

    return RunResult(jobs=list(outcomes), total_simulated_time=now, service_delivered=delivered)


def run_discretized(
    workload: list[EstimatedJob], policy, dt: float, *, max_events: int = 10**8
) -> RunResult:
    """Fixed-step cross-check for :func:`run`.

    The policy is re-consulted at every multiple of ``dt`` no matter what,
    so a stale allocation can survive for at most one step: a missing or
    late wake-up leaves this engine within about one step of the fluid
    trajectory while derailing the event-driven one, which makes their
    divergence the bug signal.  Arrivals and completions are resolved at
    their exact instants so no work is lost, and a wake-up earlier than the
    next grid point shortens the step rather than extending it.  Completion
    times can shift by up to about one step relative to :func:`run`.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    _validate_workload(workload)
    policy = _resolve_policy(policy)

    n = len(workload)
    t_start = workload[0].submit_time
    pending: dict[int, PendingJob] = {}
    remaining: dict[int, float] = {}
    outcomes: list[JobOutcome | None] = [None] * n
    view = PendingView(0.0, ())
    view_stale = True

    i = 0
    now = t_start
    events = 0
    delivered = 0.0

    while pending or i < n:
        if not pending:
            now = workload[i].submit_time
        while i < n and workload[i].submit_time <= now:
            job = workload[i]
            pending[i] = PendingJob(i, job.label, job.submit_time, job.est_size)
            remaining[i] = job.true_size
            i += 1
            view_stale = True

        if view_stale:
            view.jobs = tuple(pending.values())
            view_stale = False
        view.now = now
        decision = policy.decide(view)
        rates = decision.rates
        _check_rates(rates, pending)

        events += 1
        if events > max_events:
            raise NonTermination(f"exceeded {max_events} events at t={now}")

        # next grid point strictly after now
        steps = math.floor((now - t_start) / dt) + 1
        boundary = t_start + steps * dt
        if boundary <= now:
            boundary += dt

        t_stop = boundary
        wakeup = decision.wakeup
        if wakeup is not None and now < wakeup < t_stop:
            t_stop = wakeup
        if i < n and workload[i].submit_time < t_stop:
            t_stop = workload[i].submit_time
        for jid, rate in rates.items():
            if rate > 0:
                t_done = now + remaining[jid] / rate
                if t_done < t_stop:
                    t_stop = t_done

        span = t_stop - now
        if span > 0:
            for jid, rate in rates.items():
                if rate > 0:
                    served = rate * span
                    pending[jid].attained += served
                    remaining[jid] -= served
                    delivered += served
        now = t_stop

        for jid, rate in rates.items():
            if rate > 0 and remaining[jid] <= completion_tolerance(workload[jid].true_size):
                job = pending.pop(jid)
                del remaining[jid]
                outcomes[jid] = JobOutcome(
                    label=job.label,
                    submit_time=job.submit_time,
                    true_size=workload[jid].true_size,
                    est_size=job.est_size,
                    completed_at=now,
                    sojourn=now - job.submit_time,
                    became_late_at=job.became_late_at,
                )
                view_stale = True

    return RunResult(jobs=list(outcomes), total_simulated_time=now, service_delivered=delivered)
