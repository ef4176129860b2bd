"""Scheduling disciplines as rate-allocation policies.

Canonical policy names: ``FIFO``, ``PS``, ``LAS``, ``SRPT``, ``FSP+FIFO``,
``FSP+PS`` (these exact strings appear in CLI flags and CSV output).

Every policy implements ``decide(view) -> SchedulerDecision`` over the
engine's pending-job view.  FIFO and SRPT give the whole system to a single
job; PS and LAS spread it uniformly over their served set.  Deterministic
tie-breaking is (submit time, input order) everywhere, with a 1e-9 second
tolerance on attained-service and virtual-remaining comparisons.

Policy instances may be stateful (FSP's virtual system) and belong to
exactly one simulation run; construct a fresh one per run.
"""

from __future__ import annotations

import heapq
import math
from enum import Enum

from .engine import (
    PendingJob,
    PendingView,
    SchedulerDecision,
    completion_tolerance,
)

TIE_TOL = 1e-9


class LatePolicy(Enum):
    FIFO = "FIFO"
    PS = "PS"


class Policy:
    """Base class; subclasses set ``name`` and implement ``decide``."""

    name: str

    def decide(self, view: PendingView) -> SchedulerDecision:
        raise NotImplementedError


class FIFO(Policy):
    """All resources to the earliest-submitted pending job, no preemption."""

    name = "FIFO"

    def decide(self, view: PendingView) -> SchedulerDecision:
        head = min(view.jobs, key=lambda j: (j.submit_time, j.jid))
        return SchedulerDecision({head.jid: 1.0})


class PS(Policy):
    """Processor sharing: each of the n pending jobs runs at rate 1/n."""

    name = "PS"

    def decide(self, view: PendingView) -> SchedulerDecision:
        share = 1.0 / len(view.jobs)
        return SchedulerDecision({j.jid: share for j in view.jobs})


class LAS(Policy):
    """Least attained service: the jobs with minimum attained service share
    the system equally.  The wake-up is set to the instant the served group
    catches the next-higher attained level, so level crossings become event
    boundaries."""

    name = "LAS"

    def decide(self, view: PendingView) -> SchedulerDecision:
        lowest = min(j.attained for j in view.jobs)
        cutoff = lowest + TIE_TOL
        served = [j.jid for j in view.jobs if j.attained <= cutoff]
        share = 1.0 / len(served)
        rates = {jid: share for jid in served}
        wakeup = None
        waiting = [j.attained for j in view.jobs if j.attained > cutoff]
        if waiting:
            wakeup = view.now + (min(waiting) - lowest) * len(served)
        return SchedulerDecision(rates, wakeup)


class SRPT(Policy):
    """All resources to the job with least estimated remaining work.

    Estimated remaining work is clamped at zero, so a job that has outlived
    an under-estimate keeps top priority until it actually completes."""

    name = "SRPT"

    def decide(self, view: PendingView) -> SchedulerDecision:
        best = min(
            view.jobs,
            key=lambda j: (max(j.est_size - j.attained, 0.0), j.submit_time, j.jid),
        )
        return SchedulerDecision({best.jid: 1.0})


class FSP(Policy):
    """Fair sojourn protocol: serve jobs in the order they would complete in
    a virtual processor-sharing system fed with estimated sizes.

    The virtual system runs in wall time alongside the real one.  Jobs enter
    it at submission with their estimate as virtual work and deplete at rate
    1/k while k jobs are virtually active; a job that really completes stays
    in the virtual system until its virtual work is gone, since purging it
    early would change every other job's virtual completion order.  A job
    whose virtual work hits zero while still really pending is "late"
    (possible only under under-estimation) and late jobs preempt all others:
    the FIFO variant serves them in lateness order, the PS variant shares
    the system equally among them.

    Bookkeeping uses a fair-share clock that grows by dt/k; a job entering
    when the clock reads F with estimate e virtually completes when the
    clock reaches the constant tag F + e.  Tag order equals virtual-
    remaining order, and per-interval depletion is uniform over active jobs,
    so this is the per-job depletion rule in closed form.
    """

    def __init__(self, late_policy: LatePolicy):
        self.late_policy = late_policy
        self.name = f"FSP+{late_policy.value}"
        self._fair = 0.0  # fair-share clock F
        self._vt: float | None = None  # wall time the virtual system has reached
        self._tags: dict[int, float] = {}  # jid -> virtual finish tag
        self._slack: dict[int, float] = {}  # jid -> virtual completion slack
        self._heap: list[tuple[float, int]] = []  # (tag, jid), lazily pruned
        self._late: dict[int, float] = {}  # jid -> became_late_at
        self._seen: set[int] = set()

    def _prune(self) -> tuple[float, int] | None:
        heap = self._heap
        while heap:
            tag, jid = heap[0]
            if jid in self._tags:
                return tag, jid
            heapq.heappop(heap)
        return None

    def _finish_virtually(self, jid: int, at: float, pending_ids: set[int]) -> None:
        del self._tags[jid]
        del self._slack[jid]
        if jid in pending_ids and jid not in self._late:
            self._late[jid] = at

    def _advance(self, t: float, pending_ids: set[int]) -> None:
        """Deplete virtual work up to wall time t, crossing completions."""
        while self._tags and t > self._vt:
            tag, jid = self._prune()
            k = len(self._tags)
            wall_to_cross = (tag - self._fair) * k
            span = t - self._vt
            if wall_to_cross <= span:
                self._vt += wall_to_cross
                self._fair = tag
            else:
                self._fair += span / k
                self._vt = t
            # collect every job due at the new clock value (within slack)
            while True:
                top = self._prune()
                if top is None or top[0] - self._fair > self._slack[top[1]]:
                    break
                heapq.heappop(self._heap)
                self._finish_virtually(top[1], self._vt, pending_ids)
        self._vt = t

    def decide(self, view: PendingView) -> SchedulerDecision:
        now = view.now
        pending_ids = {j.jid for j in view.jobs}
        if self._vt is None:
            self._vt = now
        self._advance(now, pending_ids)

        # enroll new arrivals only after aging the jobs that preceded them
        for j in view.jobs:
            if j.jid not in self._seen:
                self._seen.add(j.jid)
                self._tags[j.jid] = self._fair + j.est_size
                self._slack[j.jid] = completion_tolerance(j.est_size)
                heapq.heappush(self._heap, (self._tags[j.jid], j.jid))

        # lateness bookkeeping is only meaningful for jobs still pending
        for jid in [jid for jid in self._late if jid not in pending_ids]:
            del self._late[jid]

        # a virtual remainder too small to yield a strictly-future wake-up is
        # finished now, otherwise the engine would spin on a stale wake-up
        while True:
            top = self._prune()
            if top is None:
                break
            tag, jid = top
            if now + (tag - self._fair) * len(self._tags) > now:
                break
            heapq.heappop(self._heap)
            self._finish_virtually(jid, now, pending_ids)

        for j in view.jobs:
            if j.became_late_at is None and j.jid in self._late:
                j.became_late_at = self._late[j.jid]

        late_pending = [j for j in view.jobs if j.jid in self._late]
        if late_pending:
            if self.late_policy is LatePolicy.FIFO:
                first = min(
                    late_pending,
                    key=lambda j: (self._late[j.jid], j.submit_time, j.jid),
                )
                rates = {first.jid: 1.0}
            else:
                share = 1.0 / len(late_pending)
                rates = {j.jid: share for j in late_pending}
        else:
            tags = self._tags
            lowest = min(tags[j.jid] for j in view.jobs)
            head = min(
                (j for j in view.jobs if tags[j.jid] <= lowest + TIE_TOL),
                key=lambda j: (j.submit_time, j.jid),
            )
            rates = {head.jid: 1.0}

        wakeup = None
        top = self._prune()
        if top is not None:
            wakeup = now + (top[0] - self._fair) * len(self._tags)
        return SchedulerDecision(rates, wakeup)


_REGISTRY = {
    "FIFO": FIFO,
    "PS": PS,
    "LAS": LAS,
    "SRPT": SRPT,
    "FSP+FIFO": lambda: FSP(LatePolicy.FIFO),
    "FSP+PS": lambda: FSP(LatePolicy.PS),
}

SCHEDULER_NAMES = tuple(_REGISTRY)

# Policies whose decisions never read est_size; together with sigma = 0 runs
# they need a single simulation run per configuration.
SIZE_BLIND = frozenset({"FIFO", "PS", "LAS"})


def make_scheduler(name: str) -> Policy:
    """Instantiate a fresh policy from its canonical name."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULER_NAMES)}"
        ) from None
    return factory()
