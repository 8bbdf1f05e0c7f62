"""Shared scheduling machinery.

This module hosts the mutable machine state used by every algorithm, the
per-type list scheduler, LPT ordering, insertion-based earliest-finish
placement, the on-line simulation loop, and the spoliation primitive
(moving a running task to an idle resource that finishes it earlier,
discarding the partial work).
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Protocol, Sequence

from .model import (
    TIME_EPS,
    Assignment,
    Instance,
    Placement,
    Platform,
    Schedule,
    Task,
    flt,
)


@dataclass
class RunningTask:
    tid: int
    start: float
    end: float


class MachineState:
    """Per-processor availability, busy intervals and the currently
    running task.  Single-owner mutable: one simulation per state."""

    def __init__(self, platform: Platform):
        self.platform = platform
        n = platform.n_procs
        self.avail = [0.0] * n
        # Sorted (start, end, tid) triples; aborted work stays recorded so
        # gap placement never collides with it.
        self.intervals: list[list[tuple[float, float, int]]] = [[] for _ in range(n)]
        self.running: list[Optional[RunningTask]] = [None] * n
        self.placements: dict[int, Placement] = {}

    def duration(self, task: Task, proc: int) -> float:
        return self.platform.duration(task, proc)

    def start_task(self, task: Task, proc: int, start: float) -> float:
        end = start + self.duration(task, proc)
        bisect.insort(self.intervals[proc], (start, end, task.id))
        self.avail[proc] = max(self.avail[proc], end)
        self.running[proc] = RunningTask(task.id, start, end)
        self.placements[task.id] = Placement(proc, start, end)
        return end

    def abort_running(self, proc: int, t: float) -> int:
        """Truncate the running task on `proc` at time t.  The partial work
        [start, t) stays committed on the processor; the task itself loses
        its placement and must be restarted elsewhere."""
        run = self.running[proc]
        assert run is not None, "no running task to abort"
        self.intervals[proc].remove((run.start, run.end, run.tid))
        if t > run.start + TIME_EPS:
            bisect.insort(self.intervals[proc], (run.start, t, -1))
        self.running[proc] = None
        self.avail[proc] = t
        del self.placements[run.tid]
        return run.tid

    def running_at(self, proc: int, t: float) -> Optional[RunningTask]:
        """The task actually executing on `proc` at time t.  A task merely
        committed to a future start is not running and cannot be stolen
        (restarting it before its start could precede its readiness)."""
        run = self.running[proc]
        if run is not None and run.start <= t + TIME_EPS and run.end > t + TIME_EPS:
            return run
        return None

    def earliest_proc(self, kind: str) -> int:
        """Lowest-index processor of the kind with minimum availability."""
        best = None
        for p in self.platform.procs_of(kind):
            if best is None or flt(self.avail[p], self.avail[best]):
                best = p
        assert best is not None
        return best

    def gpu_earliest_idle(self) -> float:
        """Earliest moment when at least one GPU is idle."""
        return min(self.avail[p] for p in self.platform.gpus())

    def eft_proc(self, task: Task, ready: float) -> tuple[int, float]:
        """Earliest-completion placement appending after current work
        (no gap insertion).  Ties: lowest processor index."""
        best_proc, best_start, best_end = -1, 0.0, float("inf")
        for p in range(self.platform.n_procs):
            start = max(ready, self.avail[p])
            end = start + self.duration(task, p)
            if flt(end, best_end):
                best_proc, best_start, best_end = p, start, end
        return best_proc, best_start

    def insertion_slot(self, task: Task, proc: int, ready: float) -> float:
        """Earliest start >= ready on `proc`, allowed to fill an idle gap
        if the task fits entirely."""
        dur = self.duration(task, proc)
        t = ready
        for s, e, _tid in self.intervals[proc]:
            if s - t >= dur - TIME_EPS:
                return t
            t = max(t, e)
        return t

    def to_schedule(self) -> Schedule:
        return Schedule(self.placements)


def lpt_order(tasks: Sequence[Task], side: str) -> list[int]:
    """Ids sorted by nonincreasing processing time on the given side,
    ties by ascending id."""
    if side == "cpu":
        key = lambda t: (-t.cpu_time, t.id)
    elif side == "gpu":
        key = lambda t: (-t.gpu_time, t.id)
    else:
        raise ValueError(f"unknown side {side!r}")
    return [t.id for t in sorted(tasks, key=key)]


def list_schedule(
    instance: Instance,
    platform: Platform,
    assignment: Assignment,
    order: Sequence[int],
) -> Schedule:
    """Graham list scheduling restricted per side by the assignment.

    Whenever a processor becomes idle it takes the first task in the list
    that is ready (all predecessors complete) and assigned to its type;
    among simultaneously idle processors the lowest index wins.  No gap
    insertion: this is the plain semantics the approximation arguments
    rely on.
    """
    ms = MachineState(platform)
    remaining = {"cpu": [], "gpu": []}
    pos = {}
    for i, tid in enumerate(order):
        pos[tid] = i
        remaining[assignment.side(tid)].append(tid)
    if len(pos) != instance.n:
        raise ValueError("order must cover every task exactly once")

    if not instance.has_edges:
        # Fast path: everything ready at 0, pop in list order per side.
        for side in ("cpu", "gpu"):
            heap = [(0.0, p) for p in platform.procs_of(side)]
            heapq.heapify(heap)
            for tid in remaining[side]:
                t, p = heapq.heappop(heap)
                end = ms.start_task(instance.task(tid), p, t)
                heapq.heappush(heap, (end, p))
        return ms.to_schedule()

    preds_left = {tid: len(instance.preds[tid]) for tid in instance.by_id}
    max_pred_end = {tid: 0.0 for tid in instance.by_id}
    ready_time: dict[int, float] = {
        tid: 0.0 for tid in instance.by_id if preds_left[tid] == 0
    }
    unscheduled = set(order)
    while unscheduled:
        best = None  # (start, proc, list position, tid)
        for side in ("cpu", "gpu"):
            cands = [t for t in remaining[side] if t in unscheduled and t in ready_time]
            if not cands:
                continue
            for p in platform.procs_of(side):
                for tid in cands:
                    start = max(ms.avail[p], ready_time[tid])
                    key = (start, p, pos[tid])
                    if best is None or key < best[:3]:
                        best = (start, p, pos[tid], tid)
        if best is None:
            raise ValueError("order is not topological: no schedulable task")
        start, p, _, tid = best
        end = ms.start_task(instance.task(tid), p, start)
        unscheduled.discard(tid)
        for s in instance.succs[tid]:
            preds_left[s] -= 1
            max_pred_end[s] = max(max_pred_end[s], end)
            if preds_left[s] == 0:
                ready_time[s] = max_pred_end[s]
    return ms.to_schedule()


def eft_insertion_place(
    task: Task, instance: Instance, platform: Platform, machines: MachineState
) -> tuple[int, float]:
    """Insertion-based earliest finish time over all processors: every idle
    slot is considered, the task may fill a gap it fits in entirely.
    Ties: lowest processor index, then earliest start.  Predecessors of the
    task must already be placed."""
    ready = 0.0
    for pred in instance.preds[task.id]:
        ready = max(ready, machines.placements[pred].end)
    best = None  # (end, proc, start)
    for p in range(platform.n_procs):
        start = machines.insertion_slot(task, p, ready)
        end = start + machines.duration(task, p)
        key = (end, p, start)
        if best is None or flt(key[0], best[0]) or (not flt(best[0], key[0]) and key[1:] < best[1:]):
            best = key
    assert best is not None
    return best[1], best[2]


# ---------------------------------------------------------------------------
# On-line simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrival:
    """A task revealed to an on-line policy at its ready time, together
    with its (already revealed) predecessors."""

    task: Task
    ready: float
    preds: tuple[int, ...] = ()


class Feed(Protocol):
    def start(self) -> Iterable[Arrival]: ...

    def on_scheduled(self, tid: int, completion: float, proc: int) -> Iterable[Arrival]: ...


class InstanceFeed:
    """Replays a static instance as an arrival stream: sources at time 0 in
    id order, successors when their last predecessor completes."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self._left = {tid: len(instance.preds[tid]) for tid in instance.by_id}
        self._ready = {tid: 0.0 for tid in instance.by_id}

    def start(self) -> list[Arrival]:
        return [
            Arrival(t, 0.0, ())
            for t in sorted(self.instance.tasks, key=lambda t: t.id)
            if self._left[t.id] == 0
        ]

    def on_scheduled(self, tid: int, completion: float, proc: int) -> list[Arrival]:
        out = []
        for s in self.instance.succs[tid]:
            self._left[s] -= 1
            self._ready[s] = max(self._ready[s], completion)
            if self._left[s] == 0:
                out.append(
                    Arrival(
                        self.instance.task(s),
                        self._ready[s],
                        tuple(self.instance.preds[s]),
                    )
                )
        return out


class Policy(Protocol):
    def place(self, arrival: Arrival, machines: MachineState) -> int: ...


def online_simulate(
    feed: "Feed | Instance", platform: Platform, policy: Policy
) -> Schedule:
    """Event loop of the clairvoyant on-line model: arrivals are delivered
    in nondecreasing ready time (ties by ascending id) and each task is
    placed immediately and irrevocably by the policy."""
    if isinstance(feed, Instance):
        feed = InstanceFeed(feed)
    ms = MachineState(platform)
    heap: list[tuple[float, int, Arrival]] = []
    for a in feed.start():
        heapq.heappush(heap, (a.ready, a.task.id, a))
    while heap:
        _, _, arrival = heapq.heappop(heap)
        proc = policy.place(arrival, ms)
        start = max(arrival.ready, ms.avail[proc])
        end = ms.start_task(arrival.task, proc, start)
        for a in feed.on_scheduled(arrival.task.id, end, proc):
            heapq.heappush(heap, (a.ready, a.task.id, a))
    return ms.to_schedule()


# ---------------------------------------------------------------------------
# Spoliation
# ---------------------------------------------------------------------------


def find_spoliation_victim(
    machines: MachineState,
    instance: Instance,
    idle_proc: int,
    t: float,
    key: str = "finish",
    from_kind: Optional[str] = None,
) -> Optional[int]:
    """Candidate tasks run on the opposite resource type and would finish
    strictly earlier if restarted on `idle_proc` at time t.

    ``key`` selects the victim: "finish" picks the highest current finish
    time, "rank" expects a rank table under ``machines.rank`` and picks the
    highest rank.  Ties go to the ascending id.  ``from_kind`` restricts the
    side candidates may be taken from ("cpu" restricts to CPU victims)."""
    platform = machines.platform
    idle_is_cpu = platform.is_cpu(idle_proc)
    opposite = "gpu" if idle_is_cpu else "cpu"
    if from_kind is not None and from_kind != opposite:
        return None
    best = None
    for p in platform.procs_of(opposite):
        run = machines.running_at(p, t)
        if run is None:
            continue
        task = instance.task(run.tid)
        new_end = t + machines.duration(task, idle_proc)
        if not flt(new_end, run.end):
            continue  # strict improvement required
        if key == "finish":
            cand_key = (run.end, -run.tid)
        elif key == "rank":
            cand_key = (machines.rank[run.tid], -run.tid)  # type: ignore[attr-defined]
        else:
            raise ValueError(f"unknown spoliation key {key!r}")
        if best is None or cand_key > best[0]:
            best = (cand_key, run.tid, p)
    return None if best is None else best[1]


def apply_spoliation(
    machines: MachineState, instance: Instance, victim: int, idle_proc: int, t: float
) -> float:
    old_proc = machines.placements[victim].proc
    machines.abort_running(old_proc, t)
    return machines.start_task(instance.task(victim), idle_proc, t)


def spoliate(
    machines: MachineState, instance: Instance, idle_proc: int, t: float
) -> Optional[int]:
    """Move the running task on the opposite resource type with the highest
    current finish time to `idle_proc` if that makes it finish strictly
    earlier; the aborted work is discarded.  Returns the moved task id, or
    None when no candidate improves."""
    victim = find_spoliation_victim(machines, instance, idle_proc, t)
    if victim is None:
        return None
    apply_spoliation(machines, instance, victim, idle_proc, t)
    return victim
