"""Core domain types for scheduling on two types of resources.

A platform has ``m`` CPUs (processor indices ``0 .. m-1``) and ``k`` GPUs
(indices ``m .. m+k-1``).  Every task carries one processing time per
processor type.  Instances may add precedence edges, in which case they
form a DAG.  Schedules map each task to a processor and a start time.

Time is plain ``float`` throughout; every comparison that can decide a
placement goes through the tolerance helpers below so tie-breaking is
platform independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

#: Absolute tolerance for time comparisons.
TIME_EPS = 1e-9


def feq(a: float, b: float) -> bool:
    return abs(a - b) <= TIME_EPS


def fle(a: float, b: float) -> bool:
    return a <= b + TIME_EPS


def flt(a: float, b: float) -> bool:
    return a < b - TIME_EPS


@dataclass(frozen=True)
class Task:
    """A sequential task with one processing time per processor type."""

    id: int
    cpu_time: float
    gpu_time: float

    def __post_init__(self):
        if not self.cpu_time > 0:
            raise ValueError(f"task {self.id}: cpu_time must be > 0")
        if not self.gpu_time > 0:
            raise ValueError(f"task {self.id}: gpu_time must be > 0")

    @property
    def accel(self) -> float:
        """Acceleration factor: CPU time over GPU time.  May be below 1
        for tasks that run faster on a CPU."""
        return self.cpu_time / self.gpu_time


@dataclass(frozen=True)
class Platform:
    """m identical CPUs and k identical GPUs.

    ``m >= k`` is the usual convention but is not enforced here;
    algorithms that rely on it handle the swap internally.
    """

    m: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("platform needs at least one CPU and one GPU")

    @property
    def n_procs(self) -> int:
        return self.m + self.k

    def is_cpu(self, proc: int) -> bool:
        return 0 <= proc < self.m

    def cpus(self) -> range:
        return range(0, self.m)

    def gpus(self) -> range:
        return range(self.m, self.m + self.k)

    def procs_of(self, kind: str) -> range:
        if kind == "cpu":
            return self.cpus()
        if kind == "gpu":
            return self.gpus()
        raise ValueError(f"unknown processor kind {kind!r}")

    def duration(self, task: Task, proc: int) -> float:
        return task.cpu_time if self.is_cpu(proc) else task.gpu_time


class Instance:
    """An ordered task set plus optional precedence edges.

    Edge endpoints must reference existing task ids; duplicate edges and
    self loops are rejected.  Acyclicity is checked by
    :func:`topological_order`, not at construction time.
    """

    def __init__(self, tasks: Iterable[Task], edges: Iterable[tuple[int, int]] = ()):
        self.tasks: list[Task] = list(tasks)
        self.by_id: dict[int, Task] = {}
        for t in self.tasks:
            if t.id in self.by_id:
                raise ValueError(f"duplicate task id {t.id}")
            self.by_id[t.id] = t
        self.edges: list[tuple[int, int]] = []
        self.succs: dict[int, list[int]] = {t.id: [] for t in self.tasks}
        self.preds: dict[int, list[int]] = {t.id: [] for t in self.tasks}
        seen: set[tuple[int, int]] = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a not in self.by_id or b not in self.by_id:
                raise ValueError(f"edge ({a},{b}) references unknown task id")
            if a == b:
                raise ValueError(f"self loop on task {a}")
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a},{b})")
            seen.add((a, b))
            self.edges.append((a, b))
            self.succs[a].append(b)
            self.preds[b].append(a)

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def has_edges(self) -> bool:
        return bool(self.edges)

    def task(self, tid: int) -> Task:
        return self.by_id[tid]

    def ids(self) -> list[int]:
        return [t.id for t in self.tasks]

    def __repr__(self):
        return f"Instance(n={self.n}, edges={len(self.edges)})"


class CycleError(ValueError):
    """Raised when a precedence relation contains a cycle."""

    def __init__(self, task_id: int):
        super().__init__(f"precedence cycle through task {task_id}")
        self.task_id = task_id


def topological_order(instance: Instance) -> list[int]:
    """Kahn topological sort with ascending-id tie-breaks (deterministic)."""
    import heapq

    indeg = {tid: len(instance.preds[tid]) for tid in instance.by_id}
    heap = [tid for tid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out: list[int] = []
    while heap:
        tid = heapq.heappop(heap)
        out.append(tid)
        for s in instance.succs[tid]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(heap, s)
    if len(out) != instance.n:
        on_cycle = min(tid for tid, d in indeg.items() if d > 0)
        raise CycleError(on_cycle)
    return out


@dataclass(frozen=True)
class Assignment:
    """Binary allocation: 1 = CPU side, 0 = GPU side, total over the tasks."""

    x: Mapping[int, int]

    def side(self, tid: int) -> str:
        return "cpu" if self.x[tid] == 1 else "gpu"

    def cpu_ids(self) -> list[int]:
        return [tid for tid, v in self.x.items() if v == 1]

    def gpu_ids(self) -> list[int]:
        return [tid for tid, v in self.x.items() if v == 0]

    def cpu_load(self, instance: Instance) -> float:
        return sum(instance.task(t).cpu_time for t in self.cpu_ids())

    def gpu_load(self, instance: Instance) -> float:
        return sum(instance.task(t).gpu_time for t in self.gpu_ids())


@dataclass(frozen=True)
class Placement:
    proc: int
    start: float
    end: float


class Schedule:
    """Non-preemptive placements, one per task.  Built by algorithms and
    treated as immutable afterwards."""

    def __init__(self, placements: Mapping[int, Placement]):
        self.placements: dict[int, Placement] = dict(placements)

    def makespan(self) -> float:
        if not self.placements:
            return 0.0
        return max(p.end for p in self.placements.values())

    def completion(self, tid: int) -> float:
        return self.placements[tid].end

    def __repr__(self):
        return f"Schedule(n={len(self.placements)}, makespan={self.makespan():.6g})"


def makespan(schedule: Schedule) -> float:
    """Completion time of the last finishing task; 0 for an empty schedule."""
    return schedule.makespan()


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str

    def __str__(self):
        return f"{self.rule}: {self.detail}"


def validate(schedule: Schedule, instance: Instance, platform: Platform) -> Optional[Violation]:
    """Check all feasibility rules; return None when the schedule is valid,
    otherwise a report naming the first violated rule.

    Rules, in check order: unknown task, bad processor index, missing task,
    negative start, duration (end must equal start plus the processing time
    on the placement side), overlap, precedence.
    """
    for tid in sorted(schedule.placements):
        if tid not in instance.by_id:
            return Violation("unknown task", f"task {tid} not in instance")
    for tid in sorted(schedule.placements):
        p = schedule.placements[tid]
        if not (0 <= p.proc < platform.n_procs):
            return Violation("bad processor index", f"task {tid} on processor {p.proc}")
    for t in instance.tasks:
        if t.id not in schedule.placements:
            return Violation("missing task", f"task {t.id} has no placement")
    for tid in sorted(schedule.placements):
        p = schedule.placements[tid]
        if p.start < -TIME_EPS:
            return Violation("negative start", f"task {tid} starts at {p.start}")
        dur = platform.duration(instance.task(tid), p.proc)
        if not feq(p.end, p.start + dur):
            return Violation(
                "duration",
                f"task {tid}: end {p.end} != start {p.start} + {dur}",
            )
    by_proc: dict[int, list[tuple[float, float, int]]] = {}
    for tid, p in schedule.placements.items():
        by_proc.setdefault(p.proc, []).append((p.start, p.end, tid))
    for proc in sorted(by_proc):
        rows = sorted(by_proc[proc])
        for (s1, e1, t1), (s2, e2, t2) in zip(rows, rows[1:]):
            if flt(s2, e1):
                return Violation("overlap", f"tasks {t1} and {t2} overlap on processor {proc}")
    for a, b in instance.edges:
        if flt(schedule.placements[b].start, schedule.placements[a].end):
            return Violation(
                "precedence",
                f"task {b} starts at {schedule.placements[b].start} before "
                f"predecessor {a} completes at {schedule.placements[a].end}",
            )
    return None


# ---------------------------------------------------------------------------
# JSON interchange
#
# Instance files embed the platform they were generated for:
#   {"m": int, "k": int, "tasks": [{"id", "cpu", "gpu"}], "edges": [[a, b]]}
# Schedule files carry placements only; ends are re-derived on load:
#   {"placements": [{"id", "proc", "start"}]}
# ---------------------------------------------------------------------------


def instance_to_json(instance: Instance, platform: Platform) -> dict:
    return {
        "m": platform.m,
        "k": platform.k,
        "tasks": [
            {"id": t.id, "cpu": t.cpu_time, "gpu": t.gpu_time} for t in instance.tasks
        ],
        "edges": [[a, b] for a, b in instance.edges],
    }


def instance_from_json(obj: dict) -> tuple[Instance, Platform]:
    platform = Platform(int(obj["m"]), int(obj["k"]))
    tasks = [Task(int(t["id"]), float(t["cpu"]), float(t["gpu"])) for t in obj["tasks"]]
    edges = [(int(a), int(b)) for a, b in obj.get("edges", [])]
    return Instance(tasks, edges), platform


def save_instance(path: str | Path, instance: Instance, platform: Platform) -> None:
    Path(path).write_text(json.dumps(instance_to_json(instance, platform)) + "\n")


def load_instance(path: str | Path) -> tuple[Instance, Platform]:
    return instance_from_json(json.loads(Path(path).read_text()))


def schedule_to_json(schedule: Schedule) -> dict:
    return {
        "placements": [
            {"id": tid, "proc": p.proc, "start": p.start}
            for tid, p in sorted(schedule.placements.items())
        ]
    }


def schedule_from_json(obj: dict, instance: Instance, platform: Platform) -> Schedule:
    placements = {}
    for row in obj["placements"]:
        tid = int(row["id"])
        proc = int(row["proc"])
        start = float(row["start"])
        dur = platform.duration(instance.task(tid), proc)
        placements[tid] = Placement(proc, start, start + dur)
    return Schedule(placements)


# ---------------------------------------------------------------------------
# Canonical test fixtures (trivial by hand, shared across the test suite)
# ---------------------------------------------------------------------------


def fix1() -> tuple[Instance, Platform]:
    """One CPU, one GPU; task 1 = (2, 1), task 2 = (1, 2).  Optimum 1."""
    return Instance([Task(1, 2, 1), Task(2, 1, 2)]), Platform(1, 1)


def fix3() -> tuple[Instance, Platform]:
    """Two CPUs, two GPUs; three tasks with equal times on both sides
    {1, 1, 2}.  On the two CPUs alone the optimum is 2."""
    return Instance([Task(1, 1, 1), Task(2, 1, 1), Task(3, 2, 2)]), Platform(2, 2)


def fix4() -> tuple[Instance, Platform]:
    """Four CPUs, one GPU; a single task (4, 1.1).  Optimum 1.1."""
    return Instance([Task(1, 4, 1.1)]), Platform(4, 1)
