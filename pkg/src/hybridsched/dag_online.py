"""On-line policies for tasks revealed at readiness in a DAG.

Earliest completion time carries over unchanged from the independent
setting; the square-root threshold policies trade placement quality on
easy instances for a competitive ratio that scales with sqrt(m/k).
"""

from __future__ import annotations

import math

from .engine import Arrival, InstanceFeed, MachineState, online_simulate
from .indep_online import EctPolicy
from .model import Instance, Platform, Task, fle


class ErlsPolicy:
    """Rule 1 sends a task to the GPUs when its CPU time already exceeds
    finishing it on the next idle GPU; otherwise the square-root load rule
    decides the type.  4*sqrt(m/k)-competitive."""

    def __init__(self, platform: Platform):
        self.platform = platform
        self._sm = math.sqrt(platform.m)
        self._sk = math.sqrt(platform.k)

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        t = arrival.task
        tau = machines.gpu_earliest_idle()
        if fle(tau + t.gpu_time, t.cpu_time):
            return machines.earliest_proc("gpu")
        if fle(t.cpu_time / self._sm, t.gpu_time / self._sk):
            return machines.earliest_proc("cpu")
        return machines.earliest_proc("gpu")


class QaPolicy:
    """Single-rule allocation: CPU side iff the acceleration factor is at
    most sqrt(m/k).  Placement depends only on the factor and the platform
    shape, so schedules scale linearly with the durations."""

    def __init__(self, platform: Platform):
        self.platform = platform
        self._threshold = math.sqrt(platform.m / platform.k)

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        if fle(arrival.task.accel, self._threshold):
            return machines.earliest_proc("cpu")
        return machines.earliest_proc("gpu")


class MixedPolicy:
    """Start as earliest-completion-time; once the realized makespan would
    exceed gamma times what the square-root policy would have achieved on
    the whole revealed prefix, switch to that policy for good.

    The prefix makespan is measured by re-simulating the square-root
    policy from time zero over the revealed tasks and edges.
    """

    def __init__(self, platform: Platform, gamma: float = 1.0):
        self.platform = platform
        self.gamma = gamma
        self.stay_ect = True
        self._tasks: list[Task] = []
        self._edges: list[tuple[int, int]] = []
        self._seen: set[int] = set()

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        self._tasks.append(arrival.task)
        self._seen.add(arrival.task.id)
        for p in arrival.preds:
            if p in self._seen:
                self._edges.append((p, arrival.task.id))
        if self.stay_ect:
            proc, start = machines.eft_proc(arrival.task, arrival.ready)
            end = start + machines.duration(arrival.task, proc)
            realized = max((pl.end for pl in machines.placements.values()), default=0.0)
            c_ect = max(realized, end)
            prefix = Instance(self._tasks, self._edges)
            c_qa = online_simulate(prefix, self.platform, QaPolicy(self.platform)).makespan()
            self.stay_ect = c_ect <= self.gamma * c_qa + 1e-9
            if self.stay_ect:
                return proc
        if fle(arrival.task.accel, math.sqrt(self.platform.m / self.platform.k)):
            return machines.earliest_proc("cpu")
        return machines.earliest_proc("gpu")


__all__ = ["EctPolicy", "ErlsPolicy", "QaPolicy", "MixedPolicy"]
