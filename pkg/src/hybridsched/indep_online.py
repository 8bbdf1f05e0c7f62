"""On-line policies for independent tasks.

Each policy implements ``place(arrival, machines) -> processor`` and is
consumed by :func:`hybridsched.engine.online_simulate`.  Decisions depend
only on the arriving task, the machine state and the policy's own state:
nothing about future arrivals is visible.
"""

from __future__ import annotations

from .engine import Arrival, MachineState
from .model import Platform, fle


class EctPolicy:
    """Earliest completion time over all processors (also known as PG or
    EFT).  Ties go to the lowest processor index."""

    def __init__(self, platform: Platform):
        self.platform = platform

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        proc, _ = machines.eft_proc(arrival.task, arrival.ready)
        return proc


class LgPolicy:
    """Load greedy: pick the type minimizing processing time over the
    number of processors of that type, then its earliest idle processor."""

    def __init__(self, platform: Platform):
        self.platform = platform

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        t = arrival.task
        if fle(t.gpu_time / self.platform.k, t.cpu_time / self.platform.m):
            return machines.earliest_proc("gpu")
        return machines.earliest_proc("cpu")


class MgPolicy:
    """Load greedy with a guard for large tasks: a task also goes to the
    GPUs when its CPU time exceeds a lower bound on the makespan of the
    set R of tasks routed this way (cached max and sum over R keep the
    decision O(1))."""

    def __init__(self, platform: Platform):
        self.platform = platform
        self.routed_max = 0.0
        self.routed_sum = 0.0

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        t = arrival.task
        m, k = self.platform.m, self.platform.k
        if fle(t.gpu_time / k, t.cpu_time / m):
            return machines.earliest_proc("gpu")
        new_max = max(self.routed_max, t.gpu_time)
        new_sum = self.routed_sum + t.gpu_time
        if fle(max(new_max, new_sum / k), t.cpu_time):
            self.routed_max, self.routed_sum = new_max, new_sum
            return machines.earliest_proc("gpu")
        return machines.earliest_proc("cpu")


class Al4Policy:
    """Two-rule 4-competitive policy: a task goes to the GPUs when its CPU
    time already exceeds finishing it on the next idle GPU; otherwise the
    load-greedy rule decides."""

    def __init__(self, platform: Platform):
        self.platform = platform

    def place(self, arrival: Arrival, machines: MachineState) -> int:
        t = arrival.task
        tau = machines.gpu_earliest_idle()
        if fle(tau + t.gpu_time, t.cpu_time):
            return machines.earliest_proc("gpu")
        if fle(t.cpu_time / self.platform.m, t.gpu_time / self.platform.k):
            return machines.earliest_proc("cpu")
        return machines.earliest_proc("gpu")
