"""Exact optimal-makespan computation for desk-scale instances.

Independent task sets are solved by enumerating all 2^n allocations and
solving each side's identical-machines problem exactly (branch and bound
with memoization).  DAG instances use branch and bound over (task order,
processor) decisions restricted to semi-active schedules, which always
contain an optimum for makespan.  Ground truth for every guarantee test.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .model import Instance, Placement, Platform, Schedule, TIME_EPS
from . import bounds


@dataclass(frozen=True)
class OracleLimits:
    n_max: int = 8
    proc_max: int = 4


class OracleRefusal(ValueError):
    """The instance exceeds the configured exhaustive-search limits."""


@lru_cache(maxsize=200000)
def _pcmax(durs: tuple[float, ...], machines: int) -> float:
    """Exact P||Cmax value for the given duration multiset (sorted
    nonincreasing) on `machines` identical machines."""
    if not durs:
        return 0.0
    if machines == 1:
        return sum(durs)
    lb = max(durs[0], sum(durs) / machines)
    best = [sum(durs)]

    loads = [0.0] * machines

    def rec(i: int):
        if i == len(durs):
            best[0] = min(best[0], max(loads))
            return
        if max(loads) >= best[0] - TIME_EPS:
            return
        d = durs[i]
        seen = set()
        for j in range(machines):
            key = round(loads[j], 12)
            if key in seen:
                continue  # identical loads are interchangeable
            seen.add(key)
            if loads[j] + d >= best[0] - TIME_EPS:
                continue
            loads[j] += d
            rec(i + 1)
            loads[j] -= d
            if best[0] <= lb + TIME_EPS:
                return

    rec(0)
    return max(best[0], lb)


def _pcmax_witness(durs_ids: list[tuple[float, int]], machines: int) -> dict[int, int]:
    """Machine index per task id realizing the exact P||Cmax optimum."""
    durs_ids = sorted(durs_ids, key=lambda p: (-p[0], p[1]))
    target = _pcmax(tuple(d for d, _ in durs_ids), machines)
    loads = [0.0] * machines
    assign: dict[int, int] = {}

    def rec(i: int) -> bool:
        if i == len(durs_ids):
            return max(loads) <= target + 1e-7
        d, tid = durs_ids[i]
        seen = set()
        for j in range(machines):
            key = round(loads[j], 12)
            if key in seen:
                continue
            seen.add(key)
            if loads[j] + d > target + 1e-7:
                continue
            loads[j] += d
            assign[tid] = j
            if rec(i + 1):
                return True
            loads[j] -= d
            del assign[tid]
        return False

    found = rec(0)
    assert found, "witness reconstruction must succeed at the optimum"
    return assign


def _independent_optimum(instance: Instance, platform: Platform) -> tuple[float, Schedule]:
    tasks = instance.tasks
    n = len(tasks)
    m, k = platform.m, platform.k
    lb = bounds.best_bound(instance, platform)
    best_val = float("inf")
    best_mask = 0
    for mask in range(1 << n):
        cpu = tuple(
            sorted((tasks[i].cpu_time for i in range(n) if mask >> i & 1), reverse=True)
        )
        gpu = tuple(
            sorted((tasks[i].gpu_time for i in range(n) if not mask >> i & 1), reverse=True)
        )
        val = max(_pcmax(cpu, m), _pcmax(gpu, k))
        if val < best_val - TIME_EPS:
            best_val, best_mask = val, mask
            if best_val <= lb + TIME_EPS:
                break
    # Rebuild a witness schedule from the best allocation.
    cpu_items = [(tasks[i].cpu_time, tasks[i].id) for i in range(n) if best_mask >> i & 1]
    gpu_items = [(tasks[i].gpu_time, tasks[i].id) for i in range(n) if not best_mask >> i & 1]
    placements: dict[int, Placement] = {}
    for items, machines, base in ((cpu_items, m, 0), (gpu_items, k, m)):
        if not items:
            continue
        assign = _pcmax_witness(items, machines)
        offsets = [0.0] * machines
        for d, tid in sorted(items, key=lambda p: (-p[0], p[1])):
            j = assign[tid]
            placements[tid] = Placement(base + j, offsets[j], offsets[j] + d)
            offsets[j] += d
    return best_val, Schedule(placements)


def _dag_optimum(instance: Instance, platform: Platform) -> tuple[float, Schedule]:
    from .dag_offline import heft

    ids = instance.ids()
    n = len(ids)
    idx = {tid: i for i, tid in enumerate(ids)}
    preds = [list(map(idx.get, instance.preds[tid])) for tid in ids]
    succs = [list(map(idx.get, instance.succs[tid])) for tid in ids]
    cpu = [instance.task(tid).cpu_time for tid in ids]
    gpu = [instance.task(tid).gpu_time for tid in ids]
    P = platform.n_procs
    m = platform.m
    lb = bounds.best_bound(instance, platform)
    ub_sched = heft(instance, platform)
    best = [ub_sched.makespan(), {tid: ub_sched.placements[tid] for tid in ids}]

    # remaining min-duration work, used for a cheap area prune
    min_dur = [min(cpu[i], gpu[i]) for i in range(n)]

    avail = [0.0] * P
    ends = [0.0] * n
    placed: dict[int, Placement] = {}
    left = [len(p) for p in preds]

    def rec(scheduled: int, cmax: float, work: float, rem: float):
        if scheduled == n:
            if cmax < best[0] - TIME_EPS:
                best[0] = cmax
                best[1] = dict(placed)
            return
        if cmax >= best[0] - TIME_EPS:
            return
        if best[0] <= lb + TIME_EPS:
            return
        # area prune: the final makespan is at least total work over P
        if (work + rem) / P >= best[0] - TIME_EPS:
            return
        for i in range(n):
            if left[i] != 0 or ids[i] in placed:
                continue
            ready = max((ends[p] for p in preds[i]), default=0.0)
            tried: set[tuple[bool, float]] = set()
            for proc in range(P):
                is_cpu = proc < m
                key = (is_cpu, round(avail[proc], 12))
                if key in tried:
                    continue  # identical processors of a type
                tried.add(key)
                start = max(ready, avail[proc])
                dur = cpu[i] if is_cpu else gpu[i]
                end = start + dur
                if max(cmax, end) >= best[0] - TIME_EPS:
                    continue
                old_avail = avail[proc]
                avail[proc] = end
                ends[i] = end
                placed[ids[i]] = Placement(proc, start, end)
                for s in succs[i]:
                    left[s] -= 1
                rec(scheduled + 1, max(cmax, end), work + dur, rem - min_dur[i])
                for s in succs[i]:
                    left[s] += 1
                del placed[ids[i]]
                avail[proc] = old_avail
                if best[0] <= lb + TIME_EPS:
                    return

    rec(0, 0.0, 0.0, sum(min_dur))
    return best[0], Schedule(best[1])


def optimal_makespan(
    instance: Instance, platform: Platform, limits: OracleLimits = OracleLimits()
) -> tuple[float, Schedule]:
    """Exact optimum and one witness schedule.  Refuses instances beyond
    the limits (default n <= 8 tasks, m + k <= 4 processors)."""
    if instance.n > limits.n_max:
        raise OracleRefusal(f"{instance.n} tasks exceeds the n_max={limits.n_max} limit")
    if platform.n_procs > limits.proc_max:
        raise OracleRefusal(
            f"{platform.n_procs} processors exceed the proc_max={limits.proc_max} limit"
        )
    if instance.n == 0:
        return 0.0, Schedule({})
    if instance.has_edges:
        return _dag_optimum(instance, platform)
    return _independent_optimum(instance, platform)
