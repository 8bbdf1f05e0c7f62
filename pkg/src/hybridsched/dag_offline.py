"""Off-line algorithms for precedence-constrained tasks: HEFT, an ECT
variant driven by graph distance, HeteroPrio extended to DAGs, and the
LP-rounding list scheduler in its EST and rank-ordered flavors, each with
optional spoliation."""

from __future__ import annotations

from typing import Optional

from . import bounds
from .engine import (
    MachineState,
    apply_spoliation,
    eft_insertion_place,
    find_spoliation_victim,
)
from .model import (
    TIME_EPS,
    Instance,
    Platform,
    Schedule,
    flt,
    topological_order,
)


def rank_table(instance: Instance, platform: Platform) -> dict[int, float]:
    """Upward ranks: average processing cost plus the maximum successor
    rank (communication costs are negligible in this model and enter as
    zero).  Decreasing rank is a topological order."""
    m, k = platform.m, platform.k
    w = {
        t.id: (m * t.cpu_time + k * t.gpu_time) / (m + k) for t in instance.tasks
    }
    rank: dict[int, float] = {}
    for tid in reversed(topological_order(instance)):
        rank[tid] = w[tid] + max((rank[s] for s in instance.succs[tid]), default=0.0)
    return rank


def bottom_level_hops(instance: Instance) -> dict[int, int]:
    """Longest path to any descendant counted in edges (0 for sinks)."""
    hops: dict[int, int] = {}
    for tid in reversed(topological_order(instance)):
        hops[tid] = max((1 + hops[s] for s in instance.succs[tid]), default=0)
    return hops


def heft(instance: Instance, platform: Platform) -> Schedule:
    """Decreasing upward rank, insertion-based earliest finish placement
    over all processors."""
    ranks = rank_table(instance, platform)
    ms = MachineState(platform)
    for tid in sorted(instance.by_id, key=lambda t: (-ranks[t], t)):
        task = instance.task(tid)
        proc, start = eft_insertion_place(task, instance, platform, ms)
        ms.start_task(task, proc, start)
    return ms.to_schedule()


def offline_ect(instance: Instance, platform: Platform) -> Schedule:
    """Ready tasks processed by decreasing hop distance to their furthest
    descendant, each placed at its earliest completion (no insertion)."""
    prio = bottom_level_hops(instance)
    ms = MachineState(platform)
    left = {tid: len(instance.preds[tid]) for tid in instance.by_id}
    ready = sorted(
        (tid for tid in instance.by_id if left[tid] == 0),
        key=lambda t: (-prio[t], t),
    )
    while ready:
        tid = ready.pop(0)
        task = instance.task(tid)
        rt = max((ms.placements[p].end for p in instance.preds[tid]), default=0.0)
        proc, start = ms.eft_proc(task, rt)
        ms.start_task(task, proc, start)
        for s in instance.succs[tid]:
            left[s] -= 1
            if left[s] == 0:
                ready.append(s)
        ready.sort(key=lambda t: (-prio[t], t))
    return ms.to_schedule()


def heteroprio_dag(instance: Instance, platform: Platform) -> Schedule:
    """Event-driven HeteroPrio over the ready pool.

    Idle CPUs take the least accelerated ready task, idle GPUs the most
    accelerated one; ties go to the higher upward rank, then the lower id.
    A GPU that is idle with an empty pool may steal a running CPU task it
    can finish strictly earlier, preferring the highest-rank candidate.
    """
    ranks = rank_table(instance, platform)
    ms = MachineState(platform)
    ms.rank = ranks  # consumed by the rank-keyed spoliation victim rule
    unscheduled = set(instance.by_id)

    def ready_info(tid: int) -> Optional[float]:
        rt = 0.0
        for p in instance.preds[tid]:
            if p not in ms.placements:
                return None
            rt = max(rt, ms.placements[p].end)
        return rt

    while True:
        ready = {tid: rt for tid in unscheduled if (rt := ready_info(tid)) is not None}
        if unscheduled and not ready:
            raise AssertionError("stalled event loop")
        best = None  # (time, proc, is_spoliation, task or victim)
        for p in range(platform.n_procs):
            t0 = ms.avail[p]
            is_cpu = platform.is_cpu(p)
            pool_now = [tid for tid, rt in ready.items() if rt <= t0 + TIME_EPS]
            cand = None
            if pool_now:
                key = (
                    (lambda t: (instance.task(t).accel, -ranks[t], t))
                    if is_cpu
                    else (lambda t: (-instance.task(t).accel, -ranks[t], t))
                )
                tid = min(pool_now, key=key)
                cand = (t0, p, 0, tid)
            elif not is_cpu and (
                victim := find_spoliation_victim(ms, instance, p, t0, key="rank", from_kind="cpu")
            ) is not None:
                cand = (t0, p, 1, victim)
            elif ready:
                t_pop = max(t0, min(ready.values()))
                cand = _future_pop(instance, ranks, ready, p, t_pop, is_cpu)
            if cand is not None and (best is None or cand[:3] < best[:3]):
                best = cand
        if best is None:
            break  # nothing left to start and no spoliation improves
        t, p, spol, tid = best
        if spol:
            apply_spoliation(ms, instance, tid, p, t)
        else:
            ms.start_task(instance.task(tid), p, max(t, ready[tid]))
            unscheduled.discard(tid)
    return ms.to_schedule()


def _future_pop(instance, ranks, ready, p, t_pop, is_cpu):
    pool = [tid for tid, rt in ready.items() if rt <= t_pop + TIME_EPS]
    key = (
        (lambda t: (instance.task(t).accel, -ranks[t], t))
        if is_cpu
        else (lambda t: (-instance.task(t).accel, -ranks[t], t))
    )
    tid = min(pool, key=key)
    return (t_pop, p, 0, tid)


def hlp(
    instance: Instance,
    platform: Platform,
    order_policy: str = "est",
    spoliation: bool = False,
) -> Schedule:
    """LP rounding followed by type-constrained list scheduling.

    The fractional allocation of the precedence LP is rounded at 1/2
    (toward the CPU side) and fixes each task's processor type.  The list
    phase then runs event-driven per type: under "est" an idle processor
    takes the ready task with the earliest achievable start (ties by
    higher rank, then id), under "ols" tasks are released strictly in
    decreasing-rank order per type.  With spoliation enabled, an idle GPU
    with no startable GPU task may steal a running CPU task it finishes
    strictly earlier (highest finish time first).
    """
    if order_policy not in ("est", "ols"):
        raise ValueError(f"unknown order policy {order_policy!r}")
    if not instance.tasks:
        return Schedule({})
    _, frac_x, _ = bounds.lp_prec_bound(instance, platform)
    x = {tid: 1 if frac_x[tid] >= 0.5 else 0 for tid in frac_x}
    ranks = rank_table(instance, platform)

    side_order = {
        1: sorted((t for t, v in x.items() if v == 1), key=lambda t: (-ranks[t], t)),
        0: sorted((t for t, v in x.items() if v == 0), key=lambda t: (-ranks[t], t)),
    }
    ms = MachineState(platform)
    unscheduled = set(instance.by_id)

    def ready_info(tid: int) -> Optional[float]:
        rt = 0.0
        for p in instance.preds[tid]:
            if p not in ms.placements:
                return None
            rt = max(rt, ms.placements[p].end)
        return rt

    def eligible(side: int) -> list[int]:
        if order_policy == "ols":
            for tid in side_order[side]:
                if tid in unscheduled:
                    return [tid]  # strict rank order per side
            return []
        return [tid for tid in side_order[side] if tid in unscheduled]

    while unscheduled:
        ready = {tid: rt for tid in unscheduled if (rt := ready_info(tid)) is not None}
        best = None  # (time, proc, is_spoliation, tid)
        for p in range(platform.n_procs):
            side = 1 if platform.is_cpu(p) else 0
            t0 = ms.avail[p]
            cands = [tid for tid in eligible(side) if tid in ready]
            cand = None
            if cands:
                tid = min(cands, key=lambda t: (max(t0, ready[t]), -ranks[t], t))
                cand = (max(t0, ready[tid]), p, 0, tid)
            if spoliation and side == 0 and (cand is None or flt(t0, cand[0])):
                victim = find_spoliation_victim(ms, instance, p, t0, key="finish", from_kind="cpu")
                if victim is not None:
                    cand = (t0, p, 1, victim)
            if cand is not None and (best is None or cand[:3] < best[:3]):
                best = cand
        if best is None:
            raise AssertionError("stalled list phase")
        t, p, spol, tid = best
        if spol:
            apply_spoliation(ms, instance, tid, p, t)
        else:
            ms.start_task(instance.task(tid), p, t)
            unscheduled.discard(tid)
    return ms.to_schedule()
