"""Off-line algorithms for independent tasks.

All entry points share the signature ``(instance, platform) -> Schedule``
and refuse instances with precedence edges.  The roster covers the greedy
heuristics (Sorted-ECT, MinMin, CLB2C, HeteroPrio), the load-balancing
pair (BalancedEstimate / BalancedMakespan), LP rounding, and the two
dual-approximation schemes (DualHP and the shelf dynamic program) wrapped
in a binary search on the makespan guess.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import bounds
from .engine import MachineState, find_spoliation_victim, apply_spoliation, list_schedule, lpt_order
from .model import (
    TIME_EPS,
    Assignment,
    Instance,
    Platform,
    Schedule,
    feq,
    fle,
    flt,
)


class InstanceTooLargeError(ValueError):
    """The shelf dynamic program refuses instances beyond desk scale."""


def _require_independent(instance: Instance):
    if instance.has_edges:
        raise ValueError("this algorithm requires independent tasks")


def _lpt_schedule(instance: Instance, platform: Platform, x: dict[int, int]) -> Schedule:
    """LPT list schedule of an allocation: each side ordered by
    nonincreasing processing time, ties ascending id."""
    cpu_tasks = [instance.task(t) for t, v in x.items() if v == 1]
    gpu_tasks = [instance.task(t) for t, v in x.items() if v == 0]
    order = lpt_order(cpu_tasks, "cpu") + lpt_order(gpu_tasks, "gpu")
    return list_schedule(instance, platform, Assignment(x), order)


def _lpt_value(durs: list[float], machines: int) -> float:
    """Makespan of an LPT schedule of the given durations (value only)."""
    if not durs:
        return 0.0
    heap = [0.0] * machines
    for d in sorted(durs, reverse=True):
        t = heapq.heappop(heap)
        heapq.heappush(heap, t + d)
    return max(heap)


# ---------------------------------------------------------------------------
# Greedy heuristics
# ---------------------------------------------------------------------------


def sorted_ect(instance: Instance, platform: Platform) -> Schedule:
    """Earliest completion time, highest average execution time first.
    Equivalent to HEFT when there are no precedence constraints."""
    _require_independent(instance)
    m, k = platform.m, platform.k
    avg = lambda t: (m * t.cpu_time + k * t.gpu_time) / (m + k)
    ms = MachineState(platform)
    for t in sorted(instance.tasks, key=lambda t: (-avg(t), t.id)):
        proc, start = ms.eft_proc(t, 0.0)
        ms.start_task(t, proc, start)
    return ms.to_schedule()


def minmin(instance: Instance, platform: Platform) -> Schedule:
    """Repeatedly place the unscheduled task with the smallest achievable
    completion time over all machines (ties: ascending task id, then
    lowest processor index)."""
    _require_independent(instance)
    ms = MachineState(platform)
    unscheduled = sorted(instance.by_id)
    while unscheduled:
        best = None  # (completion, tid, proc, start)
        for tid in unscheduled:
            t = instance.task(tid)
            for p in range(platform.n_procs):
                end = ms.avail[p] + ms.duration(t, p)
                if (
                    best is None
                    or flt(end, best[0])
                    or (not flt(best[0], end) and (tid, p) < (best[1], best[2]))
                ):
                    best = (end, tid, p, ms.avail[p])
        _, tid, p, start = best
        ms.start_task(instance.task(tid), p, start)
        unscheduled.remove(tid)
    return ms.to_schedule()


def clb2c(instance: Instance, platform: Platform) -> Schedule:
    """Two-pointer load balancing: compare appending the least-accelerated
    remaining task on the soonest CPU against the most-accelerated one on
    the soonest GPU; commit whichever completes earlier."""
    _require_independent(instance)
    order = sorted(instance.tasks, key=lambda t: (t.accel, t.id))
    ms = MachineState(platform)
    lo, hi = 0, len(order) - 1
    while lo <= hi:
        i_cpu = ms.earliest_proc("cpu")
        i_gpu = ms.earliest_proc("gpu")
        t_lo, t_hi = order[lo], order[hi]
        if fle(ms.avail[i_cpu] + t_lo.cpu_time, ms.avail[i_gpu] + t_hi.gpu_time):
            ms.start_task(t_lo, i_cpu, ms.avail[i_cpu])
            lo += 1
        else:
            ms.start_task(t_hi, i_gpu, ms.avail[i_gpu])
            hi -= 1
    return ms.to_schedule()


def round_lp(instance: Instance, platform: Platform) -> Schedule:
    """Solve the relaxed allocation LP and round each fractional
    allocation to the closest integer, then LPT per side."""
    _require_independent(instance)
    if not instance.tasks:
        return Schedule({})
    _, frac = bounds.area_bound_lp(instance, platform, with_solution=True)
    x = {tid: 1 if v >= 0.5 else 0 for tid, v in frac.items()}
    return _lpt_schedule(instance, platform, x)


# ---------------------------------------------------------------------------
# HeteroPrio
# ---------------------------------------------------------------------------


def heteroprio(instance: Instance, platform: Platform) -> Schedule:
    """Greedy two-ended list scheduling with spoliation.

    Tasks are sorted by nondecreasing acceleration factor; idle CPUs pop
    from the head (least accelerated), idle GPUs from the tail.  Once the
    list is empty an idle resource may steal the running task of the other
    type with the highest finish time, provided restarting it now finishes
    strictly earlier; the aborted work is discarded.  A resource with no
    possible action simply waits: actions are processed globally in
    (time, processor index) order.
    """
    _require_independent(instance)
    order = sorted(instance.tasks, key=lambda t: (t.accel, t.id))
    ms = MachineState(platform)
    head, tail = 0, len(order) - 1
    while True:
        best = None  # (time, proc, kind)
        for p in range(platform.n_procs):
            t = ms.avail[p]
            if head <= tail:
                cand = (t, p, "pop")
            else:
                victim = find_spoliation_victim(ms, instance, p, t)
                if victim is None:
                    continue
                cand = (t, p, "spoliate")
            if best is None or cand[:2] < best[:2]:
                best = cand
        if best is None:
            break
        t, p, kind = best
        if kind == "pop":
            if platform.is_cpu(p):
                task = order[head]
                head += 1
            else:
                task = order[tail]
                tail -= 1
            ms.start_task(task, p, t)
        else:
            victim = find_spoliation_victim(ms, instance, p, t)
            apply_spoliation(ms, instance, victim, p, t)
    return ms.to_schedule()


# ---------------------------------------------------------------------------
# BalancedEstimate / BalancedMakespan
# ---------------------------------------------------------------------------


def _balanced_walk(
    ids: list[int],
    pa: dict[int, float],
    pb: dict[int, float],
    na: int,
    nb: int,
    x0: dict[int, int],
    score: Callable[[dict[int, int]], float],
):
    """Shared allocation walk over abstract sides A (the less loaded role)
    and B.  Starting from the favorite allocation, tasks move one by one
    from B to A in nondecreasing A/B time ratio; the best-scoring
    allocation and the allocation captured just before the load inversion
    are returned."""
    accel = {i: pa[i] / pb[i] for i in ids}
    x = dict(x0)
    wa = sum(pa[i] for i in ids if x[i] == 1)
    wb = sum(pb[i] for i in ids if x[i] == 0)

    def est(cur_wa, cur_wb, cur_x):
        ma = max((pa[i] for i in ids if cur_x[i] == 1), default=0.0)
        mb = max((pb[i] for i in ids if cur_x[i] == 0), default=0.0)
        return max(cur_wa / na, cur_wb / nb, ma, mb)

    def jmax(cur_x):
        best = None
        for i in ids:
            if cur_x[i] == 1 and accel[i] > 1:
                if best is None or (pa[i], -i) > (pa[best], -best):
                    best = i
        return best

    x_best = dict(x)
    best_score = score(x)
    x_inv: Optional[dict[int, int]] = None

    order = sorted(ids, key=lambda i: (accel[i], i))
    start_pos = next((p for p, i in enumerate(order) if x[i] == 0), None)
    if start_pos is not None:
        for pos in range(start_pos, len(order)):
            j = order[pos]
            if fle(wa / na, wb / nb) and flt((wb - pb[j]) / nb, (wa + pa[j]) / na):
                x_inv = dict(x)
            assert x[j] == 0
            x[j] = 1
            wa += pa[j]
            wb -= pb[j]
            s = score(x)
            if s < best_score - TIME_EPS:
                x_best, best_score = dict(x), s
            jm = jmax(x)
            if jm is not None and feq(est(wa, wb, x), pa[jm]):
                x[jm] = 0
                wa -= pa[jm]
                wb += pb[jm]
                s = score(x)
                if s < best_score - TIME_EPS:
                    x_best, best_score = dict(x), s
    if x_inv is None:
        x_inv = dict(x)
    return x_best, x_inv


def _balanced_sides(instance: Instance, platform: Platform):
    """Favorite-side initial allocation, with processor roles swapped when
    the CPU side starts more loaded than the GPU side."""
    tasks = instance.tasks
    x = {t.id: 1 if t.accel < 1 else 0 for t in tasks}
    cpu_load = sum(t.cpu_time for t in tasks if x[t.id] == 1)
    gpu_load = sum(t.gpu_time for t in tasks if x[t.id] == 0)
    swapped = cpu_load / platform.m > gpu_load / platform.k
    if swapped:
        pa = {t.id: t.gpu_time for t in tasks}
        pb = {t.id: t.cpu_time for t in tasks}
        na, nb = platform.k, platform.m
        x0 = {tid: 1 - v for tid, v in x.items()}
    else:
        pa = {t.id: t.cpu_time for t in tasks}
        pb = {t.id: t.gpu_time for t in tasks}
        na, nb = platform.m, platform.k
        x0 = x
    return pa, pb, na, nb, x0, swapped


def _to_real(x: dict[int, int], swapped: bool) -> dict[int, int]:
    return {tid: 1 - v for tid, v in x.items()} if swapped else dict(x)


def balanced_allocation(instance: Instance, platform: Platform) -> tuple[Assignment, Assignment]:
    """Allocation phase shared by the balanced schedulers: returns the
    best-estimate allocation and the inversion-point allocation, both over
    the real CPU/GPU sides."""
    _require_independent(instance)
    if not instance.tasks:
        raise ValueError("balanced allocation needs at least one task")
    pa, pb, na, nb, x0, swapped = _balanced_sides(instance, platform)
    ids = [t.id for t in instance.tasks]

    def est_score(x):
        wa = sum(pa[i] for i in ids if x[i] == 1)
        wb = sum(pb[i] for i in ids if x[i] == 0)
        ma = max((pa[i] for i in ids if x[i] == 1), default=0.0)
        mb = max((pb[i] for i in ids if x[i] == 0), default=0.0)
        return max(wa / na, wb / nb, ma, mb)

    x_best, x_inv = _balanced_walk(ids, pa, pb, na, nb, x0, est_score)
    return Assignment(_to_real(x_best, swapped)), Assignment(_to_real(x_inv, swapped))


def balanced_estimate(instance: Instance, platform: Platform) -> Schedule:
    """LPT schedules of both captured allocations; the better one wins."""
    x_best, x_inv = balanced_allocation(instance, platform)
    s_best = _lpt_schedule(instance, platform, dict(x_best.x))
    s_inv = _lpt_schedule(instance, platform, dict(x_inv.x))
    return s_best if fle(s_best.makespan(), s_inv.makespan()) else s_inv


def balanced_makespan(instance: Instance, platform: Platform) -> Schedule:
    """Same walk as :func:`balanced_allocation` but selecting on the true
    LPT makespan of every visited allocation (before and after each
    dominating-task rollback)."""
    _require_independent(instance)
    if not instance.tasks:
        raise ValueError("balanced makespan needs at least one task")
    pa, pb, na, nb, x0, swapped = _balanced_sides(instance, platform)
    ids = [t.id for t in instance.tasks]

    def lpt_score(x):
        da = [pa[i] for i in ids if x[i] == 1]
        db = [pb[i] for i in ids if x[i] == 0]
        return max(_lpt_value(da, na), _lpt_value(db, nb))

    x_best, _ = _balanced_walk(ids, pa, pb, na, nb, x0, lpt_score)
    return _lpt_schedule(instance, platform, _to_real(x_best, swapped))


# ---------------------------------------------------------------------------
# Dual approximation: binary search driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualSearchConfig:
    b_min: float
    b_max: float
    eps: float = 1e-3

    def __post_init__(self):
        if self.b_min > self.b_max + TIME_EPS:
            raise ValueError("b_min must not exceed b_max")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def dual_search(
    try_guess: Callable[[float], Optional[Schedule]], config: DualSearchConfig
) -> Schedule:
    """Binary search on the makespan guess.  ``try_guess`` either builds a
    schedule for the guess or reports it unfeasible, in which case the
    guess is below the inner algorithm's reach.  Returns the schedule of
    the smallest feasible guess found; the number of iterations is at most
    ceil(log2((b_max - b_min) / (eps * b_min)))."""
    lo, hi = config.b_min, config.b_max
    best = try_guess(hi)
    assert best is not None, "the upper bound must come from a real schedule"
    while hi - lo > config.eps * config.b_min:
        mid = 0.5 * (lo + hi)
        sched = try_guess(mid)
        if sched is None:
            lo = mid
        else:
            hi, best = mid, sched
    return best


def _default_config(instance: Instance, platform: Platform, eps: float) -> DualSearchConfig:
    b_min = max(bounds.trivial_bound(instance), bounds.area_bound_closed_form(instance, platform))
    b_max = sorted_ect(instance, platform).makespan()
    return DualSearchConfig(b_min, max(b_min, b_max), eps)


# ---------------------------------------------------------------------------
# DualHP
# ---------------------------------------------------------------------------


def dualhp_guess(instance: Instance, platform: Platform, guess: float) -> Optional[Schedule]:
    """One dual-approximation round: force tasks that only fit on one side,
    fill GPUs greedily up to k*guess, then verify the load caps.  Returns
    None on an unfeasible guess, otherwise a per-side list schedule whose
    makespan is at most twice the guess."""
    _require_independent(instance)
    m, k = platform.m, platform.k
    order = sorted(instance.tasks, key=lambda t: (-t.accel, t.id))
    x: dict[int, int] = {}
    w_cpu = w_gpu = 0.0
    rest = []
    for t in order:
        if flt(guess, t.cpu_time):
            if flt(guess, t.gpu_time):
                return None  # fits on neither side
            x[t.id] = 0
            w_gpu += t.gpu_time
        elif flt(guess, t.gpu_time):
            x[t.id] = 1
            w_cpu += t.cpu_time
        else:
            rest.append(t)
    for t in rest:
        if flt(w_gpu, k * guess):
            x[t.id] = 0
            w_gpu += t.gpu_time
        else:
            x[t.id] = 1
            w_cpu += t.cpu_time
    if flt(m * guess, w_cpu) or flt((k + 1) * guess, w_gpu):
        return None
    return list_schedule(instance, platform, Assignment(x), [t.id for t in order])


def dualhp(instance: Instance, platform: Platform, eps: float = 1e-3) -> Schedule:
    _require_independent(instance)
    if not instance.tasks:
        return Schedule({})
    cfg = _default_config(instance, platform, eps)
    return dual_search(lambda lam: dualhp_guess(instance, platform, lam), cfg)


# ---------------------------------------------------------------------------
# Shelf dynamic program (dual approximation ratio 3/2 + 1/(2k))
# ---------------------------------------------------------------------------


def _dp32_guess(instance: Instance, platform: Platform, guess: float) -> Optional[Schedule]:
    """Shelf assignment via dynamic programming.

    State: (CPUs holding a long task, GPUs holding a long task, busy GPU
    time in units of guess/(2n)); value: minimal CPU load.  The GPU budget
    carries n extra units because each task's GPU time is rounded up to a
    whole interval, which is where the +1/(2k) in the ratio comes from.
    The guess is feasible when some state keeps the CPU load within
    m*guess.
    """
    m, k = platform.m, platform.k
    tasks = sorted(instance.tasks, key=lambda t: t.id)
    n = len(tasks)
    delta = guess / (2 * n)
    budget = 2 * n * k + n
    inf = float("inf")

    value = np.full((m + 1, k + 1, budget + 1), inf)
    value[0, 0, 0] = 0.0
    take_cpu = np.zeros((n, m + 1, k + 1, budget + 1), dtype=bool)

    for i, t in enumerate(tasks):
        cpu_ok = fle(t.cpu_time, guess)
        gpu_ok = fle(t.gpu_time, guess)
        if not cpu_ok and not gpu_ok:
            return None
        cpu_val = np.full_like(value, inf)
        if cpu_ok:
            if t.cpu_time > guess / 2 + TIME_EPS:
                cpu_val[1:, :, :] = value[:-1, :, :] + t.cpu_time
            else:
                cpu_val = value + t.cpu_time
        gpu_val = np.full_like(value, inf)
        if gpu_ok:
            q = max(1, math.ceil(t.gpu_time / delta - 1e-12))
            if q <= budget:
                if t.gpu_time > guess / 2 + TIME_EPS:
                    gpu_val[:, 1:, q:] = value[:, :-1, : budget + 1 - q]
                else:
                    gpu_val[:, :, q:] = value[:, :, : budget + 1 - q]
        take_cpu[i] = cpu_val < gpu_val
        value = np.minimum(cpu_val, gpu_val)

    feasible = value <= m * guess + TIME_EPS
    if not feasible.any():
        return None
    mu, kap, g = map(int, np.argwhere(feasible)[0])

    # Backtrack the assignment.
    x: dict[int, int] = {}
    for i in range(n - 1, -1, -1):
        t = tasks[i]
        if take_cpu[i][mu, kap, g]:
            x[t.id] = 1
            if t.cpu_time > guess / 2 + TIME_EPS:
                mu -= 1
        else:
            x[t.id] = 0
            q = max(1, math.ceil(t.gpu_time / delta - 1e-12))
            g -= q
            if t.gpu_time > guess / 2 + TIME_EPS:
                kap -= 1

    # Shelf construction: long tasks one per processor from time 0, short
    # tasks list-scheduled after them in LPT order.
    ms = MachineState(platform)
    for side, kind, base, count in (("cpu", 1, 0, m), ("gpu", 0, m, k)):
        dur = (lambda t: t.cpu_time) if kind == 1 else (lambda t: t.gpu_time)
        mine = [t for t in tasks if x[t.id] == kind]
        long = sorted((t for t in mine if dur(t) > guess / 2 + TIME_EPS), key=lambda t: t.id)
        short = sorted((t for t in mine if dur(t) <= guess / 2 + TIME_EPS), key=lambda t: (-dur(t), t.id))
        assert len(long) <= count
        heap = []
        for idx in range(count):
            if idx < len(long):
                end = ms.start_task(long[idx], base + idx, 0.0)
                heapq.heappush(heap, (end, base + idx))
            else:
                heapq.heappush(heap, (0.0, base + idx))
        for t in short:
            avail, p = heapq.heappop(heap)
            end = ms.start_task(t, p, avail)
            heapq.heappush(heap, (end, p))
    return ms.to_schedule()


def dp32(instance: Instance, platform: Platform, eps: float = 1e-3) -> Schedule:
    """Dual-approximation shelf scheduler, exact dynamic program inside a
    binary search.  Refuses instances whose DP state space exceeds desk
    scale."""
    _require_independent(instance)
    if not instance.tasks:
        return Schedule({})
    n, m, k = instance.n, platform.m, platform.k
    if n * n * k * m > 10**8:
        raise InstanceTooLargeError("instance too large for DP")
    cells = n * (m + 1) * (k + 1) * (2 * n * k + n + 1)
    if cells > 4 * 10**8:
        raise InstanceTooLargeError("instance too large for DP")
    cfg = _default_config(instance, platform, eps)
    return dual_search(lambda lam: _dp32_guess(instance, platform, lam), cfg)
