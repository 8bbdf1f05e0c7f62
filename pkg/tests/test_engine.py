import itertools

import numpy as np
import pytest

from hybridsched.engine import (
    InstanceFeed,
    MachineState,
    eft_insertion_place,
    list_schedule,
    lpt_order,
    online_simulate,
    spoliate,
)
from hybridsched.gen import TwoTaskAdversaryFeed
from hybridsched.indep_online import EctPolicy
from hybridsched.model import Assignment, Instance, Platform, Task, validate
from hybridsched.oracle import _pcmax, optimal_makespan

from conftest import assert_valid, random_independent


def all_cpu(instance):
    return Assignment({t.id: 1 for t in instance.tasks})


# --- list_schedule ----------------------------------------------------------


def test_list_schedule_fix1(f1):
    instance, platform = f1
    sched = list_schedule(instance, platform, Assignment({1: 0, 2: 1}), [1, 2])
    assert_valid(sched, instance, platform)
    assert sched.makespan() == 1.0


def test_list_schedule_fix3_id_order(f3):
    instance, platform = f3
    sched = list_schedule(instance, platform, all_cpu(instance), [1, 2, 3])
    assert sched.makespan() == 3.0  # 1 and 1 in parallel, then 2


def test_list_schedule_fix3_lpt_order(f3):
    instance, platform = f3
    sched = list_schedule(instance, platform, all_cpu(instance), [3, 1, 2])
    assert sched.makespan() == 2.0


def test_list_schedule_respects_precedence():
    inst = Instance([Task(1, 2, 2), Task(2, 1, 1), Task(3, 1, 1)], [(1, 3)])
    platform = Platform(2, 1)
    sched = list_schedule(inst, platform, all_cpu(inst), [1, 2, 3])
    assert_valid(sched, inst, platform)
    assert sched.placements[3].start >= 2.0


def test_list_schedule_is_work_conserving():
    # no processor of a type idles while a ready task of that type waits
    rng = np.random.default_rng(11)
    for _ in range(30):
        inst = random_independent(rng, int(rng.integers(1, 12)))
        platform = Platform(int(rng.integers(1, 4)), int(rng.integers(1, 3)))
        x = {t.id: int(rng.integers(0, 2)) for t in inst.tasks}
        order = [t.id for t in inst.tasks]
        sched = list_schedule(inst, platform, Assignment(x), order)
        assert_valid(sched, inst, platform)
        for side, procs in (("cpu", platform.cpus()), ("gpu", platform.gpus())):
            side_tasks = [tid for tid in x if (x[tid] == 1) == (side == "cpu")]
            if not side_tasks:
                continue
            # every processor of the side is busy from 0 up to each start
            for tid in side_tasks:
                start = sched.placements[tid].start
                for p in procs:
                    busy = sorted(
                        (pl.start, pl.end)
                        for t2, pl in sched.placements.items()
                        if pl.proc == p
                    )
                    covered = 0.0
                    for s, e in busy:
                        if s > covered + 1e-9:
                            break
                        covered = max(covered, e)
                    assert covered >= start - 1e-9


# --- lpt_order --------------------------------------------------------------


def test_lpt_order_fix3(f3):
    instance, _ = f3
    assert lpt_order(instance.tasks, "cpu") == [3, 1, 2]


def test_lpt_order_fix1_cpu(f1):
    instance, _ = f1
    assert lpt_order(instance.tasks, "cpu") == [1, 2]


def test_lpt_order_empty():
    assert lpt_order([], "gpu") == []


# --- eft_insertion_place ----------------------------------------------------


def test_eft_insertion_prefers_faster_side(f4):
    instance, platform = f4
    ms = MachineState(platform)
    proc, start = eft_insertion_place(instance.task(1), instance, platform, ms)
    assert (proc, start) == (4, 0.0)


def test_eft_insertion_tie_lowest_index():
    # one CPU busy until 1; the second task finishes at 2 on both sides
    inst = Instance([Task(1, 1, 1), Task(2, 1, 2)])
    platform = Platform(1, 1)
    ms = MachineState(platform)
    ms.start_task(inst.task(1), 0, 0.0)
    proc, start = eft_insertion_place(inst.task(2), inst, platform, ms)
    assert (proc, start) == (0, 1.0)


def test_eft_insertion_fills_gap():
    inst = Instance([Task(1, 1, 1), Task(2, 1, 1), Task(3, 2, 2)])
    platform = Platform(1, 1)
    ms = MachineState(platform)
    ms.start_task(inst.task(1), 0, 0.0)  # [0, 1)
    ms.start_task(inst.task(2), 0, 3.0)  # [3, 4)
    ms.start_task(Task(4, 10, 10), 1, 0.0)  # keep the GPU out of the race
    inst = Instance(inst.tasks + [Task(4, 10, 10)])
    proc, start = eft_insertion_place(inst.task(3), inst, platform, ms)
    assert (proc, start) == (0, 1.0)  # fits exactly into the idle gap


# --- online_simulate --------------------------------------------------------


def test_online_two_task_adversary_forces_two(f1):
    platform = Platform(1, 1)
    feed = TwoTaskAdversaryFeed(platform)
    sched = online_simulate(feed, platform, EctPolicy(platform))
    assert sched.makespan() == 2.0
    instance = feed.instance()
    assert_valid(sched, instance, platform)
    # clairvoyant offline placement reaches 1
    opt, _ = optimal_makespan(instance, platform)
    assert opt == 1.0


def test_online_single_task(f4):
    instance, platform = f4
    sched = online_simulate(instance, platform, EctPolicy(platform))
    assert len(sched.placements) == 1
    assert sched.placements[1].start == 0.0


def test_online_deterministic():
    rng = np.random.default_rng(5)
    inst = random_independent(rng, 15)
    platform = Platform(2, 2)
    a = online_simulate(inst, platform, EctPolicy(platform))
    b = online_simulate(inst, platform, EctPolicy(platform))
    assert a.placements == b.placements


def test_instance_feed_orders_arrivals():
    inst = Instance(
        [Task(1, 1, 1), Task(2, 2, 2), Task(3, 1, 1)], [(1, 3), (2, 3)]
    )
    feed = InstanceFeed(inst)
    first = feed.start()
    assert [a.task.id for a in first] == [1, 2]
    assert feed.on_scheduled(1, 1.0, 0) == []
    out = feed.on_scheduled(2, 2.0, 1)
    assert len(out) == 1 and out[0].task.id == 3 and out[0].ready == 2.0
    assert set(out[0].preds) == {1, 2}


# --- spoliation -------------------------------------------------------------


def test_spoliate_moves_late_task():
    inst = Instance([Task(1, 10, 1)])
    platform = Platform(1, 1)
    ms = MachineState(platform)
    ms.start_task(inst.task(1), 0, 0.0)  # finishes at 10 on the CPU
    moved = spoliate(ms, inst, 1, 2.0)
    assert moved == 1
    assert ms.placements[1].proc == 1
    assert ms.placements[1].start == 2.0 and ms.placements[1].end == 3.0
    assert ms.avail[0] == 2.0  # aborted work occupies the CPU until t


def test_spoliate_requires_strict_improvement():
    inst = Instance([Task(1, 5, 3)])
    platform = Platform(1, 1)
    ms = MachineState(platform)
    ms.start_task(inst.task(1), 0, 0.0)  # ends at 5
    assert spoliate(ms, inst, 1, 2.0) is None  # 2 + 3 == 5, not earlier


def test_spoliate_none_when_idle():
    inst = Instance([Task(1, 1, 1)])
    ms = MachineState(Platform(1, 1))
    assert spoliate(ms, inst, 1, 0.0) is None


def test_spoliate_ignores_future_committed_tasks():
    inst = Instance([Task(1, 10, 1)])
    platform = Platform(1, 1)
    ms = MachineState(platform)
    ms.start_task(inst.task(1), 0, 5.0)  # committed to a future start
    assert spoliate(ms, inst, 1, 2.0) is None


# --- Graham bound on the homogeneous sub-case -------------------------------


def test_graham_bound_small_exhaustive():
    for m in (2, 3):
        platform = Platform(m, 1)
        for n in range(1, 5):
            for durs in itertools.combinations_with_replacement((1.0, 2.0, 3.0), n):
                inst = Instance([Task(i + 1, d, d) for i, d in enumerate(durs)])
                opt = _pcmax(tuple(sorted(durs, reverse=True)), m)
                x = all_cpu(inst)
                for order in itertools.permutations(inst.ids()):
                    ms = list_schedule(inst, platform, x, list(order)).makespan()
                    assert ms <= (2 - 1 / m) * opt + 1e-9
