import math

import numpy as np
import pytest

from hybridsched import bounds
from hybridsched.gen import gen_balanced_tightness, balanced_tightness_reference
from hybridsched.indep_offline import (
    DualSearchConfig,
    InstanceTooLargeError,
    _dp32_guess,
    balanced_allocation,
    balanced_estimate,
    balanced_makespan,
    clb2c,
    dp32,
    dual_search,
    dualhp,
    dualhp_guess,
    heteroprio,
    minmin,
    round_lp,
    sorted_ect,
)
from hybridsched.model import Instance, Platform, Task, validate
from hybridsched.oracle import optimal_makespan

from conftest import assert_valid, random_independent


def test_algorithms_refuse_edges():
    inst = Instance([Task(1, 1, 1), Task(2, 1, 1)], [(1, 2)])
    with pytest.raises(ValueError):
        sorted_ect(inst, Platform(1, 1))


# --- dual search ------------------------------------------------------------


def test_dual_search_fix1_dualhp(f1):
    instance, platform = f1
    sched = dualhp(instance, platform)
    assert_valid(sched, instance, platform)
    assert sched.makespan() <= 2 * 1.0 * (1 + 1e-3)  # guarantee vs optimum 1


def test_dual_search_degenerate_single_probe():
    calls = []

    def probe(lam):
        calls.append(lam)
        from hybridsched.model import Schedule, Placement

        return Schedule({1: Placement(0, 0.0, lam)})

    cfg = DualSearchConfig(2.0, 2.0)
    sched = dual_search(probe, cfg)
    assert calls == [2.0]
    assert sched.makespan() == 2.0


def test_dual_search_coarse_eps_still_valid(f1):
    instance, platform = f1
    sched = dualhp(instance, platform, eps=0.5)
    assert_valid(sched, instance, platform)


def test_dual_search_iteration_bound():
    probes = []

    def probe(lam):
        probes.append(lam)
        from hybridsched.model import Schedule, Placement

        return Schedule({1: Placement(0, 0.0, lam)}) if lam >= 5.0 else None

    cfg = DualSearchConfig(1.0, 9.0, eps=1e-3)
    dual_search(probe, cfg)
    assert len(probes) - 1 <= math.ceil(math.log2((9.0 - 1.0) / (1e-3 * 1.0)))


# --- DualHP guess -----------------------------------------------------------


def test_dualhp_guess_fix1_at_one(f1):
    instance, platform = f1
    sched = dualhp_guess(instance, platform, 1.0)
    assert sched is not None
    assert sched.makespan() == pytest.approx(1.0)
    # forced both ways: task 1 only fits on GPU, task 2 only on CPU
    assert sched.placements[1].proc == 1
    assert sched.placements[2].proc == 0


def test_dualhp_guess_fix1_too_small(f1):
    assert dualhp_guess(f1[0], f1[1], 0.4) is None  # task 1 fits on neither side


def test_dualhp_guess_fix4(f4):
    sched = dualhp_guess(f4[0], f4[1], 1.1)
    assert sched is not None and sched.makespan() == pytest.approx(1.1)


def test_dualhp_guess_rejects_overload():
    # both tasks fit individually but the GPU cap (k+1)*guess is exceeded
    inst = Instance([Task(1, 10, 1), Task(2, 10, 1), Task(3, 10, 1)])
    assert dualhp_guess(inst, Platform(1, 1), 1.0) is None


# --- shelf dynamic program ---------------------------------------------------


def test_dp32_guess_fix1(f1):
    sched = _dp32_guess(f1[0], f1[1], 1.0)
    assert sched is not None and sched.makespan() == pytest.approx(1.0)


def test_dp32_fix4(f4):
    sched = dp32(*f4)
    assert sched.makespan() == pytest.approx(1.1)


def test_dp32_three_identical():
    inst = Instance([Task(i, 1, 1) for i in (1, 2, 3)])
    platform = Platform(2, 1)
    opt, _ = optimal_makespan(inst, platform)
    assert opt == pytest.approx(1.0)
    sched = dp32(inst, platform)
    assert_valid(sched, inst, platform)
    assert sched.makespan() <= (1.5 + 1 / 2) * (1 + 1e-3) * opt


def test_dp32_size_guard():
    inst = Instance([Task(i + 1, 1, 1) for i in range(320)])
    with pytest.raises(InstanceTooLargeError):
        dp32(inst, Platform(40, 8))


# --- HeteroPrio --------------------------------------------------------------


def test_heteroprio_fix1(f1):
    sched = heteroprio(*f1)
    assert sched.makespan() == pytest.approx(1.0)
    assert sched.placements[2].proc == 0  # head of the list goes to the CPU
    assert sched.placements[1].proc == 1  # tail to the GPU


def test_heteroprio_fix4_spoliation_path(f4):
    instance, platform = f4
    sched = heteroprio(instance, platform)
    assert sched.makespan() == pytest.approx(1.1)
    assert sched.placements[1].proc == 4  # restarted on the GPU


def test_heteroprio_symmetric_pair():
    inst = Instance([Task(1, 1, 1), Task(2, 1, 1)])
    sched = heteroprio(inst, Platform(1, 1))
    assert sched.makespan() == pytest.approx(1.0)


def test_heteroprio_spoliates_even_after_early_idle():
    # a parked CPU must not stop a later GPU from stealing the monster task
    inst = Instance(
        [
            Task(1, 0.5, 5.0),
            Task(2, 0.5, 5.0),
            Task(3, 50.0, 3.0),
            Task(4, 200.0, 2.0),
        ]
    )
    platform = Platform(2, 1)
    sched = heteroprio(inst, platform)
    assert_valid(sched, inst, platform)
    opt, _ = optimal_makespan(inst, platform)
    assert sched.makespan() <= (2 + math.sqrt(2)) * opt + 1e-9


# --- balanced allocation / estimate / makespan --------------------------------


def test_balanced_allocation_fix1(f1):
    x_best, x_inv = balanced_allocation(*f1)
    assert dict(x_best.x) == {1: 0, 2: 1}
    assert dict(x_inv.x) == {1: 0, 2: 1}


def test_balanced_allocation_switch_engages():
    # everything favors the CPU side, so roles must swap internally
    inst = Instance([Task(1, 1, 2), Task(2, 1, 2)])
    x_best, _ = balanced_allocation(inst, Platform(1, 1))
    assert set(x_best.x.values()) <= {0, 1}  # walk ran without error


def test_balanced_allocation_needs_tasks():
    with pytest.raises(ValueError):
        balanced_allocation(Instance([]), Platform(1, 1))


def test_balanced_estimate_fix1(f1):
    assert balanced_estimate(*f1).makespan() == pytest.approx(1.0)


def test_balanced_estimate_tightness_family():
    instance, platform = gen_balanced_tightness(4, 0.1)
    sched = balanced_estimate(instance, platform)
    assert_valid(sched, instance, platform)
    assert sched.makespan() == pytest.approx(6.0)  # 2m - 2
    ref = balanced_tightness_reference(instance, platform)
    assert_valid(ref, instance, platform)
    assert ref.makespan() == pytest.approx(4.0)  # the optimum is m


def test_balanced_estimate_single_task():
    inst = Instance([Task(1, 3, 2)])
    assert balanced_estimate(inst, Platform(1, 1)).makespan() == pytest.approx(2.0)


def test_balanced_makespan_fix1(f1):
    assert balanced_makespan(*f1).makespan() == pytest.approx(1.0)


def test_balanced_makespan_beats_estimate_on_tightness():
    instance, platform = gen_balanced_tightness(4, 0.1)
    bm = balanced_makespan(instance, platform).makespan()
    assert bm <= 6.0 + 1e-9


def test_balanced_makespan_two_identical():
    inst = Instance([Task(1, 1, 1), Task(2, 1, 1)])
    assert balanced_makespan(inst, Platform(1, 1)).makespan() == pytest.approx(1.0)


def test_balanced_makespan_never_worse_than_estimate():
    rng = np.random.default_rng(31)
    platforms = [Platform(1, 1), Platform(2, 1), Platform(2, 2), Platform(3, 1)]
    for _ in range(60):
        inst = random_independent(rng, int(rng.integers(1, 15)))
        platform = platforms[int(rng.integers(0, 4))]
        bm = balanced_makespan(inst, platform).makespan()
        be = balanced_estimate(inst, platform).makespan()
        assert bm <= be + 1e-9


# --- CLB2C --------------------------------------------------------------------


def test_clb2c_fix1(f1):
    sched = clb2c(*f1)
    assert sched.makespan() == pytest.approx(1.0)
    assert sched.placements[2].proc == 0  # least accelerated first, on CPU
    assert sched.placements[1].proc == 1


def test_clb2c_identical_tasks_balanced_halves():
    for n in (2, 5, 6):
        inst = Instance([Task(i + 1, 1, 1) for i in range(n)])
        sched = clb2c(inst, Platform(1, 1))
        assert sched.makespan() == pytest.approx(math.ceil(n / 2))


def test_clb2c_single_task_picks_faster_side(f4):
    sched = clb2c(*f4)
    assert sched.placements[1].proc == 4
    assert sched.makespan() == pytest.approx(1.1)


# --- Sorted-ECT / MinMin / Round ---------------------------------------------


def test_sorted_ect_examples(f1, f3, f4):
    assert sorted_ect(*f1).makespan() == pytest.approx(1.0)
    assert sorted_ect(*f3).makespan() == pytest.approx(2.0)
    assert sorted_ect(*f4).makespan() == pytest.approx(1.1)


def test_minmin_fix1_tie_by_id(f1):
    sched = minmin(*f1)
    assert sched.makespan() == pytest.approx(1.0)
    assert sched.placements[1].proc == 1  # task 1 wins the tie, goes GPU


def test_minmin_fix4(f4):
    sched = minmin(*f4)
    assert sched.placements[1].proc == 4


def test_minmin_queues_on_fast_side():
    inst = Instance([Task(1, 10, 1), Task(2, 10, 1)])
    sched = minmin(inst, Platform(1, 1))
    assert sched.makespan() == pytest.approx(2.0)
    assert {pl.proc for pl in sched.placements.values()} == {1}


def test_round_fix1(f1):
    sched = round_lp(*f1)
    assert sched.makespan() == pytest.approx(1.0)


def test_round_single_task_valid_either_side():
    inst = Instance([Task(1, 2, 1)])
    platform = Platform(1, 1)
    sched = round_lp(inst, platform)
    assert_valid(sched, inst, platform)
    assert sched.makespan() in (pytest.approx(1.0), pytest.approx(2.0))


def test_round_identical_alpha_one_within_twice_area():
    inst = Instance([Task(i + 1, 1, 1) for i in range(6)])
    platform = Platform(1, 1)
    sched = round_lp(inst, platform)
    assert_valid(sched, inst, platform)
    assert sched.makespan() <= 2 * bounds.area_bound_lp(inst, platform) + 1e-9


# --- determinism ---------------------------------------------------------------


@pytest.mark.parametrize(
    "algo",
    [sorted_ect, minmin, clb2c, heteroprio, balanced_estimate, balanced_makespan, dualhp, round_lp],
)
def test_deterministic(algo):
    rng = np.random.default_rng(17)
    inst = random_independent(rng, 12)
    platform = Platform(3, 2)
    a = algo(inst, platform)
    b = algo(inst, platform)
    assert a.placements == b.placements
