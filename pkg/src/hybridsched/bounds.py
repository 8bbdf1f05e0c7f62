"""Lower bounds on the optimal makespan.

Three bounds are provided: the trivial bound (longest min-side task), the
area bound in both its closed form and its LP form (the two agree, which
the test suite checks), and the precedence-aware LP bound whose fractional
solution also feeds the LP-rounding DAG algorithms.  Experimental results
are normalized by the best applicable bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import lp as lpmod
from .model import Instance, Platform


def trivial_bound(instance: Instance) -> float:
    """No schedule beats the longest task run on its faster side."""
    if not instance.tasks:
        return 0.0
    return max(min(t.cpu_time, t.gpu_time) for t in instance.tasks)


def area_bound_closed_form(instance: Instance, platform: Platform) -> float:
    """Aggregate-work bound via its pivot-task closed form.

    Tasks sorted by nondecreasing acceleration factor are split at the
    pivot task i, the one fractionally shared between the CPU pool (tasks
    before it) and the GPU pool (tasks after it) so both pools finish
    simultaneously.  Precedence edges, if any, are ignored; the value is
    still a valid lower bound.
    """
    tasks = sorted(instance.tasks, key=lambda t: (t.accel, t.id))
    n = len(tasks)
    if n == 0:
        return 0.0
    m, k = platform.m, platform.k
    cpu_prefix = 0.0  # sum of cpu times of tasks strictly before the pivot
    gpu_suffix = sum(t.gpu_time for t in tasks)
    for i, t in enumerate(tasks):
        gpu_after = gpu_suffix - t.gpu_time  # tasks strictly after i
        take = (cpu_prefix + t.cpu_time) / m >= gpu_after / k
        if take or i == n - 1:
            return (
                t.gpu_time * cpu_prefix + t.cpu_time * gpu_after + t.cpu_time * t.gpu_time
            ) / (k * t.cpu_time + m * t.gpu_time)
        cpu_prefix += t.cpu_time
        gpu_suffix = gpu_after
    raise AssertionError("pivot scan cannot fall through")


def build_area_lp(instance: Instance, platform: Platform) -> lpmod.LinearProgram:
    prog = lpmod.LinearProgram("area")
    c = prog.add_var("C", 0.0, None)
    for t in instance.tasks:
        prog.add_var(f"x{t.id}", 0.0, 1.0)
    cpu = {f"x{t.id}": t.cpu_time for t in instance.tasks}
    cpu[c] = -float(platform.m)
    prog.add_constraint("cpu_area", cpu, "<=", 0.0)
    # sum of gpu_j * (1 - x_j) <= k C   rewritten over x
    gpu = {f"x{t.id}": -t.gpu_time for t in instance.tasks}
    gpu[c] = -float(platform.k)
    prog.add_constraint("gpu_area", gpu, "<=", -sum(t.gpu_time for t in instance.tasks))
    prog.set_objective({c: 1.0})
    return prog


def area_bound_lp(
    instance: Instance, platform: Platform, with_solution: bool = False
):
    """Area bound via the relaxed allocation LP.  With ``with_solution``
    the fractional allocation is returned alongside the value."""
    if not instance.tasks:
        return (0.0, {}) if with_solution else 0.0
    sol = lpmod.solve(build_area_lp(instance, platform))
    if not sol.optimal:
        raise RuntimeError(f"area LP ended {sol.status}")
    if with_solution:
        frac = {t.id: sol.values[f"x{t.id}"] for t in instance.tasks}
        return sol.objective, frac
    return sol.objective


def build_prec_lp(instance: Instance, platform: Platform) -> lpmod.LinearProgram:
    prog = lpmod.LinearProgram("prec")
    c = prog.add_var("C", 0.0, None)
    for t in instance.tasks:
        prog.add_var(f"x{t.id}", 0.0, 1.0)
    for t in instance.tasks:
        prog.add_var(f"C{t.id}", 0.0, None)
    cpu = {f"x{t.id}": t.cpu_time for t in instance.tasks}
    cpu[c] = -float(platform.m)
    prog.add_constraint("cpu_area", cpu, "<=", 0.0)
    gpu = {f"x{t.id}": -t.gpu_time for t in instance.tasks}
    gpu[c] = -float(platform.k)
    prog.add_constraint("gpu_area", gpu, "<=", -sum(t.gpu_time for t in instance.tasks))
    for t in instance.tasks:
        # duration on the fractional allocation: gpu + (cpu - gpu) x
        delta = t.cpu_time - t.gpu_time
        if instance.preds[t.id]:
            for p in instance.preds[t.id]:
                prog.add_constraint(
                    f"prec_{p}_{t.id}",
                    {f"C{p}": 1.0, f"x{t.id}": delta, f"C{t.id}": -1.0},
                    "<=",
                    -t.gpu_time,
                )
        else:
            prog.add_constraint(
                f"src_{t.id}",
                {f"x{t.id}": delta, f"C{t.id}": -1.0},
                "<=",
                -t.gpu_time,
            )
        prog.add_constraint(f"cap_{t.id}", {f"C{t.id}": 1.0, c: -1.0}, "<=", 0.0)
    prog.set_objective({c: 1.0})
    return prog


def lp_prec_bound(
    instance: Instance, platform: Platform
) -> tuple[float, dict[int, float], dict[int, float]]:
    """Critical-path-aware LP bound.  Returns the optimum together with the
    fractional allocation and fractional completion times (the rounding
    algorithms consume the allocation)."""
    if not instance.tasks:
        return 0.0, {}, {}
    sol = lpmod.solve(build_prec_lp(instance, platform))
    if not sol.optimal:
        raise RuntimeError(f"precedence LP ended {sol.status}")
    frac_x = {t.id: sol.values[f"x{t.id}"] for t in instance.tasks}
    frac_c = {t.id: sol.values[f"C{t.id}"] for t in instance.tasks}
    return sol.objective, frac_x, frac_c


@dataclass(frozen=True)
class BoundReport:
    trivial: float
    area: float
    lp_prec: Optional[float]  # None for instances without edges
    best: float


def bound_report(instance: Instance, platform: Platform) -> BoundReport:
    """All applicable bounds; ``best`` is their maximum.  The precedence LP
    is only solved when the instance has edges."""
    tb = trivial_bound(instance)
    ab = area_bound_closed_form(instance, platform)
    pb = None
    if instance.has_edges:
        pb, _, _ = lp_prec_bound(instance, platform)
    best = max(tb, ab, pb if pb is not None else 0.0)
    return BoundReport(tb, ab, pb, best)


def best_bound(instance: Instance, platform: Platform) -> float:
    return bound_report(instance, platform).best
