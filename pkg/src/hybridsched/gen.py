"""Instance generators.

Three families: Gamma-distributed random independent tasks, tiled
linear-algebra task graphs (Cholesky, LU, QR with canonical tile-level
dependency patterns), and the adversarial constructions used to realize
worst-case ratios.  Random generation uses numpy's default PCG64 stream,
which is seed-stable across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .engine import Arrival, MachineState, online_simulate
from .model import Instance, Placement, Platform, Schedule, Task


@dataclass(frozen=True)
class RandomSpec:
    n: int
    cpu_mean: float = 15.0
    gpu_mean: float = 1.0
    cpu_cv: float = 0.2
    gpu_cv: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.cpu_mean <= 0 or self.gpu_mean <= 0:
            raise ValueError("means must be positive")
        if self.cpu_cv <= 0 or self.gpu_cv <= 0:
            raise ValueError("coefficients of variation must be positive")


def gen_random(spec: RandomSpec) -> Instance:
    """Independent tasks with Gamma-distributed durations: shape 1/cv^2 and
    scale mean*cv^2 per side, all draws independent.  CPU times are drawn
    first, then GPU times, from a single seeded stream."""
    rng = np.random.default_rng(spec.seed)
    cpu = rng.gamma(1.0 / spec.cpu_cv**2, spec.cpu_mean * spec.cpu_cv**2, spec.n)
    gpu = rng.gamma(1.0 / spec.gpu_cv**2, spec.gpu_mean * spec.gpu_cv**2, spec.n)
    tasks = [
        Task(i + 1, float(max(cpu[i], 1e-12)), float(max(gpu[i], 1e-12)))
        for i in range(spec.n)
    ]
    return Instance(tasks)


# ---------------------------------------------------------------------------
# Tiled linear-algebra task graphs
# ---------------------------------------------------------------------------


def default_kernel_times() -> dict[str, dict[str, tuple[float, float]]]:
    raw = json.loads(resources.files("hybridsched").joinpath("data/kernel_times.json").read_text())
    return {
        app: {kern: (float(c), float(g)) for kern, (c, g) in table.items()}
        for app, table in raw.items()
        if not app.startswith("_")
    }


@dataclass(frozen=True)
class TiledAppSpec:
    app: str  # "cholesky" | "lu" | "qr"
    tiles: int
    kernel_times: Optional[dict[str, tuple[float, float]]] = None

    def __post_init__(self):
        if self.tiles < 1:
            raise ValueError("tile count must be at least 1")


class _GraphBuilder:
    def __init__(self, table: dict[str, tuple[float, float]]):
        self.table = table
        self.tasks: list[Task] = []
        self.edges: list[tuple[int, int]] = []
        self.node: dict[tuple, int] = {}

    def add(self, kernel: str, key: tuple, deps: list[tuple]):
        tid = len(self.tasks) + 1
        c, g = self.table[kernel]
        self.tasks.append(Task(tid, c, g))
        self.node[key] = tid
        for d in deps:
            self.edges.append((self.node[d], tid))


def _cholesky(t: int, b: _GraphBuilder):
    for k in range(t):
        b.add("potrf", ("potrf", k), [("syrk", k, k - 1)] if k else [])
        for i in range(k + 1, t):
            deps = [("potrf", k)]
            if k:
                deps.append(("gemm", i, k, k - 1))
            b.add("trsm", ("trsm", i, k), deps)
        for i in range(k + 1, t):
            deps = [("trsm", i, k)]
            if k:
                deps.append(("syrk", i, k - 1))
            b.add("syrk", ("syrk", i, k), deps)
            for j in range(k + 1, i):
                deps = [("trsm", i, k), ("trsm", j, k)]
                if k:
                    deps.append(("gemm", i, j, k - 1))
                b.add("gemm", ("gemm", i, j, k), deps)


def _lu(t: int, b: _GraphBuilder):
    for k in range(t):
        b.add("getrf", ("getrf", k), [("gemm", k, k, k - 1)] if k else [])
        for j in range(k + 1, t):
            deps = [("getrf", k)]
            if k:
                deps.append(("gemm", k, j, k - 1))
            b.add("trsm", ("trsm_r", k, j), deps)
        for i in range(k + 1, t):
            deps = [("getrf", k)]
            if k:
                deps.append(("gemm", i, k, k - 1))
            b.add("trsm", ("trsm_c", i, k), deps)
        for i in range(k + 1, t):
            for j in range(k + 1, t):
                deps = [("trsm_c", i, k), ("trsm_r", k, j)]
                if k:
                    deps.append(("gemm", i, j, k - 1))
                b.add("gemm", ("gemm", i, j, k), deps)


def _qr(t: int, b: _GraphBuilder):
    for k in range(t):
        b.add("geqrt", ("geqrt", k), [("tsmqr", k, k, k - 1)] if k else [])
        for j in range(k + 1, t):
            deps = [("geqrt", k)]
            if k:
                deps.append(("tsmqr", k, j, k - 1))
            b.add("ormqr", ("ormqr", k, j), deps)
        for i in range(k + 1, t):
            deps = [("tsqrt", i - 1, k) if i > k + 1 else ("geqrt", k)]
            if k:
                deps.append(("tsmqr", i, k, k - 1))
            b.add("tsqrt", ("tsqrt", i, k), deps)
            for j in range(k + 1, t):
                deps = [
                    ("tsqrt", i, k),
                    ("tsmqr", i - 1, j, k) if i > k + 1 else ("ormqr", k, j),
                ]
                if k:
                    deps.append(("tsmqr", i, j, k - 1))
                b.add("tsmqr", ("tsmqr", i, j, k), deps)


_APPS = {"cholesky": _cholesky, "lu": _lu, "qr": _qr}


def tiled_task_count(app: str, tiles: int) -> int:
    """Closed-form task counts of the canonical tile-level graphs."""
    t = tiles
    if app == "cholesky":
        return t + t * (t - 1) + t * (t - 1) * (t - 2) // 6
    if app in ("lu", "qr"):
        return t + t * (t - 1) + (t - 1) * t * (2 * t - 1) // 6
    raise ValueError(f"unknown application {app!r}")


def gen_tiled_dag(spec: TiledAppSpec, with_edges: bool = True) -> Instance:
    """Canonical tiled-factorization task graph.  Task count grows as the
    cube of the tile count.  ``with_edges=False`` strips the dependencies,
    yielding the independent-task variant of the same kernel mix.

    The dependency patterns are the standard tile-level ones (panel
    factorization, panel solves, trailing-matrix updates serialized per
    tile); kernel durations come from the bundled configuration table
    unless the spec overrides them.
    """
    if spec.app not in _APPS:
        raise ValueError(f"unknown application {spec.app!r}")
    table = spec.kernel_times or default_kernel_times()[spec.app]
    b = _GraphBuilder(table)
    _APPS[spec.app](spec.tiles, b)
    assert len(b.tasks) == tiled_task_count(spec.app, spec.tiles)
    return Instance(b.tasks, b.edges if with_edges else [])


# ---------------------------------------------------------------------------
# Adversarial and tightness families
# ---------------------------------------------------------------------------


def gen_pg_adversary(m: int, k: int, eps: float) -> tuple[Instance, Platform]:
    """floor(m/k) rounds, each of k slightly-GPU-favored tasks followed by
    m tasks that are tiny on GPU: earliest-completion placement burns one
    time unit per round while the opposite allocation stays near 1."""
    rounds = m // k
    tasks = []
    nid = 0
    for _ in range(rounds):
        for _ in range(k):
            nid += 1
            tasks.append(Task(nid, 1 + eps, 1.0))
        for _ in range(m):
            nid += 1
            tasks.append(Task(nid, 1.0, eps))
    return Instance(tasks), Platform(m, k)


def pg_adversary_reference(instance: Instance, platform: Platform) -> Schedule:
    """The opposite allocation: round heads on CPUs (one per CPU appended),
    round fillers on GPUs."""
    ms = MachineState(platform)
    for t in instance.tasks:
        kind = "cpu" if t.gpu_time == 1.0 else "gpu"
        p = ms.earliest_proc(kind)
        ms.start_task(t, p, ms.avail[p])
    return ms.to_schedule()


def gen_balanced_tightness(m: int, eps: float) -> tuple[Instance, Platform]:
    """Tightness family for the balanced schedulers on (m CPUs, 1 GPU):
    m tasks (1, 1+eps) and m+1 tasks (m-1, m), with 0 < eps < 1/(m-1).
    The optimum is m; the estimate-driven walk lands on 2m-2."""
    if m <= 1:
        raise ValueError("m must exceed 1")
    if not 0 < eps < 1.0 / (m - 1):
        raise ValueError("eps must lie in (0, 1/(m-1))")
    tasks = [Task(i + 1, 1.0, 1.0 + eps) for i in range(m)]
    tasks += [Task(m + i + 1, float(m - 1), float(m)) for i in range(m + 1)]
    return Instance(tasks), Platform(m, 1)


def balanced_tightness_reference(instance: Instance, platform: Platform) -> Schedule:
    """Optimal structure: one big task per CPU plus one small task after it,
    the leftover big task alone on the GPU.  Makespan m."""
    m = platform.m
    small = [t for t in instance.tasks if t.cpu_time == 1.0]
    big = [t for t in instance.tasks if t.cpu_time != 1.0]
    placements = {}
    for i in range(m):
        placements[big[i].id] = Placement(i, 0.0, float(m - 1))
        placements[small[i].id] = Placement(i, float(m - 1), float(m))
    placements[big[m].id] = Placement(m, 0.0, float(m))
    return Schedule(placements)


class TwoTaskAdversaryFeed:
    """The universal two-task lower-bound construction: the first task
    costs 1 everywhere; the second costs 1 on the type the policy chose
    for the first and 2 on the other, forcing makespan 2 while the
    opposite allocation finishes at 1."""

    def __init__(self, platform: Platform):
        self.platform = platform
        self.tasks = [Task(1, 1.0, 1.0)]
        self.edges: list[tuple[int, int]] = []

    def start(self):
        return [Arrival(self.tasks[0], 0.0, ())]

    def on_scheduled(self, tid: int, completion: float, proc: int):
        if tid != 1:
            return []
        if self.platform.is_cpu(proc):
            second = Task(2, 1.0, 2.0)
        else:
            second = Task(2, 2.0, 1.0)
        self.tasks.append(second)
        return [Arrival(second, 0.0, ())]

    def instance(self) -> Instance:
        return Instance(self.tasks, self.edges)


class OnlineDagAdversaryFeed:
    """Adaptive round construction for DAG policies: each round holds
    k*sqrt(m/k) tasks of shape (sqrt(m/k), 1); once a round is fully
    placed, the next one is revealed as successors of its last-finishing
    task.  Requires sqrt(m/k) to be an integer."""

    def __init__(self, m: int, k: int, rounds: int):
        if m % k != 0 or math.isqrt(m // k) ** 2 != m // k:
            raise ValueError("sqrt(m/k) must be an integer")
        self.m, self.k, self.rounds = m, k, rounds
        self.s = math.isqrt(m // k)
        self.round_size = k * self.s
        self.tasks: list[Task] = []
        self.edges: list[tuple[int, int]] = []
        self.gates: list[int] = []  # last finisher of each completed round
        self._round = 0
        self._pending = 0
        self._completions: dict[int, float] = {}

    def _emit_round(self, ready: float, pred: Optional[int]):
        self._round += 1
        self._pending = self.round_size
        out = []
        for _ in range(self.round_size):
            tid = len(self.tasks) + 1
            task = Task(tid, float(self.s), 1.0)
            self.tasks.append(task)
            if pred is not None:
                self.edges.append((pred, tid))
            out.append(Arrival(task, ready, (pred,) if pred is not None else ()))
        return out

    def start(self):
        return self._emit_round(0.0, None)

    def on_scheduled(self, tid: int, completion: float, proc: int):
        self._completions[tid] = completion
        self._pending -= 1
        if self._pending > 0:
            return []
        first = len(self.tasks) - self.round_size + 1
        gate = max(range(first, len(self.tasks) + 1), key=lambda t: (self._completions[t], t))
        self.gates.append(gate)
        if self._round >= self.rounds:
            return []
        return self._emit_round(self._completions[gate], gate)

    def instance(self) -> Instance:
        return Instance(self.tasks, self.edges)


@dataclass
class AdversaryRun:
    instance: Instance
    platform: Platform
    schedule: Schedule  # what the policy produced
    reference: Schedule  # the constructed near-optimal schedule

    @property
    def ratio(self) -> float:
        return self.schedule.makespan() / self.reference.makespan()


def run_online_dag_adversary(policy_factory, m: int, k: int, rounds: int) -> AdversaryRun:
    """Drive a policy against the adaptive round adversary and build the
    pipelined reference schedule: the gate chain runs back to back on one
    GPU while each round's other tasks occupy a rotating block of CPUs."""
    platform = Platform(m, k)
    feed = OnlineDagAdversaryFeed(m, k, rounds)
    schedule = online_simulate(feed, platform, policy_factory(platform))
    instance = feed.instance()
    s = feed.s
    placements: dict[int, Placement] = {}
    block = feed.round_size - 1  # non-gate tasks per round
    for r in range(1, feed._round + 1):
        first = (r - 1) * feed.round_size + 1
        members = list(range(first, first + feed.round_size))
        gate = feed.gates[r - 1]
        placements[gate] = Placement(m, float(r - 1), float(r))
        others = [t for t in members if t != gate]
        base = ((r - 1) % s) * block
        for i, tid in enumerate(others):
            placements[tid] = Placement(base + i, float(r - 1), float(r - 1 + s))
    return AdversaryRun(instance, platform, schedule, Schedule(placements))


def gen_qa_adversary(m: int, k: int, eps: float = 0.05, size: int = 40) -> tuple[Instance, Platform]:
    """Family realizing the square-root policy's lower bound: size*m short
    tasks just above the sqrt(m/k) threshold (sent to GPUs), then a tiny
    GPU-bound gate whose successor is one long task just below the
    threshold (sent to a CPU afterwards), serializing both mistakes."""
    s = math.sqrt(m / k)
    if s < 1:
        raise ValueError("requires m >= k")
    n_short = size * m
    tasks = [Task(i + 1, s + eps, 1.0) for i in range(n_short)]
    gate = Task(n_short + 1, 10.0 * s, 1e-3)
    n_long = n_short / (k * (s - eps))
    long = Task(n_short + 2, n_long * (s - eps), n_long)
    tasks += [gate, long]
    return Instance(tasks, [(gate.id, long.id)]), Platform(m, k)


def qa_adversary_reference(instance: Instance, platform: Platform) -> Schedule:
    """Gate then the long task on one GPU, shorts spread over the CPUs."""
    n = instance.n
    gate, long = instance.task(n - 1), instance.task(n)
    ms = MachineState(platform)
    ms.start_task(gate, platform.m, 0.0)
    ms.start_task(long, platform.m, gate.gpu_time)
    for t in instance.tasks[: n - 2]:
        p = ms.earliest_proc("cpu")
        ms.start_task(t, p, ms.avail[p])
    return ms.to_schedule()
