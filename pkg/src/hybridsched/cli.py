"""Benchmark harness: generate instance files, run algorithm grids, and
compute bounds and exact optima, all emitting CSV for the plotting
front end.

Exit codes: 0 on success, 1 on usage or I/O errors, 2 when a run produced
an invalid schedule (the offending rows are flagged ``valid=false``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import bounds, gen, oracle
from .dag_offline import heft, heteroprio_dag, hlp, offline_ect
from .dag_online import ErlsPolicy, MixedPolicy, QaPolicy
from .engine import online_simulate
from .indep_offline import (
    InstanceTooLargeError,
    balanced_estimate,
    balanced_makespan,
    clb2c,
    dp32,
    dualhp,
    heteroprio,
    minmin,
    round_lp,
    sorted_ect,
)
from .indep_online import Al4Policy, EctPolicy, LgPolicy, MgPolicy
from .model import (
    Instance,
    Platform,
    Schedule,
    load_instance,
    save_instance,
    validate,
)

CSV_SCHEMA = "instance,family,n,m,k,algorithm,makespan,lower_bound,ratio,runtime_us,valid"
CSV_VERSION = "# hybridsched results v1"


@dataclass(frozen=True)
class AlgoEntry:
    name: str
    supports_dag: bool
    run: Callable[[Instance, Platform], Schedule]


def _online(policy_cls, **kw):
    def run(instance: Instance, platform: Platform) -> Schedule:
        return online_simulate(instance, platform, policy_cls(platform, **kw))

    return run


ALGORITHMS: dict[str, AlgoEntry] = {}


def _register(name: str, supports_dag: bool, run):
    ALGORITHMS[name] = AlgoEntry(name, supports_dag, run)


# Off-line, independent tasks.
_register("sorted_ect", False, sorted_ect)
_register("minmin", False, minmin)
_register("round", False, round_lp)
_register("dualhp", False, dualhp)
_register("dp32", False, dp32)
_register("heteroprio", False, heteroprio)
_register("balanced_estimate", False, balanced_estimate)
_register("balanced_makespan", False, balanced_makespan)
_register("clb2c", False, clb2c)
# On-line, independent or DAG (arrival at readiness).
_register("ect", True, _online(EctPolicy))
_register("lg", True, _online(LgPolicy))
_register("mg", True, _online(MgPolicy))
_register("al4", True, _online(Al4Policy))
_register("erls", True, _online(ErlsPolicy))
_register("qa", True, _online(QaPolicy))
_register("mixed", True, _online(MixedPolicy))
# Off-line, DAG.
_register("heft", True, heft)
_register("offline_ect", True, offline_ect)
_register("heteroprio_dag", True, heteroprio_dag)
_register("hlp_est", True, lambda i, p: hlp(i, p, "est", False))
_register("hlp_ols", True, lambda i, p: hlp(i, p, "ols", False))
_register("hlp_est_spol", True, lambda i, p: hlp(i, p, "est", True))
_register("hlp_ols_spol", True, lambda i, p: hlp(i, p, "ols", True))

#: Names whose guarantees assume independent tasks; they refuse edges.
INDEP_ONLY = {name for name, e in ALGORITHMS.items() if not e.supports_dag}


def parse_platforms(text: str) -> list[Platform]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m, k = part.split(":")
        out.append(Platform(int(m), int(k)))
    if not out:
        raise ValueError("empty platform list")
    return out


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {"family": args.family, "seed": args.seed, "files": []}
    files: list[tuple[str, Instance, Platform]] = []
    family = args.family

    if family == "random":
        for i in range(args.count):
            spec = gen.RandomSpec(
                n=args.n,
                cpu_mean=args.mean_cpu,
                gpu_mean=args.mean_gpu,
                cpu_cv=args.cv_cpu,
                gpu_cv=args.cv_gpu,
                seed=args.seed + i,
            )
            inst = gen.gen_random(spec)
            files.append((f"random-n{args.n}-{i:03d}", inst, Platform(args.m, args.k)))
    elif family in ("cholesky", "lu", "qr"):
        tiles = range(args.tiles_min, args.tiles_max + 1) if args.tiles is None else [args.tiles]
        for t in tiles:
            inst = gen.gen_tiled_dag(gen.TiledAppSpec(family, t), with_edges=not args.no_edges)
            files.append((f"{family}-t{t:02d}", inst, Platform(args.m, args.k)))
    elif family == "adversary:pg":
        inst, platform = gen.gen_pg_adversary(args.m, args.k, args.eps)
        files.append((f"pg-adversary-m{args.m}-k{args.k}", inst, platform))
    elif family == "adversary:balanced":
        inst, platform = gen.gen_balanced_tightness(args.m, args.eps)
        files.append((f"balanced-tightness-m{args.m}", inst, platform))
    elif family == "adversary:qa":
        inst, platform = gen.gen_qa_adversary(args.m, args.k, args.eps)
        files.append((f"qa-adversary-m{args.m}-k{args.k}", inst, platform))
    else:
        print(f"error: unknown family {family!r}", file=sys.stderr)
        return 1

    for stem, inst, platform in files:
        path = outdir / f"{stem}.json"
        save_instance(path, inst, platform)
        manifest["files"].append(
            {"file": path.name, "family": family.split(":")[0], "n": inst.n}
        )
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {len(files)} instance(s) to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _family_of(path: Path, manifest: Optional[dict]) -> str:
    if manifest:
        for row in manifest.get("files", []):
            if row["file"] == path.name:
                return row["family"]
    return path.stem.split("-")[0]


def _run_cell(path_str: str, m: int, k: int, algos: list[str], family: str) -> list[dict]:
    instance, _ = load_instance(path_str)
    platform = Platform(m, k)
    lb = bounds.best_bound(instance, platform)
    rows = []
    for name in algos:
        entry = ALGORITHMS[name]
        if instance.has_edges and not entry.supports_dag:
            continue
        t0 = time.perf_counter_ns()
        try:
            sched = entry.run(instance, platform)
        except InstanceTooLargeError:
            continue
        runtime_us = (time.perf_counter_ns() - t0) // 1000
        ok = validate(sched, instance, platform) is None
        ms = sched.makespan()
        rows.append(
            {
                "instance": Path(path_str).stem,
                "family": family,
                "n": instance.n,
                "m": m,
                "k": k,
                "algorithm": name,
                "makespan": f"{ms:.9g}",
                "lower_bound": f"{lb:.9g}",
                "ratio": f"{ms / lb:.9g}" if lb > 0 else "",
                "runtime_us": runtime_us,
                "valid": "true" if ok else "false",
            }
        )
    return rows


def _write_csv(path: Optional[str], rows: list[dict], header_comment: str) -> None:
    rows = sorted(rows, key=lambda r: (r["instance"], r["m"], r["k"], r["algorithm"]))
    buf = io.StringIO()
    buf.write(header_comment + "\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_SCHEMA.split(","))
    writer.writeheader()
    writer.writerows(rows)
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    if not args.algos:
        print("error: empty algorithm list", file=sys.stderr)
        return 1
    if args.algos == ["all"]:
        algos = sorted(ALGORITHMS)
    else:
        algos = []
        for name in args.algos:
            if name not in ALGORITHMS:
                print(f"error: unknown algorithm {name!r}", file=sys.stderr)
                return 1
            algos.append(name)
    indir = Path(args.instances)
    paths = sorted(indir.glob("*.json"))
    paths = [p for p in paths if p.name != "manifest.json"]
    if not paths:
        print(f"error: no instance files in {indir}", file=sys.stderr)
        return 1
    manifest = None
    mpath = indir / "manifest.json"
    if mpath.exists():
        manifest = json.loads(mpath.read_text())

    cells = []
    for p in paths:
        if args.platforms:
            platforms = parse_platforms(args.platforms)
        else:
            _, embedded = load_instance(p)
            platforms = [embedded]
        for pf in platforms:
            cells.append((str(p), pf.m, pf.k, algos, _family_of(p, manifest)))

    rows: list[dict] = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(_run_cell, *zip(*cells)):
                rows.extend(chunk)
    else:
        for cell in cells:
            rows.extend(_run_cell(*cell))
    _write_csv(args.out, rows, f"{CSV_VERSION} schema={CSV_SCHEMA}")
    bad = [r for r in rows if r["valid"] == "false"]
    if bad:
        print(f"error: {len(bad)} invalid schedule(s)", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# bounds / oracle
# ---------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    indir = Path(args.instances)
    paths = [p for p in sorted(indir.glob("*.json")) if p.name != "manifest.json"]
    if not paths:
        print(f"error: no instance files in {indir}", file=sys.stderr)
        return 1
    rows = []
    for p in paths:
        instance, platform = load_instance(p)
        rep = bounds.bound_report(instance, platform)
        rows.append(
            {
                "instance": p.stem,
                "n": instance.n,
                "m": platform.m,
                "k": platform.k,
                "trivial": f"{rep.trivial:.9g}",
                "area": f"{rep.area:.9g}",
                "lp_prec": f"{rep.lp_prec:.9g}" if rep.lp_prec is not None else "",
                "best": f"{rep.best:.9g}",
            }
        )
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["instance", "n", "m", "k", "trivial", "area", "lp_prec", "best"]
    )
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_oracle(args) -> int:
    indir = Path(args.instances)
    paths = [p for p in sorted(indir.glob("*.json")) if p.name != "manifest.json"]
    if not paths:
        print(f"error: no instance files in {indir}", file=sys.stderr)
        return 1
    limits = oracle.OracleLimits(args.n_max, args.proc_max)
    rows = []
    for p in paths:
        instance, platform = load_instance(p)
        try:
            opt, _ = oracle.optimal_makespan(instance, platform, limits)
            value = f"{opt:.9g}"
        except oracle.OracleRefusal:
            value = ""  # refusal is not a failure
        rows.append(
            {
                "instance": p.stem,
                "n": instance.n,
                "m": platform.m,
                "k": platform.k,
                "optimum": value,
            }
        )
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["instance", "n", "m", "k", "optimum"])
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hybridsched",
        description="Benchmark harness for hybrid CPU/GPU makespan scheduling",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write instance JSON files")
    g.add_argument("--family", required=True,
                   help="random | cholesky | lu | qr | adversary:pg | adversary:balanced | adversary:qa")
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--tiles", type=int, default=None)
    g.add_argument("--tiles-min", type=int, default=4)
    g.add_argument("--tiles-max", type=int, default=20)
    g.add_argument("--no-edges", action="store_true")
    g.add_argument("--cv-cpu", type=float, default=0.2)
    g.add_argument("--cv-gpu", type=float, default=0.2)
    g.add_argument("--mean-cpu", type=float, default=15.0)
    g.add_argument("--mean-gpu", type=float, default=1.0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int, default=10)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--eps", type=float, default=0.01)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run an algorithm grid, emit results CSV")
    r.add_argument("--algos", nargs="+", required=True, help="names or 'all'")
    r.add_argument("--instances", required=True)
    r.add_argument("--platforms", default=None, help='e.g. "10:2,10:8,40:2,40:8"')
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="lower bounds per instance")
    b.add_argument("--instances", required=True)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bounds)

    o = sub.add_parser("oracle", help="exact optima within limits")
    o.add_argument("--instances", required=True)
    o.add_argument("--n-max", type=int, default=8)
    o.add_argument("--proc-max", type=int, default=4)
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
