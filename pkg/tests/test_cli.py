import csv
import json
import math
from pathlib import Path

import pytest

from hybridsched import cli
from hybridsched.model import Placement, Schedule, fix1, fix4, save_instance


def read_rows(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture
def fixture_dir(tmp_path):
    d = tmp_path / "instances"
    d.mkdir()
    save_instance(d / "fix1.json", *fix1())
    save_instance(d / "fix4.json", *fix4())
    return d


def test_parse_platforms():
    ps = cli.parse_platforms("10:2,10:8,40:2,40:8")
    assert [(p.m, p.k) for p in ps] == [(10, 2), (10, 8), (40, 2), (40, 8)]
    with pytest.raises(ValueError):
        cli.parse_platforms("")


def test_generate_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = cli.main(
            ["generate", "--family", "random", "--n", "20", "--count", "3",
             "--seed", "5", "--out", str(out)]
        )
        assert rc == 0
    names = sorted(p.name for p in out1.glob("*.json"))
    assert names == sorted(p.name for p in out2.glob("*.json"))
    for name in names:
        assert (out1 / name).read_text() == (out2 / name).read_text()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert len(manifest["files"]) == 3


def test_generate_tiled_range(tmp_path):
    out = tmp_path / "chol"
    rc = cli.main(
        ["generate", "--family", "cholesky", "--tiles-min", "4", "--tiles-max",
         "6", "--out", str(out)]
    )
    assert rc == 0
    assert sorted(p.name for p in out.glob("cholesky-*.json")) == [
        "cholesky-t04.json", "cholesky-t05.json", "cholesky-t06.json",
    ]


def test_generate_unknown_family(tmp_path):
    rc = cli.main(["generate", "--family", "nope", "--out", str(tmp_path / "x")])
    assert rc == 1


def test_run_grid_fix_instances(fixture_dir, tmp_path):
    out = tmp_path / "results.csv"
    indep = sorted(n for n, e in cli.ALGORITHMS.items() if not e.supports_dag)
    rc = cli.main(
        ["run", "--algos", *indep, "--instances", str(fixture_dir), "--out", str(out)]
    )
    assert rc == 0
    rows = read_rows(out)
    assert len(rows) == 2 * len(indep)
    for row in rows:
        assert row["valid"] == "true"
        if row["instance"] == "fix1":  # there the lower bound equals the optimum
            assert float(row["ratio"]) <= 2 + math.sqrt(2) + 1e-9
    header = Path(out).read_text().splitlines()
    assert header[0].startswith("# hybridsched results v1")
    assert header[1] == cli.CSV_SCHEMA


def test_run_embedded_platform_used(fixture_dir, tmp_path):
    out = tmp_path / "r.csv"
    rc = cli.main(
        ["run", "--algos", "sorted_ect", "--instances", str(fixture_dir), "--out", str(out)]
    )
    assert rc == 0
    rows = {r["instance"]: r for r in read_rows(out)}
    assert (rows["fix1"]["m"], rows["fix1"]["k"]) == ("1", "1")
    assert (rows["fix4"]["m"], rows["fix4"]["k"]) == ("4", "1")


def test_run_platform_grid(fixture_dir, tmp_path):
    out = tmp_path / "r.csv"
    rc = cli.main(
        ["run", "--algos", "sorted_ect", "ect", "--instances", str(fixture_dir),
         "--platforms", "10:2,10:8,40:2,40:8", "--out", str(out)]
    )
    assert rc == 0
    rows = read_rows(out)
    assert len(rows) == 2 * 2 * 4
    assert sorted({(r["m"], r["k"]) for r in rows}) == [
        ("10", "2"), ("10", "8"), ("40", "2"), ("40", "8"),
    ]


def test_run_unknown_algorithm(fixture_dir):
    assert cli.main(["run", "--algos", "nope", "--instances", str(fixture_dir)]) == 1


def test_run_rows_sorted_canonically(fixture_dir, tmp_path):
    out = tmp_path / "r.csv"
    cli.main(
        ["run", "--algos", "sorted_ect", "minmin", "--instances", str(fixture_dir),
         "--out", str(out)]
    )
    rows = read_rows(out)
    keys = [(r["instance"], r["m"], r["k"], r["algorithm"]) for r in rows]
    assert keys == sorted(keys)


def test_run_parallel_matches_serial(fixture_dir, tmp_path):
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    args = ["run", "--algos", "sorted_ect", "clb2c", "--instances", str(fixture_dir)]
    assert cli.main(args + ["--out", str(serial)]) == 0
    assert cli.main(args + ["--out", str(parallel), "--jobs", "2"]) == 0

    def strip_runtime(path):
        return [
            {k: v for k, v in row.items() if k != "runtime_us"}
            for row in read_rows(path)
        ]

    assert strip_runtime(serial) == strip_runtime(parallel)


def test_run_flags_invalid_schedule(fixture_dir, tmp_path, monkeypatch):
    broken = cli.AlgoEntry(
        "sorted_ect", False,
        lambda i, p: Schedule({t.id: Placement(0, 0.0, 0.0 + p.duration(t, 0)) for t in i.tasks}),
    )
    monkeypatch.setitem(cli.ALGORITHMS, "sorted_ect", broken)
    out = tmp_path / "r.csv"
    rc = cli.main(
        ["run", "--algos", "sorted_ect", "--instances", str(fixture_dir), "--out", str(out)]
    )
    assert rc == 2
    assert any(r["valid"] == "false" for r in read_rows(out))


def test_bounds_command(fixture_dir, tmp_path):
    out = tmp_path / "bounds.csv"
    assert cli.main(["bounds", "--instances", str(fixture_dir), "--out", str(out)]) == 0
    rows = {r["instance"]: r for r in read_rows(out)}
    assert float(rows["fix1"]["best"]) == pytest.approx(1.0)
    assert float(rows["fix4"]["trivial"]) == pytest.approx(1.1)
    assert rows["fix1"]["lp_prec"] == ""  # no edges, no precedence LP


def test_bounds_command_includes_lp_prec_for_dags(tmp_path):
    from hybridsched.gen import TiledAppSpec, gen_tiled_dag
    from hybridsched.model import Platform

    d = tmp_path / "dag"
    d.mkdir()
    save_instance(d / "chol.json", gen_tiled_dag(TiledAppSpec("cholesky", 3)), Platform(2, 1))
    out = tmp_path / "b.csv"
    assert cli.main(["bounds", "--instances", str(d), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0]["lp_prec"] != ""


def test_oracle_command_with_refusal(fixture_dir, tmp_path):
    out = tmp_path / "oracle.csv"
    assert cli.main(["oracle", "--instances", str(fixture_dir), "--out", str(out)]) == 0
    rows = {r["instance"]: r for r in read_rows(out)}
    assert float(rows["fix1"]["optimum"]) == pytest.approx(1.0)
    assert rows["fix4"]["optimum"] == ""  # 5 processors exceed the default limit


def test_usage_error_exit_code():
    assert cli.main(["run", "--instances", "/nonexistent"]) == 1
    assert cli.main(["frobnicate"]) == 1
