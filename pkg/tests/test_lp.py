import itertools
from pathlib import Path

import numpy as np
import pytest

from hybridsched import lp as lpmod
from hybridsched.bounds import build_area_lp
from hybridsched.model import fix1

GOLDEN = Path(__file__).parent / "golden"


def simple_lp():
    prog = lpmod.LinearProgram("simple")
    prog.add_var("x", 0.0, None)
    prog.add_constraint("c1", {"x": 1.0}, ">=", 3.0)
    prog.set_objective({"x": 1.0})
    return prog


def box_lp():
    prog = lpmod.LinearProgram("box")
    prog.add_var("x", 0.0, 1.0)
    prog.add_var("y", 0.0, 2.0)
    prog.add_constraint("c1", {"x": 1.0, "y": 1.0}, ">=", 1.5)
    prog.set_objective({"x": 3.0, "y": 1.0})
    return prog


def test_min_x_at_least_three():
    sol = lpmod.solve(simple_lp())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0, abs=1e-9)


def test_area_lp_fix1_equals_one():
    instance, platform = fix1()
    sol = lpmod.solve(build_area_lp(instance, platform))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-7)


def test_infeasible():
    prog = lpmod.LinearProgram()
    prog.add_var("x", 0.0, 1.0)
    prog.add_constraint("c1", {"x": 1.0}, ">=", 2.0)
    prog.set_objective({"x": 1.0})
    assert lpmod.solve(prog).status == "infeasible"


def test_unbounded():
    prog = lpmod.LinearProgram()
    prog.add_var("x", 0.0, None)
    prog.add_constraint("c1", {"x": 1.0}, ">=", 1.0)
    prog.set_objective({"x": -1.0})
    assert lpmod.solve(prog).status == "unbounded"


def test_equality_constraint():
    prog = lpmod.LinearProgram()
    prog.add_var("x", 0.0, None)
    prog.add_var("y", 0.0, None)
    prog.add_constraint("c1", {"x": 1.0, "y": 2.0}, "=", 4.0)
    prog.set_objective({"x": 1.0, "y": 1.0})
    sol = lpmod.solve(prog)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0, abs=1e-9)  # all weight on y


def test_bounds_validation():
    prog = lpmod.LinearProgram()
    with pytest.raises(ValueError):
        prog.add_var("x", 2.0, 1.0)


# --- brute-force cross-check ------------------------------------------------


def brute_force_min(c, A, b, ub):
    """Enumerate candidate vertices: intersections of n active constraints
    drawn from rows of A, x_i = 0 and x_i = ub_i."""
    n = len(c)
    rows = [(np.array(a, float), float(r)) for a, r in zip(A, b)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append((e.copy(), 0.0))
        rows.append((e.copy(), float(ub[i])))
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[i][0] for i in combo])
        rhs = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, rhs)
        if np.any(x < -1e-7) or np.any(x > np.array(ub) + 1e-7):
            continue
        if any(a @ x > r + 1e-7 for a, r in zip(A, b)):
            continue
        val = float(np.dot(c, x))
        if best is None or val < best:
            best = val
    return best


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(2024)
    for trial in range(100):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        c = rng.integers(-5, 6, n).astype(float)
        A = rng.integers(-4, 5, (m, n)).astype(float)
        b = rng.integers(1, 10, m).astype(float)
        ub = [float(rng.integers(1, 5)) for _ in range(n)]
        prog = lpmod.LinearProgram(f"rand{trial}")
        for i in range(n):
            prog.add_var(f"x{i}", 0.0, ub[i])
        for j in range(m):
            coeffs = {f"x{i}": A[j, i] for i in range(n) if A[j, i] != 0}
            if not coeffs:
                continue
            prog.add_constraint(f"c{j}", coeffs, "<=", float(b[j]))
        prog.set_objective({f"x{i}": c[i] for i in range(n)})
        sol = lpmod.solve(prog)
        assert sol.status == "optimal"  # box bounds keep it feasible+bounded
        rows = [
            ([A[j, i] for i in range(n)], b[j])
            for j in range(m)
            if any(A[j, i] != 0 for i in range(n))
        ]
        expect = brute_force_min(c, [r[0] for r in rows], [r[1] for r in rows], ub)
        assert sol.objective == pytest.approx(expect, abs=1e-6)


def test_solve_deterministic():
    instance, platform = fix1()
    a = lpmod.solve(build_area_lp(instance, platform))
    b = lpmod.solve(build_area_lp(instance, platform))
    assert a.values == b.values


# --- text export ------------------------------------------------------------


@pytest.mark.parametrize(
    "name,builder",
    [
        ("simple", simple_lp),
        ("box", box_lp),
        ("area_fix1", lambda: build_area_lp(*fix1())),
    ],
)
def test_export_matches_golden_and_reparses(name, builder):
    prog = builder()
    text = lpmod.export_lp_text(prog)
    golden = (GOLDEN / f"{name}.lp").read_text()
    assert text == golden
    back = lpmod.parse_lp_text(text)
    sol_a, sol_b = lpmod.solve(prog), lpmod.solve(back)
    assert sol_a.status == sol_b.status == "optimal"
    assert sol_a.objective == pytest.approx(sol_b.objective, abs=1e-9)


def test_export_bit_stable():
    a = lpmod.export_lp_text(box_lp())
    b = lpmod.export_lp_text(box_lp())
    assert a == b
