"""Minimal dense linear programming layer.

An embedded two-phase simplex keeps the toolkit self-contained and
deterministic: entering variables are picked by most-negative reduced
cost with lowest-index ties, and after a streak of degenerate pivots the
rule switches to Bland's (which cannot cycle) until the objective moves
again.  Export to the CPLEX LP text format is provided so external
solvers can cross-check any program we build.

Desk scale only: tableaus are dense numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PIVOT_EPS = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_STREAK = 40


@dataclass
class Variable:
    name: str
    lo: float = 0.0
    hi: Optional[float] = None

    def __post_init__(self):
        if self.hi is not None and self.lo > self.hi:
            raise ValueError(f"{self.name}: inconsistent bounds {self.lo} > {self.hi}")


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, float]
    sense: str  # "<=", ">=" or "="
    rhs: float


class LinearProgram:
    """A minimization LP over named variables with box bounds."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.variables: list[Variable] = []
        self._index: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self.objective: dict[str, float] = {}

    def add_var(self, name: str, lo: float = 0.0, hi: Optional[float] = None) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, lo, hi))
        return name

    def add_constraint(self, name: str, coeffs: dict[str, float], sense: str, rhs: float):
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad sense {sense!r}")
        for v in coeffs:
            if v not in self._index:
                raise ValueError(f"constraint {name} references unknown variable {v}")
        self.constraints.append(Constraint(name, dict(coeffs), sense, rhs))

    def set_objective(self, coeffs: dict[str, float]):
        for v in coeffs:
            if v not in self._index:
                raise ValueError(f"objective references unknown variable {v}")
        self.objective = dict(coeffs)


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: Optional[float] = None
    values: dict[str, float] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and abs(T[r, col]) > 1e-14:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _entering(z: np.ndarray, ncols: int, bland: bool) -> int:
    zz = z[:ncols]
    if bland:
        neg = np.nonzero(zz < -PIVOT_EPS)[0]
        return int(neg[0]) if neg.size else -1
    j = int(np.argmin(zz))
    return j if zz[j] < -PIVOT_EPS else -1


def _leaving(T: np.ndarray, basis: list[int], col: int) -> int:
    a = T[:-1, col]
    ok = a > PIVOT_EPS
    if not ok.any():
        return -1
    ratios = np.where(ok, T[:-1, -1] / np.where(ok, a, 1.0), np.inf)
    rmin = ratios.min()
    ties = np.nonzero(ratios <= rmin + 1e-12)[0]
    # lowest basis index among the minimum-ratio rows (anti-cycling friendly)
    return int(min(ties, key=lambda i: basis[i]))


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int) -> str:
    max_iter = 10000 + 50 * (T.shape[0] + T.shape[1])
    bland = False
    streak = 0
    last_obj = T[-1, -1]
    for _ in range(max_iter):
        col = _entering(T[-1], ncols, bland)
        if col < 0:
            return "optimal"
        row = _leaving(T, basis, col)
        if row < 0:
            return "unbounded"
        _pivot(T, basis, row, col)
        obj = T[-1, -1]
        if abs(obj - last_obj) <= 1e-12:
            streak += 1
            if streak >= DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0
            bland = False
        last_obj = obj
    raise RuntimeError("simplex iteration limit exceeded")


def solve(lp: LinearProgram) -> LpSolution:
    """Two-phase simplex.  Deterministic given the input ordering; primal
    feasibility within 1e-7 absolute per constraint at the optimum."""
    nvars = len(lp.variables)
    for v in lp.variables:
        if v.lo is None:
            raise ValueError(f"{v.name}: free variables are not supported")

    # Shift each variable by its lower bound, upper bounds become rows.
    rows: list[tuple[np.ndarray, str, float]] = []
    for c in lp.constraints:
        a = np.zeros(nvars)
        shift = 0.0
        for name, coef in c.coeffs.items():
            j = lp._index[name]
            a[j] = coef
            shift += coef * lp.variables[j].lo
        rows.append((a, c.sense, c.rhs - shift))
    for j, v in enumerate(lp.variables):
        if v.hi is not None:
            a = np.zeros(nvars)
            a[j] = 1.0
            rows.append((a, "<=", v.hi - v.lo))

    nrows = len(rows)
    A = np.zeros((nrows, nvars))
    b = np.zeros(nrows)
    senses = []
    for i, (a, s, r) in enumerate(rows):
        if r < 0:
            a, s, r = -a, {"<=": ">=", ">=": "<=", "=": "="}[s], -r
        A[i] = a
        b[i] = r
        senses.append(s)

    n_slack = sum(1 for s in senses if s == "<=")
    n_surp = sum(1 for s in senses if s == ">=")
    n_art = sum(1 for s in senses if s in (">=", "="))
    total = nvars + n_slack + n_surp + n_art
    T = np.zeros((nrows + 1, total + 1))
    T[:nrows, :nvars] = A
    T[:nrows, -1] = b
    s_at, t_at, a_at = nvars, nvars + n_slack, nvars + n_slack + n_surp
    si = ti = ai = 0
    basis: list[int] = []
    art_cols = []
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, s_at + si] = 1.0
            basis.append(s_at + si)
            si += 1
        elif s == ">=":
            T[i, t_at + ti] = -1.0
            T[i, a_at + ai] = 1.0
            basis.append(a_at + ai)
            art_cols.append(a_at + ai)
            ti += 1
            ai += 1
        else:
            T[i, a_at + ai] = 1.0
            basis.append(a_at + ai)
            art_cols.append(a_at + ai)
            ai += 1

    if n_art:
        # Phase 1: minimize the sum of artificials.
        z = np.zeros(total + 1)
        for j in art_cols:
            z[j] = 1.0
        for r, bc in enumerate(basis):
            if bc >= a_at:
                z -= T[r]
        T[-1] = z
        status = _run_simplex(T, basis, total)
        if status != "optimal":
            raise RuntimeError(f"phase 1 ended {status}")
        if T[-1, -1] < -FEAS_TOL:
            return LpSolution("infeasible")
        # Drive leftover artificials out of the basis.
        for r, bc in enumerate(basis):
            if bc >= a_at:
                for j in range(a_at):
                    if abs(T[r, j]) > PIVOT_EPS:
                        _pivot(T, basis, r, j)
                        break
        T[:, a_at:total] = 0.0

    # Phase 2 objective.
    z = np.zeros(total + 1)
    for name, coef in lp.objective.items():
        z[lp._index[name]] = coef
    for r, bc in enumerate(basis):
        if abs(z[bc]) > 1e-14:
            z -= z[bc] * T[r]
    T[-1] = z
    status = _run_simplex(T, basis, a_at)
    if status == "unbounded":
        return LpSolution("unbounded")

    x = np.zeros(total)
    for r, bc in enumerate(basis):
        x[bc] = T[r, -1]
    values = {}
    obj = 0.0
    for j, v in enumerate(lp.variables):
        val = float(x[j]) + v.lo
        if abs(val) < 1e-12:
            val = 0.0
        values[v.name] = val
        obj += lp.objective.get(v.name, 0.0) * val
    return LpSolution("optimal", obj, values)


def _fmt(v: float) -> str:
    s = format(v, ".12g")
    return s


def _join_terms(pairs: list[tuple[float, str]]) -> str:
    parts = []
    for i, (coef, name) in enumerate(pairs):
        mag = _fmt(abs(coef))
        if i == 0:
            parts.append(f"{'-' if coef < 0 else ''}{mag} {name}")
        else:
            parts.append(f"{'-' if coef < 0 else '+'} {mag} {name}")
    return " ".join(parts)


def export_lp_text(lp: LinearProgram) -> str:
    """Emit CPLEX LP format text (minimize).  Bit-stable for identical
    input: variables and constraints appear in declaration order."""
    out = [f"\\ {lp.name}", "Minimize"]
    terms = [
        (lp.objective[v.name], v.name) for v in lp.variables if v.name in lp.objective
    ]
    out.append(
        " obj: " + (_join_terms(terms) if terms else "0 " + lp.variables[0].name)
    )
    out.append("Subject To")
    for c in lp.constraints:
        terms = [
            (c.coeffs[v.name], v.name)
            for v in lp.variables
            if v.name in c.coeffs and c.coeffs[v.name] != 0.0
        ]
        out.append(f" {c.name}: " + _join_terms(terms) + f" {c.sense} {_fmt(c.rhs)}")
    out.append("Bounds")
    for v in lp.variables:
        if v.hi is None:
            out.append(f" {v.name} >= {_fmt(v.lo)}")
        else:
            out.append(f" {_fmt(v.lo)} <= {v.name} <= {_fmt(v.hi)}")
    out.append("End")
    return "\n".join(out) + "\n"


def parse_lp_text(text: str) -> LinearProgram:
    """Parse the subset of the CPLEX LP format emitted by
    :func:`export_lp_text` (round-trip support for tests)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("\\")]
    lp = LinearProgram("parsed")
    mode = None
    pending: list[tuple[str, dict[str, float], str, float]] = []
    obj: dict[str, float] = {}

    def parse_terms(expr: str) -> dict[str, float]:
        coeffs: dict[str, float] = {}
        sign = 1.0
        coef: Optional[float] = None
        # protect exponent signs before splitting on arithmetic signs
        expr = expr.replace("e+", "\x01").replace("e-", "\x02")
        expr = expr.replace("+", " + ").replace("- ", " - ")
        expr = expr.replace("\x01", "e+").replace("\x02", "e-")
        for tok in expr.split():
            if tok == "+":
                sign, coef = 1.0, None
            elif tok == "-":
                sign, coef = -1.0, None
            else:
                try:
                    coef = sign * float(tok)
                except ValueError:
                    coeffs[tok] = sign if coef is None else coef
                    sign, coef = 1.0, None
        return coeffs

    for ln in lines:
        stripped = ln.strip()
        low = stripped.lower()
        if low in ("minimize", "subject to", "bounds", "end"):
            mode = low
            continue
        if mode == "minimize":
            _, expr = stripped.split(":", 1)
            obj = parse_terms(expr)
        elif mode == "subject to":
            name, rest = stripped.split(":", 1)
            for sense in ("<=", ">=", "="):
                if sense in rest:
                    lhs, rhs = rest.split(sense, 1)
                    pending.append((name.strip(), parse_terms(lhs), sense, float(rhs)))
                    break
        elif mode == "bounds":
            if "<=" in stripped:
                parts = [p.strip() for p in stripped.split("<=")]
                if len(parts) == 3:
                    lp.add_var(parts[1], float(parts[0]), float(parts[2]))
                else:
                    lp.add_var(parts[0], 0.0, float(parts[1]))
            elif ">=" in stripped:
                name, lo = stripped.split(">=")
                lp.add_var(name.strip(), float(lo), None)
    for name, coeffs, sense, rhs in pending:
        lp.add_constraint(name, coeffs, sense, rhs)
    lp.set_objective(obj)
    return lp
