"""Small MIP engine: LP relaxations via HiGHS plus branch and bound on binaries.

Models are built column by column and row by row, frozen into sparse
matrices, and never mutated by a solve; everything a solve may vary
(fixed variables, relaxed integrality, warm start, budget) travels in a
SolveControl.  Branch and bound dives depth-first until it holds an
incumbent, then switches to best-bound node selection.  All tie-breaking
is by column order, so repeated solves of the same (model, control) give
identical results as long as the time limit does not cut the search off.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

INT_TOL = 1e-6
ROW_TOL = 1e-6

_LP_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-7,
    "dual_feasibility_tolerance": 1e-9,
}


class VarKey(NamedTuple):
    """Identity of one variable: role letter, facility index, 1-based period."""

    role: str
    facility: int
    period: int

    def name(self) -> str:
        return f"{self.role}_{self.facility}_{self.period}"


class ModelError(Exception):
    pass


class MipModel:
    """Minimization model over bounded variables with <=, >=, = rows.

    Mutable while being built; freeze() (called implicitly by the solvers)
    compiles the rows into sparse matrices, after which add_var/add_row
    refuse to run.  copy_unfrozen() hands back an editable clone so model
    variants never touch the original.
    """

    def __init__(self):
        self.keys: list[VarKey] = []
        self.col: dict[VarKey, int] = {}
        self._obj: list[float] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._binary: list[bool] = []
        self._rows: list[tuple[str, tuple[int, ...], tuple[float, ...], str, float]] = []
        self._frozen = False

    # -- construction ------------------------------------------------------

    def add_var(self, key: VarKey, lb: float = 0.0, ub: float = np.inf,
                obj: float = 0.0, binary: bool = False) -> int:
        if self._frozen:
            raise ModelError("model is frozen")
        if key in self.col:
            raise ModelError(f"duplicate variable {key}")
        j = len(self.keys)
        self.keys.append(key)
        self.col[key] = j
        self._obj.append(float(obj))
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._binary.append(bool(binary))
        return j

    def add_row(self, name: str, coeffs: Iterable[tuple[VarKey, float]],
                sense: str, rhs: float):
        if self._frozen:
            raise ModelError("model is frozen")
        if sense not in ("<=", ">=", "="):
            raise ModelError(f"bad row sense {sense!r}")
        cols, vals = [], []
        for key, c in coeffs:
            if c == 0.0:
                continue
            cols.append(self.col[key])
            vals.append(float(c))
        self._rows.append((name, tuple(cols), tuple(vals), sense, float(rhs)))

    def set_bounds(self, key: VarKey, lb: float | None = None, ub: float | None = None):
        if self._frozen:
            raise ModelError("model is frozen")
        j = self.col[key]
        if lb is not None:
            self._lb[j] = float(lb)
        if ub is not None:
            self._ub[j] = float(ub)

    def copy_unfrozen(self) -> "MipModel":
        clone = MipModel()
        clone.keys = list(self.keys)
        clone.col = dict(self.col)
        clone._obj = list(self._obj)
        clone._lb = list(self._lb)
        clone._ub = list(self._ub)
        clone._binary = list(self._binary)
        clone._rows = list(self._rows)
        return clone

    # -- compiled form -----------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.keys)

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def freeze(self):
        if self._frozen:
            return
        n = len(self.keys)
        self.obj = np.array(self._obj)
        self.lb = np.array(self._lb)
        self.ub = np.array(self._ub)
        self.binary = np.array(self._binary, dtype=bool)

        eq_r, eq_c, eq_v, eq_rhs = [], [], [], []
        ub_r, ub_c, ub_v, ub_rhs = [], [], [], []
        for name, cols, vals, sense, rhs in self._rows:
            if sense == "=":
                i = len(eq_rhs)
                eq_rhs.append(rhs)
                eq_r.extend([i] * len(cols)); eq_c.extend(cols); eq_v.extend(vals)
            else:
                flip = -1.0 if sense == ">=" else 1.0
                i = len(ub_rhs)
                ub_rhs.append(flip * rhs)
                ub_r.extend([i] * len(cols)); ub_c.extend(cols)
                ub_v.extend([flip * v for v in vals])
        self.A_eq = (
            sparse.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_rhs), n))
            if eq_rhs else None
        )
        self.b_eq = np.array(eq_rhs) if eq_rhs else None
        self.A_ub = (
            sparse.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_rhs), n))
            if ub_rhs else None
        )
        self.b_ub = np.array(ub_rhs) if ub_rhs else None
        self._frozen = True


@dataclass
class SolveControl:
    """Per-solve settings; the model itself is never modified.

    fixings     variable -> value, clamped into the variable's bounds
    relaxed     binary variables to treat as continuous in [lb, ub]
    warm_start  full assignment vector in column order; seeds the incumbent
                when it is feasible under the fixings
    """

    fixings: dict[VarKey, float] = field(default_factory=dict)
    relaxed: set[VarKey] = field(default_factory=set)
    warm_start: np.ndarray | None = None
    time_limit_s: float | None = None
    gap_tol: float = 1e-6


@dataclass
class SolveResult:
    status: str  # optimal | feasible | infeasible | unbounded | no_solution | numeric_failure
    objective: float | None = None
    assignment: np.ndarray | None = None
    dual_bound: float | None = None
    nodes: int = 0
    elapsed_s: float = 0.0


def _bounds_with_fixings(model: MipModel, control: SolveControl):
    lb = model.lb.copy()
    ub = model.ub.copy()
    for key, val in control.fixings.items():
        j = model.col[key]
        v = float(val)
        # crossing bounds is kept as-is so an impossible fixing shows up
        # as LP infeasibility instead of being silently widened
        lb[j] = max(lb[j], v)
        ub[j] = min(ub[j], v)
    return lb, ub


def _run_lp(model: MipModel, lb: np.ndarray, ub: np.ndarray,
            time_limit_s: float | None):
    options = dict(_LP_OPTIONS)
    if time_limit_s is not None:
        options["time_limit"] = max(float(time_limit_s), 0.05)
    res = linprog(
        model.obj,
        A_ub=model.A_ub, b_ub=model.b_ub,
        A_eq=model.A_eq, b_eq=model.b_eq,
        bounds=np.column_stack((lb, ub)),
        method="highs",
        options=options,
    )
    if res.status == 0:
        return "optimal", float(res.fun), np.asarray(res.x)
    if res.status == 2:
        return "infeasible", None, None
    if res.status == 3:
        return "unbounded", None, None
    if res.status == 1:
        return "no_solution", None, None  # iteration or time limit
    return "numeric_failure", None, None


def solve_lp(model: MipModel, control: SolveControl | None = None) -> SolveResult:
    """Solve the continuous relaxation (all integrality dropped)."""
    control = control or SolveControl()
    t0 = time.perf_counter()
    model.freeze()
    lb, ub = _bounds_with_fixings(model, control)
    status, obj, x = _run_lp(model, lb, ub, control.time_limit_s)
    return SolveResult(
        status=status,
        objective=obj,
        assignment=x,
        dual_bound=obj,
        nodes=0,
        elapsed_s=time.perf_counter() - t0,
    )


def _warm_start_ok(model: MipModel, v: np.ndarray, lb: np.ndarray,
                   ub: np.ndarray, branch_cols: list[int]) -> bool:
    if v.shape != (model.num_vars,):
        return False
    if np.any(v < lb - ROW_TOL) or np.any(v > ub + ROW_TOL):
        return False
    for j in branch_cols:
        if abs(v[j] - round(v[j])) > INT_TOL:
            return False
    if model.A_eq is not None:
        if np.max(np.abs(model.A_eq @ v - model.b_eq), initial=0.0) > ROW_TOL:
            return False
    if model.A_ub is not None:
        if np.max(model.A_ub @ v - model.b_ub, initial=0.0) > ROW_TOL:
            return False
    return True


def solve_mip(model: MipModel, control: SolveControl | None = None) -> SolveResult:
    """Branch and bound on the model's binary variables.

    Binaries listed in control.relaxed stay continuous, fixed ones are
    pinned, the rest must come out integral.  Most-fractional branching,
    ties to the lowest column; depth-first until the first incumbent, then
    best-bound.  A valid dual bound is reported even on early stop.
    """
    control = control or SolveControl()
    t0 = time.perf_counter()
    deadline = None
    if control.time_limit_s is not None:
        deadline = t0 + float(control.time_limit_s)
    model.freeze()

    lb0, ub0 = _bounds_with_fixings(model, control)
    relaxed_cols = {model.col[k] for k in control.relaxed}
    branch_cols = [
        j for j in range(model.num_vars)
        if model.binary[j] and j not in relaxed_cols
        and model.keys[j] not in control.fixings
    ]

    incumbent = None
    incumbent_obj = np.inf
    if control.warm_start is not None:
        v = np.asarray(control.warm_start, dtype=np.float64)
        if _warm_start_ok(model, v, lb0, ub0, branch_cols):
            incumbent = v.copy()
            incumbent_obj = float(model.obj @ v)

    def finish(status, dual):
        obj = None if incumbent is None else incumbent_obj
        return SolveResult(status, obj, incumbent, dual,
                           nodes, time.perf_counter() - t0)

    # nodes carry (parent LP bound, insertion order, branching decisions);
    # the parent bound is a valid underestimate of the node's own bound
    nodes = 0
    seq = 0
    stack: list[tuple[float, int, tuple[tuple[int, float, float], ...]]] = []
    heap: list[tuple[float, int, tuple[tuple[int, float, float], ...]]] = []
    stack.append((-np.inf, seq, ()))
    timed_out = False
    probed = False

    while stack or heap:
        if incumbent is not None:
            while stack:  # incumbent in hand: everything runs best-bound
                heapq.heappush(heap, stack.pop())
            if not heap:
                break
            bound = heap[0][0]
            gap = (incumbent_obj - bound) / max(abs(incumbent_obj), 1e-10)
            if gap <= control.gap_tol:
                # every open node is within tolerance of the incumbent, so
                # the incumbent value itself is a valid dual bound
                return finish("optimal", min(bound, incumbent_obj))
            est, _, overrides = heapq.heappop(heap)
            prune_eps = max(control.gap_tol * max(1.0, abs(incumbent_obj)), 1e-9)
            if est >= incumbent_obj - prune_eps:
                continue
        else:
            est, _, overrides = stack.pop()

        rem = None
        if deadline is not None:
            rem = deadline - time.perf_counter()
            if rem <= 0:
                heapq.heappush(heap, (est, seq + 1, overrides))
                seq += 1
                timed_out = True
                break
        lb = lb0.copy()
        ub = ub0.copy()
        for j, lo, hi in overrides:
            lb[j] = lo
            ub[j] = hi
        status, obj, x = _run_lp(model, lb, ub, rem)
        nodes += 1
        if status == "infeasible":
            continue
        if status == "unbounded":
            return finish("unbounded", -np.inf)
        if status in ("no_solution", "numeric_failure"):
            # unresolved node: keep it open so the dual bound stays valid
            heapq.heappush(heap, (est, seq + 1, overrides))
            seq += 1
            timed_out = True
            break
        if incumbent is not None:
            prune_eps = max(control.gap_tol * max(1.0, abs(incumbent_obj)), 1e-9)
            if obj >= incumbent_obj - prune_eps:
                continue

        frac_j = -1
        frac_best = INT_TOL
        for j in branch_cols:
            f = x[j] - np.floor(x[j])
            dist = min(f, 1.0 - f)
            if dist > frac_best:
                frac_best = dist
                frac_j = j
        if frac_j < 0:
            # integral on every branching column
            if obj < incumbent_obj - 1e-9:
                incumbent = x
                incumbent_obj = obj
            continue

        if not probed and incumbent is None:
            # rounding probe at the root: pin the binaries to the relaxation's
            # rounded values (then to 1 where fractional, which only loosens
            # setup-style rows) so tight budgets still get some plan
            probed = True
            for fill in ("round", "up"):
                plb, pub = lb.copy(), ub.copy()
                for j in branch_cols:
                    v = round(x[j]) if fill == "round" else (
                        1.0 if x[j] > INT_TOL else 0.0)
                    plb[j] = max(plb[j], v)
                    pub[j] = min(pub[j], v)
                pstat, pobj, px = _run_lp(model, plb, pub,
                                          None if deadline is None
                                          else max(deadline - time.perf_counter(), 0.05))
                nodes += 1
                if pstat == "optimal" and pobj < incumbent_obj - 1e-9:
                    incumbent = px
                    incumbent_obj = pobj
                if incumbent is not None:
                    break

        # explore the rounded value first while diving
        children = [(frac_j, 1.0, 1.0), (frac_j, 0.0, 0.0)]
        if x[frac_j] >= 0.5:
            children.reverse()  # the stack pops the last push first
        for j, lo, hi in children:
            seq += 1
            node = (obj, seq, overrides + ((j, lo, hi),))
            if incumbent is None:
                stack.append(node)
            else:
                heapq.heappush(heap, node)

    open_bounds = [e for e, _, _ in heap] + [e for e, _, _ in stack]
    if timed_out:
        dual = min(open_bounds) if open_bounds else None
        status = "feasible" if incumbent is not None else "no_solution"
        return finish(status, dual)
    if incumbent is None:
        return finish("infeasible", None)
    return finish("optimal", incumbent_obj)


# -- LP text export ---------------------------------------------------------


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_terms(pairs: list[tuple[float, str]]) -> str:
    parts = []
    for i, (coef, name) in enumerate(pairs):
        mag = _fmt_num(abs(coef))
        if i == 0:
            parts.append(f"- {mag} {name}" if coef < 0 else f"{mag} {name}")
        else:
            parts.append(f"{'-' if coef < 0 else '+'} {mag} {name}")
    return " ".join(parts)


def export_model_text(model: MipModel) -> str:
    """Render the model in LP text format (Minimize / Subject To / Bounds /
    Binary / End), with variables named role_facility_period."""
    names = [k.name() for k in model.keys]
    lines = ["Minimize"]
    obj_pairs = [(model._obj[j], names[j]) for j in range(model.num_vars)
                 if model._obj[j] != 0.0]
    lines.append(" obj: " + (_fmt_terms(obj_pairs) if obj_pairs else "0 " + names[0]))
    lines.append("Subject To")
    for name, cols, vals, sense, rhs in model._rows:
        pairs = [(v, names[j]) for j, v in zip(cols, vals)]
        op = {"<=": "<=", ">=": ">=", "=": "="}[sense]
        lines.append(f" {name}: {_fmt_terms(pairs)} {op} {_fmt_num(rhs)}")
    bound_lines = []
    for j in range(model.num_vars):
        if model._binary[j]:
            continue  # binary section implies [0, 1]
        lo, hi = model._lb[j], model._ub[j]
        if lo == 0.0 and hi == np.inf:
            continue  # LP-format default
        if lo == hi:
            bound_lines.append(f" {names[j]} = {_fmt_num(lo)}")
            continue
        if lo != 0.0:
            if np.isinf(lo):
                bound_lines.append(f" -inf <= {names[j]}")
            else:
                bound_lines.append(f" {_fmt_num(lo)} <= {names[j]}")
        if not np.isinf(hi):
            bound_lines.append(f" {names[j]} <= {_fmt_num(hi)}")
    if bound_lines:
        lines.append("Bounds")
        lines.extend(bound_lines)
    binaries = [names[j] for j in range(model.num_vars) if model._binary[j]]
    if binaries:
        lines.append("Binary")
        for i in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[i : i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"
