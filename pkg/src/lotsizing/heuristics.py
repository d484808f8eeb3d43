"""Rolling-window MIP heuristics: relax-and-fix and fix-and-optimize.

Relax-and-fix sweeps a window over the horizon.  Inside the window setups
are binary, beyond it they are relaxed to [0, 1], and behind it earlier
decisions are pinned.  After each solve the leading fix_step periods of the
window are committed and the window slides forward by fix_step; the solve
whose window reaches the last period returns the constructed plan.  Two
commitment styles exist: S1 pins only setups that came out at 1, leaving
the zeros open for later windows to revisit; S2 pins the whole prefix at
its rounded values, which shrinks later subproblems but can lock in a
myopic zero.  Every window keeps the full horizon's constraint rows (only
tail integrality is relaxed), so a feasible window always leaves the next
one feasible under either style; an infeasible window therefore means the
instance itself (given the committed prefix) has no completion at all.

Fix-and-optimize then repeatedly re-optimizes windows of an existing plan:
setups outside the window are pinned to the incumbent plan, the incumbent
seeds the solver, and strictly better plans replace it.  After a round of
windows with no improvement the window geometry grows; once the window
covers the whole horizon a final full-width solve gets the remaining budget
and another non-improving round ends the search.  A hard wall-clock budget
bounds both stages regardless.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .engine import MipModel, SolveControl, VarKey, solve_mip
from .formulations import (
    build_model,
    extract_solution,
    solution_to_assignment,
)
from .problem import HeuristicParams, Instance, Solution

MIN_SOLVE_S = 0.05  # never hand the solver a zero-second budget


class ConstructionError(Exception):
    """A relax-and-fix subproblem has no feasible completion."""

    def __init__(self, message: str, window: tuple[int, int]):
        super().__init__(message)
        self.window = window


class BudgetError(Exception):
    """A subproblem produced no plan at all within its time budget."""

    def __init__(self, message: str, window: tuple[int, int]):
        super().__init__(message)
        self.window = window


def build_rf_subproblem(model: MipModel, fixings: dict[VarKey, float],
                        beta: int, *, time_limit_s: float | None = None,
                        gap_tol: float = 1e-6) -> SolveControl:
    """Window subproblem: given pinned setups, keep integrality through
    period beta and relax every later setup."""
    relaxed = {
        k for k in model.keys
        if k.role == "y" and k.period > beta and k not in fixings
    }
    return SolveControl(fixings=dict(fixings), relaxed=relaxed,
                        time_limit_s=time_limit_s, gap_tol=gap_tol)


def relax_and_fix(instance: Instance, model: MipModel, *,
                  window: int = 5, fix_step: int = 3,
                  budget_s: float = 60.0, strategy: str = "S1",
                  gap_tol: float = 1e-6):
    """Construct a plan window by window.

    Returns (solution, elapsed_s, log).  Raises ConstructionError when a
    window has no feasible completion (the instance is infeasible) and
    BudgetError when a window solve ends with no plan at all.
    """
    if not 1 <= fix_step <= window:
        raise ValueError("need window >= fix_step >= 1")
    if strategy not in ("S1", "S2"):
        raise ValueError("strategy must be S1 or S2")
    T = instance.horizon
    F = instance.num_facilities
    sub_budget = budget_s / math.ceil(T / fix_step)
    fixings: dict[VarKey, float] = {}
    log: list[dict] = []
    t0 = time.perf_counter()
    alpha = 1
    while True:
        beta = min(alpha + window - 1, T)
        elapsed = time.perf_counter() - t0
        tl = max(min(sub_budget, budget_s - elapsed), MIN_SOLVE_S)
        control = build_rf_subproblem(model, fixings, beta,
                                      time_limit_s=tl, gap_tol=gap_tol)
        res = solve_mip(model, control)
        log.append({
            "stage": "rf", "alpha": alpha, "beta": beta,
            "status": res.status, "objective": res.objective,
            "nodes": res.nodes, "elapsed_s": res.elapsed_s,
        })
        if res.status in ("infeasible", "unbounded"):
            raise ConstructionError(
                f"window [{alpha}, {beta}] has no feasible completion "
                f"(strategy {strategy})", (alpha, beta))
        if res.assignment is None:
            raise BudgetError(
                f"window [{alpha}, {beta}] produced no plan within "
                f"{tl:.2f}s", (alpha, beta))
        if beta >= T:
            sol = extract_solution(instance, model, res.assignment)
            return sol, time.perf_counter() - t0, log
        hi = min(alpha + fix_step - 1, T)
        for i in range(F):
            for t in range(alpha, hi + 1):
                key = VarKey("y", i, t)
                v = res.assignment[model.col[key]]
                if strategy == "S1":
                    if v >= 0.5:
                        fixings[key] = 1.0
                else:
                    fixings[key] = 1.0 if v >= 0.5 else 0.0
        alpha += fix_step


def build_fo_subproblem(instance: Instance, model: MipModel, best: Solution,
                        alpha: int, beta: int, *,
                        time_limit_s: float | None = None,
                        gap_tol: float = 1e-6) -> SolveControl:
    """Window subproblem: pin setups outside [alpha, beta] to the incumbent
    plan and seed the solver with that plan."""
    fixings = {}
    for i in range(instance.num_facilities):
        for t in range(1, instance.horizon + 1):
            if alpha <= t <= beta:
                continue
            fixings[VarKey("y", i, t)] = float(round(best.y[i, t - 1]))
    warm = solution_to_assignment(instance, model, best)
    return SolveControl(fixings=fixings, warm_start=warm,
                        time_limit_s=time_limit_s, gap_tol=gap_tol)


def fix_and_optimize(instance: Instance, model: MipModel, initial: Solution, *,
                     window_min: int = 5, fix_min: int = 3,
                     window_step: int = 0, fix_step: int = 1,
                     min_rounds: int = 2, budget_s: float = 540.0,
                     gap_tol: float = 1e-6):
    """Improve an existing plan by re-optimizing sliding windows.

    Returns (solution, rounds, log).  The incumbent only ever changes to a
    strictly cheaper plan, so the cost trajectory is non-increasing and the
    result is never worse than `initial`.
    """
    if not 1 <= fix_min <= window_min:
        raise ValueError("need window_min >= fix_min >= 1")
    T = instance.horizon
    k = window_min
    kf = fix_min
    sub_budget = budget_s / (min_rounds * math.ceil(T / fix_min))
    best = initial
    z_best = initial.objective
    rounds = 0
    log: list[dict] = []
    t0 = time.perf_counter()
    out_of_time = False
    while True:
        rounds += 1
        z_round_start = z_best
        alpha = 1
        while True:
            elapsed = time.perf_counter() - t0
            if elapsed >= budget_s:
                out_of_time = True
                break
            beta = min(alpha + k - 1, T)
            tl = max(min(sub_budget, budget_s - elapsed), MIN_SOLVE_S)
            control = build_fo_subproblem(instance, model, best, alpha, beta,
                                          time_limit_s=tl, gap_tol=gap_tol)
            res = solve_mip(model, control)
            log.append({
                "stage": "fo", "round": rounds, "alpha": alpha, "beta": beta,
                "status": res.status, "objective": res.objective,
                "nodes": res.nodes, "elapsed_s": res.elapsed_s,
            })
            if res.assignment is not None and res.objective < z_best:
                cand = extract_solution(instance, model, res.assignment)
                if cand.objective < z_best:
                    best = cand
                    z_best = cand.objective
            if beta >= T:
                break
            alpha = min(alpha + kf, T)
        if out_of_time:
            break
        if z_best < z_round_start:
            continue  # improving round: sweep again at the same geometry
        if k >= T:
            break  # non-improving at full width
        k += window_step
        kf += fix_step
        if k >= T:
            # the grown window now covers the horizon: one full-width solve
            # with everything that is left on the clock
            sub_budget = max(budget_s - (time.perf_counter() - t0), MIN_SOLVE_S)
        if time.perf_counter() - t0 >= budget_s:
            break
    return best, rounds, log


@dataclass
class RunReport:
    """What one hybrid run did, ready for JSON serialization."""

    instance_id: str
    params: dict
    rf_cost: float
    final_cost: float
    rf_seconds: float
    fo_seconds: float
    fo_rounds: int
    subproblem_log: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "params": self.params,
            "rf_cost": self.rf_cost,
            "final_cost": self.final_cost,
            "rf_seconds": self.rf_seconds,
            "fo_seconds": self.fo_seconds,
            "fo_rounds": self.fo_rounds,
            "subproblem_log": self.subproblem_log,
        }


def hybrid(instance: Instance, params: HeuristicParams | None = None):
    """Relax-and-fix a plan, then fix-and-optimize it within the total budget.

    Returns (solution, RunReport).
    """
    params = params or HeuristicParams()
    t0 = time.perf_counter()
    model = build_model(instance, params.formulation)
    rf_budget = min(params.resolved_rf_budget(), params.total_budget_s)
    rf_sol, rf_seconds, rf_log = relax_and_fix(
        instance, model,
        window=params.rf_window, fix_step=params.rf_fix,
        budget_s=rf_budget, strategy=params.rf_strategy,
        gap_tol=params.gap_tol,
    )
    fo_budget = params.total_budget_s - (time.perf_counter() - t0)
    if fo_budget > MIN_SOLVE_S:
        t_fo = time.perf_counter()
        fo_sol, fo_rounds, fo_log = fix_and_optimize(
            instance, model, rf_sol,
            window_min=params.fo_window_min, fix_min=params.fo_fix_min,
            window_step=params.fo_window_step, fix_step=params.fo_fix_step,
            min_rounds=params.fo_min_rounds, budget_s=fo_budget,
            gap_tol=params.gap_tol,
        )
        fo_seconds = time.perf_counter() - t_fo
    else:
        fo_sol, fo_rounds, fo_log, fo_seconds = rf_sol, 0, [], 0.0

    report = RunReport(
        instance_id=str(instance.meta.get("instance_id", "")),
        params={
            "rf_window": params.rf_window, "rf_fix": params.rf_fix,
            "rf_budget_s": rf_budget, "rf_strategy": params.rf_strategy,
            "fo_window_min": params.fo_window_min, "fo_fix_min": params.fo_fix_min,
            "fo_window_step": params.fo_window_step, "fo_fix_step": params.fo_fix_step,
            "fo_min_rounds": params.fo_min_rounds,
            "total_budget_s": params.total_budget_s,
            "formulation": params.formulation, "gap_tol": params.gap_tol,
        },
        rf_cost=rf_sol.objective,
        final_cost=fo_sol.objective,
        rf_seconds=rf_seconds,
        fo_seconds=fo_seconds,
        fo_rounds=fo_rounds,
        subproblem_log=rf_log + fo_log,
    )
    return fo_sol, report
