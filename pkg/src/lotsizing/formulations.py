"""MIP formulations of the planning problem.

Two equivalent models are provided.  The standard one tracks the physical
stock s at every facility.  The echelon one replaces s with echelon stock I
(own stock plus everything downstream) and adds the classic (l,S)-style
lower bounds on setups, which makes its LP relaxation much stronger; that is
the formulation the heuristics use by default.

Both share the x (quantity produced or received) and y (setup) variables.
Setup rows bound each x by the demand its facility still has to see, so an
open setup never allows more than the remaining need; plant production is
additionally capped by the per-period capacity when one is set.
"""

from __future__ import annotations

import numpy as np

from .engine import MipModel, VarKey
from .problem import (
    PLANT,
    Instance,
    Solution,
    aggregate_demands,
    demand_tails,
    echelon_stock,
    physical_stock,
    total_cost,
)

OBJ_MATCH_TOL = 1e-5
STOCK_TOL = 1e-6


class AssignmentError(Exception):
    """An assignment does not decode into a valid plan."""


def _add_shared_vars(m: MipModel, instance: Instance, stock_role: str,
                     stock_obj: np.ndarray):
    F = instance.num_facilities
    T = instance.horizon
    for i in range(F):
        for t in range(1, T + 1):
            m.add_var(VarKey("x", i, t))
    for i in range(F):
        for t in range(1, T + 1):
            m.add_var(VarKey(stock_role, i, t), obj=stock_obj[i, t - 1])
    for i in range(F):
        for t in range(1, T + 1):
            m.add_var(VarKey("y", i, t), lb=0.0, ub=1.0,
                      obj=instance.setup_cost[i, t - 1], binary=True)


def _add_setup_rows(m: MipModel, instance: Instance, tails: np.ndarray):
    F = instance.num_facilities
    T = instance.horizon
    for i in range(F):
        for t in range(1, T + 1):
            cap = tails[i, t - 1]
            if i == PLANT and instance.plant_capacity is not None:
                cap = min(cap, instance.plant_capacity[t - 1])
            m.add_row(f"link_{i}_{t}",
                      [(VarKey("x", i, t), 1.0), (VarKey("y", i, t), -cap)],
                      "<=", 0.0)


def build_standard(instance: Instance) -> MipModel:
    """Physical-stock model: flow balance at every facility plus setup rows."""
    net = instance.network
    T = instance.horizon
    agg = aggregate_demands(instance)
    tails = demand_tails(agg)

    m = MipModel()
    _add_shared_vars(m, instance, "s", instance.holding_cost)

    for i in range(net.num_facilities):
        children = net.children(i)
        for t in range(1, T + 1):
            coeffs = [(VarKey("x", i, t), 1.0), (VarKey("s", i, t), -1.0)]
            if t > 1:
                coeffs.append((VarKey("s", i, t - 1), 1.0))
            rhs = 0.0
            if children:
                coeffs.extend((VarKey("x", j, t), -1.0) for j in children)
            else:
                rhs = float(agg[i, t - 1])  # retailer consumes its demand
            m.add_row(f"bal_{i}_{t}", coeffs, "=", rhs)

    _add_setup_rows(m, instance, tails)
    return m


def build_echelon(instance: Instance) -> MipModel:
    """Echelon-stock model with (l,S)-style setup lower bounds.

    Holding costs turn into echelon increments (a facility pays its own rate
    minus its supplier's), balance rows become single-facility recursions on
    I, and nesting rows keep each facility's echelon stock at least the sum
    of its children's.
    """
    net = instance.network
    T = instance.horizon
    agg = aggregate_demands(instance)
    tails = demand_tails(agg)

    ech_hc = instance.holding_cost.copy()
    for w in range(net.num_warehouses):
        ech_hc[net.warehouse_facility(w)] -= instance.holding_cost[PLANT]
    for r in range(net.num_retailers):
        ech_hc[net.retailer_facility(r)] -= instance.holding_cost[net.warehouse_of(r)]

    m = MipModel()
    _add_shared_vars(m, instance, "I", ech_hc)

    for i in range(net.num_facilities):
        for t in range(1, T + 1):
            coeffs = [(VarKey("x", i, t), 1.0), (VarKey("I", i, t), -1.0)]
            if t > 1:
                coeffs.append((VarKey("I", i, t - 1), 1.0))
            m.add_row(f"ebal_{i}_{t}", coeffs, "=", float(agg[i, t - 1]))

    for i in range(1 + net.num_warehouses):
        children = net.children(i)
        for t in range(1, T + 1):
            coeffs = [(VarKey("I", i, t), 1.0)]
            coeffs.extend((VarKey("I", j, t), -1.0) for j in children)
            m.add_row(f"nest_{i}_{t}", coeffs, ">=", 0.0)

    # for every window t..l: stock entering t plus setups inside the window
    # (each worth the demand from its period to l) must cover demand t..l
    for i in range(net.num_facilities):
        cum = np.concatenate(([0.0], np.cumsum(agg[i])))
        for t in range(1, T + 1):
            for l in range(t, T + 1):
                coeffs = []
                if t > 1:
                    coeffs.append((VarKey("I", i, t - 1), 1.0))
                for u in range(t, l + 1):
                    d_ul = cum[l] - cum[u - 1]
                    coeffs.append((VarKey("y", i, u), d_ul))
                m.add_row(f"ls_{i}_{t}_{l}", coeffs, ">=", cum[l] - cum[t - 1])

    _add_setup_rows(m, instance, tails)
    return m


def _is_echelon(model: MipModel) -> bool:
    return VarKey("I", 0, 1) in model.col


def add_storage_capacity(model: MipModel, instance: Instance) -> MipModel:
    """Return a copy of the model with stock caps applied.

    A capacitated facility may end a period with at most min(cap, remaining
    demand) units.  On the standard model that is a bound on s; on the
    echelon model retailer caps are bounds on I and warehouse caps become
    rows on I minus the children's I.  Uncapacitated facilities are left
    untouched.
    """
    net = instance.network
    T = instance.horizon
    tails = demand_tails(aggregate_demands(instance))
    echelon = _is_echelon(model)
    m = model.copy_unfrozen()
    for i in range(1, net.num_facilities):
        for t in range(1, T + 1):
            cap = instance.storage_capacity[i, t - 1]
            if not np.isfinite(cap):
                continue
            bound = float(min(cap, tails[i, t - 1]))
            if not echelon:
                m.set_bounds(VarKey("s", i, t), ub=bound)
            elif net.is_retailer(i):
                m.set_bounds(VarKey("I", i, t), ub=bound)
            else:
                coeffs = [(VarKey("I", i, t), 1.0)]
                coeffs.extend((VarKey("I", j, t), -1.0) for j in net.children(i))
                m.add_row(f"cap_{i}_{t}", coeffs, "<=", bound)
    return m


def build_model(instance: Instance, formulation: str) -> MipModel:
    """Build the requested formulation, with stock caps when the instance has any."""
    if formulation == "standard":
        m = build_standard(instance)
    elif formulation == "echelon":
        m = build_echelon(instance)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    if instance.has_storage_caps():
        m = add_storage_capacity(m, instance)
    return m


def _grid(model: MipModel, assignment: np.ndarray, role: str, F: int, T: int) -> np.ndarray:
    out = np.empty((F, T))
    for i in range(F):
        for t in range(1, T + 1):
            out[i, t - 1] = assignment[model.col[VarKey(role, i, t)]]
    return out


def extract_solution(instance: Instance, model: MipModel,
                     assignment: np.ndarray) -> Solution:
    """Decode a model assignment into a plan and re-price it.

    Echelon stock is converted back to physical stock; a reconstruction
    that goes negative beyond tolerance means the assignment was not
    feasible for the model and raises.  The recomputed cost must agree
    with the model's objective value.
    """
    assignment = np.asarray(assignment, dtype=np.float64)
    F = instance.num_facilities
    T = instance.horizon
    x = _grid(model, assignment, "x", F, T)
    y = _grid(model, assignment, "y", F, T)
    if _is_echelon(model):
        s = physical_stock(instance, _grid(model, assignment, "I", F, T))
    else:
        s = _grid(model, assignment, "s", F, T)
    if np.min(s) < -STOCK_TOL or np.min(x) < -STOCK_TOL:
        raise AssignmentError(
            f"negative stock or flow beyond tolerance (min s {np.min(s):.3e}, "
            f"min x {np.min(x):.3e})"
        )
    x = np.maximum(x, 0.0) + 0.0
    s = np.maximum(s, 0.0) + 0.0
    y = np.clip(y, 0.0, 1.0) + 0.0  # + 0.0 turns -0.0 into 0.0

    model.freeze()
    model_obj = float(model.obj @ assignment)
    sol = Solution(y=y, x=x, s=s, objective=0.0)
    sol.objective = total_cost(instance, sol)
    if abs(sol.objective - model_obj) > OBJ_MATCH_TOL:
        raise AssignmentError(
            f"recomputed cost {sol.objective!r} does not match model objective "
            f"{model_obj!r}"
        )
    return sol


def solution_to_assignment(instance: Instance, model: MipModel,
                           solution: Solution) -> np.ndarray:
    """Encode a plan as a model assignment vector (used for warm starts)."""
    model.freeze()
    F = instance.num_facilities
    T = instance.horizon
    v = np.zeros(model.num_vars)
    stock = (
        echelon_stock(instance, solution.s) if _is_echelon(model) else solution.s
    )
    stock_role = "I" if _is_echelon(model) else "s"
    for i in range(F):
        for t in range(1, T + 1):
            v[model.col[VarKey("x", i, t)]] = solution.x[i, t - 1]
            v[model.col[VarKey(stock_role, i, t)]] = stock[i, t - 1]
            v[model.col[VarKey("y", i, t)]] = solution.y[i, t - 1]
    return v
