"""Shared fixtures: a tiny hand-checked instance and random-instance helpers.

The tiny instance is small enough to verify by hand and by exhaustive
enumeration; its optimum and relaxation values are frozen in the tests
that use it.  Random helpers rejection-sample until the instance is
feasible (a plant capacity that is too tight is the only way generation
can produce an infeasible instance).
"""

import numpy as np
import pytest

from lotsizing import (
    Instance, SolveControl, SupplyNetwork, build_model, extract_solution,
    solve_mip,
)
from lotsizing.instances import GenSpec, generate
from lotsizing.validation import ENUM_MAX_BITS, exact_optimum_enumerate


def build_tiny():
    """1 plant, 1 warehouse, 2 retailers, 2 periods; optimum 120.5.

    Retailer demands [[5, 5], [0, 10]].  Setup costs 100/10/1/1 push all
    production into period 1; holding costs 0.25/0.5/1/1 make carrying at
    the plant cheapest, so the optimum stores retailer 2's period-2 demand
    upstream: y = plant 1, warehouse both periods, r1 period 1, r2 both.
    """
    network = SupplyNetwork(num_warehouses=1, num_retailers=2,
                            assignment=(0, 0))
    demand = np.array([[5, 5], [0, 10]], dtype=np.int64)
    setup = np.array([[100.0, 100.0], [10.0, 10.0],
                      [1.0, 1.0], [1.0, 1.0]])
    holding = np.array([[0.25, 0.25], [0.5, 0.5],
                        [1.0, 1.0], [1.0, 1.0]])
    return Instance(network=network, horizon=2, demand=demand,
                    setup_cost=setup, holding_cost=holding,
                    meta={"instance_id": "tiny1"})


TINY_OPT = 120.5
TINY_LP_STANDARD = 118.75
TINY_LP_ECHELON = 120.5


@pytest.fixture
def tiny():
    return build_tiny()


def solve_exact(instance):
    """Optimal solution via enumeration when small enough, else exact branch
    and bound; None when the instance is infeasible."""
    if instance.num_facilities * instance.horizon <= ENUM_MAX_BITS:
        return exact_optimum_enumerate(instance)
    model = build_model(instance, "standard")
    res = solve_mip(model, SolveControl(gap_tol=0.0))
    if res.status != "optimal":
        return None
    return extract_solution(instance, model, res.assignment)


def random_feasible(seed, retailers=2, warehouses=1, horizon=2,
                    plant_capacity_factor=None, storage_site="none",
                    storage_capacity_factor=None, max_tries=40):
    """Generate instances, stepping the seed until one is feasible.
    Returns (instance, optimal_solution)."""
    for k in range(max_tries):
        spec = GenSpec(num_retailers=retailers, num_warehouses=warehouses,
                       horizon=horizon, seed=seed + k,
                       plant_capacity_factor=plant_capacity_factor,
                       storage_site=storage_site,
                       storage_capacity_factor=storage_capacity_factor)
        instance = generate(spec)
        best = solve_exact(instance)
        if best is not None:
            return instance, best
    raise RuntimeError(f"no feasible instance near seed {seed}")


def tiny_grid(count, seed_base=0):
    """Rotating mix of sizes and capacity configurations, all feasible.

    Kept small enough for the enumeration oracle (at most 16 setup bits).
    """
    out = []
    sizes = [(1, 1, 2), (2, 1, 2), (2, 2, 3)]
    plant = [None, 2.0, 1.5]
    storage = [("none", None), ("warehouses", 1.5), ("retailers", 2.0)]
    seed = seed_base
    for k in range(count):
        R, W, T = sizes[k % 3]
        pcf = plant[k % 3]
        site, csf = storage[(k + 1) % 3]
        if W > R:
            W = R
        inst, best = random_feasible(
            seed, retailers=R, warehouses=W, horizon=T,
            plant_capacity_factor=pcf, storage_site=site,
            storage_capacity_factor=csf)
        out.append((inst, best))
        seed = int(inst.meta["seed"]) + 1
    return out
