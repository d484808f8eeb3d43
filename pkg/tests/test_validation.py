"""Feasibility checker, enumeration oracle, and the percent metrics."""

import numpy as np
import pytest

from lotsizing import (
    SolveControl, build_model, check_feasibility, deviation,
    exact_optimum_enumerate, extract_solution, improvement, optimality_gap,
    solve_mip,
)
from lotsizing.instances import GenSpec, generate
from lotsizing.validation import FAMILIES

from conftest import TINY_OPT, build_tiny, random_feasible


def test_tiny_enumeration_matches_frozen_optimum():
    best = exact_optimum_enumerate(build_tiny())
    assert best is not None
    assert best.objective == pytest.approx(TINY_OPT, abs=1e-9)
    # the optimal plan produces everything in period 1 and stores
    # retailer 2's second-period demand upstream at the plant
    assert best.y[0, 0] == 1.0 and best.y[0, 1] == 0.0


def test_enumeration_agrees_with_branch_and_bound():
    for seed in (100, 200, 300):
        inst, best = random_feasible(seed, retailers=2, warehouses=2,
                                     horizon=2, plant_capacity_factor=2.0)
        res = solve_mip(build_model(inst, "standard"),
                        SolveControl(gap_tol=0.0))
        assert res.status == "optimal"
        assert res.objective == pytest.approx(best.objective, abs=1e-6)


def test_enumeration_reports_infeasible_as_none():
    inst = build_tiny()
    # plant can never produce enough for period 1
    tight = type(inst)(network=inst.network, horizon=2, demand=inst.demand,
                       setup_cost=inst.setup_cost,
                       holding_cost=inst.holding_cost,
                       plant_capacity=np.array([1.0, 1.0]))
    assert exact_optimum_enumerate(tight) is None


def test_enumeration_rejects_oversized_instances():
    inst = generate(GenSpec(num_retailers=10, num_warehouses=2, horizon=6,
                            seed=0))
    with pytest.raises(ValueError, match="16"):
        exact_optimum_enumerate(inst)


def test_feasibility_accepts_solver_output():
    for seed in (5, 6):
        inst, best = random_feasible(seed, retailers=2, warehouses=1,
                                     horizon=3, storage_site="retailers",
                                     storage_capacity_factor=1.5)
        report = check_feasibility(inst, best)
        assert report.feasible
        assert report.violations == []
        assert report.to_dict()["feasible"] is True


def _solved_tiny():
    inst = build_tiny()
    model = build_model(inst, "standard")
    res = solve_mip(model, SolveControl(gap_tol=0.0))
    return inst, extract_solution(inst, model, res.assignment)


def test_violation_families_are_detected():
    inst, sol = _solved_tiny()

    bad = _copy(sol)
    bad.x[1, 0] += 3.0  # breaks warehouse flow balance
    assert "balance" in _families(inst, bad)

    bad = _copy(sol)
    bad.y[0, 0] = 0.0  # production without a setup
    assert "setup-link" in _families(inst, bad)

    capped = type(inst)(network=inst.network, horizon=2, demand=inst.demand,
                        setup_cost=inst.setup_cost,
                        holding_cost=inst.holding_cost,
                        plant_capacity=np.array([6.0, 20.0]))
    best = exact_optimum_enumerate(capped)
    over = _copy(best)
    over.x[0, 0] += 10.0
    fams = _families(capped, over)
    assert "plant-capacity" in fams

    storage = np.full((4, 2), np.inf)
    storage[2, :] = 2.0
    stocked = type(inst)(network=inst.network, horizon=2, demand=inst.demand,
                         setup_cost=inst.setup_cost,
                         holding_cost=inst.holding_cost,
                         storage_capacity=storage)
    bad = _copy(sol)
    bad.s[2, 0] = 5.0
    assert "storage-capacity" in _families(stocked, bad)

    bad = _copy(sol)
    bad.s[3, 0] = -1.0
    assert "nonnegativity" in _families(inst, bad)

    bad = _copy(sol)
    bad.y[2, 1] = 0.4
    assert "binarity" in _families(inst, bad)


def test_violations_carry_location_and_residual():
    inst, sol = _solved_tiny()
    bad = _copy(sol)
    bad.s[3, 1] = -2.5
    report = check_feasibility(inst, bad)
    assert not report.feasible
    v = [v for v in report.violations if v.family == "nonnegativity"][0]
    assert v.facility == 3 and v.period == 2
    assert v.residual == pytest.approx(2.5, abs=1e-6)
    d = v.to_dict()
    assert d["family"] == "nonnegativity" and d["period"] == 2


def test_feasibility_shape_errors():
    inst, sol = _solved_tiny()
    bad = _copy(sol)
    bad.y = bad.y[:, :1]
    with pytest.raises(ValueError):
        check_feasibility(inst, bad)


def test_families_constant_is_complete():
    assert set(FAMILIES) == {
        "balance", "setup-link", "plant-capacity", "storage-capacity",
        "nonnegativity", "binarity",
    }


def test_metrics():
    assert optimality_gap(110.0, 100.0) == pytest.approx(100 * 10 / 110)
    assert optimality_gap(100.0, 105.0) == 0.0  # clamped
    assert improvement(200.0, 150.0) == pytest.approx(25.0)
    assert improvement(200.0, 250.0) == pytest.approx(-25.0)
    assert deviation(150.0, 100.0) == pytest.approx(50.0)
    assert deviation(90.0, 100.0) == pytest.approx(-10.0)  # cheaper than base
    with pytest.raises(ValueError):
        optimality_gap(0.0, 0.0)
    with pytest.raises(ValueError):
        improvement(0.0, 1.0)
    with pytest.raises(ValueError):
        deviation(1.0, 0.0)


def _copy(sol):
    from lotsizing import Solution
    return Solution(y=sol.y.copy(), x=sol.x.copy(), s=sol.s.copy(),
                    objective=sol.objective)


def _families(inst, sol):
    return check_feasibility(inst, sol).families()
