"""Generator recipe, seeding behavior, and JSON round trips."""

import json

import numpy as np
import pytest

from lotsizing import PLANT, Solution
from lotsizing.instances import (
    DEMAND_HI, DEMAND_LO, PLANT_HC, PLANT_SC, RETAILER_HC, RETAILER_SC,
    WAREHOUSE_HC, WAREHOUSE_SC, GenSpec, SplitMix64, assign_retailers,
    derive_storage_caps, generate, instance_from_dict, instance_to_dict,
    read_instance, read_solution, solution_from_dict, solution_to_dict,
    write_instance, write_solution,
)


def test_splitmix_deterministic_and_spread():
    a = SplitMix64(12345)
    b = SplitMix64(12345)
    seq_a = [a.next_u64() for _ in range(64)]
    seq_b = [b.next_u64() for _ in range(64)]
    assert seq_a == seq_b
    assert len(set(seq_a)) == 64
    c = SplitMix64(12346)
    assert [c.next_u64() for _ in range(64)] != seq_a

    r = SplitMix64(7)
    draws = [r.uniform(2.0, 5.0) for _ in range(500)]
    assert all(2.0 <= d < 5.0 for d in draws)
    ints = [r.randint(3, 9) for _ in range(500)]
    assert set(ints) == set(range(3, 10))


def test_balanced_assignment_counts():
    net = assign_retailers(GenSpec(num_retailers=7, num_warehouses=5,
                                   horizon=1))
    sizes = sorted((net.assignment.count(w) for w in range(5)), reverse=True)
    assert sizes == [2, 2, 1, 1, 1]


def test_unbalanced_assignment_halves():
    net = assign_retailers(GenSpec(num_retailers=8, num_warehouses=3,
                                   horizon=1, balance="unbalanced"))
    sizes = [net.assignment.count(w) for w in range(3)]
    assert sizes == [4, 2, 2]
    # every warehouse keeps at least one retailer no matter the shape
    for R, W in [(5, 4), (12, 2), (9, 9), (20, 3)]:
        net = assign_retailers(GenSpec(num_retailers=R, num_warehouses=W,
                                       horizon=1, balance="unbalanced"))
        assert min(net.assignment.count(w) for w in range(W)) >= 1


def test_generate_recipe_ranges():
    spec = GenSpec(num_retailers=10, num_warehouses=2, horizon=6, seed=42,
                   plant_capacity_factor=2.0)
    inst = generate(spec)
    net = inst.network
    assert inst.demand.shape == (10, 6)
    assert np.all((inst.demand >= DEMAND_LO) & (inst.demand <= DEMAND_HI))

    sc = inst.setup_cost
    assert np.all((sc[PLANT] >= PLANT_SC[0]) & (sc[PLANT] <= PLANT_SC[1]))
    for w in range(2):
        row = sc[net.warehouse_facility(w)]
        assert np.all((row >= WAREHOUSE_SC[0]) & (row <= WAREHOUSE_SC[1]))
        # setup costs are constant over time
        assert np.all(row == row[0])
    for r in range(10):
        row = sc[net.retailer_facility(r)]
        assert np.all((row >= RETAILER_SC[0]) & (row <= RETAILER_SC[1]))

    hc = inst.holding_cost
    assert np.all(hc[PLANT] == PLANT_HC)
    for w in range(2):
        assert np.all(hc[net.warehouse_facility(w)] == WAREHOUSE_HC)
    for r in range(10):
        row = hc[net.retailer_facility(r)]
        assert np.all((row >= RETAILER_HC[0]) & (row <= RETAILER_HC[1]))
        assert np.all(row == row[0])

    # plant capacity is the factor of average per-period total demand
    want = 2.0 / 6 * inst.demand.sum()
    assert np.all(inst.plant_capacity == pytest.approx(want))
    assert inst.meta["instance_id"] == "r10w2t6-bal-s42-c2-none"
    assert inst.meta["base_id"] == "r10w2t6-bal-s42"


def test_same_seed_shares_draws_across_capacity_configs():
    base = generate(GenSpec(num_retailers=6, num_warehouses=2, horizon=4,
                            seed=99))
    capped = generate(GenSpec(num_retailers=6, num_warehouses=2, horizon=4,
                              seed=99, plant_capacity_factor=1.5,
                              storage_site="warehouses",
                              storage_capacity_factor=2.0))
    assert np.array_equal(base.demand, capped.demand)
    assert np.array_equal(base.setup_cost, capped.setup_cost)
    assert np.array_equal(base.holding_cost, capped.holding_cost)
    assert base.plant_capacity is None
    assert capped.plant_capacity is not None
    assert base.meta["base_id"] == capped.meta["base_id"]


def test_generate_is_deterministic():
    spec = GenSpec(num_retailers=5, num_warehouses=2, horizon=3, seed=7,
                   balance="unbalanced")
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.demand, b.demand)
    assert np.array_equal(a.setup_cost, b.setup_cost)
    assert np.array_equal(a.holding_cost, b.holding_cost)


def test_derive_storage_caps():
    base = generate(GenSpec(num_retailers=4, num_warehouses=2, horizon=4,
                            seed=11))
    inst = derive_storage_caps(base, 1.5, "warehouses")
    net = inst.network
    assert inst.has_storage_caps()
    for w in range(2):
        wf = net.warehouse_facility(w)
        served = sum(inst.demand[r].sum() for r in range(4)
                     if net.warehouse_of(r) == wf)
        assert inst.storage_capacity[wf, 0] == pytest.approx(1.5 / 4 * served)
    # retailers stay unbounded in the warehouse variant
    assert np.all(np.isinf(inst.storage_capacity[3:, :]))
    with pytest.raises(ValueError):
        derive_storage_caps(base, 1.5, "plant")


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(num_retailers=2, num_warehouses=3, horizon=2)
    with pytest.raises(ValueError):
        GenSpec(num_retailers=3, num_warehouses=1, horizon=2,
                storage_site="warehouses")  # factor missing
    with pytest.raises(ValueError):
        GenSpec(num_retailers=3, num_warehouses=1, horizon=2,
                storage_capacity_factor=1.5)  # site missing
    with pytest.raises(ValueError):
        GenSpec(num_retailers=3, num_warehouses=1, horizon=2,
                balance="lopsided")


def test_instance_json_round_trip(tmp_path):
    for spec in [
        GenSpec(num_retailers=5, num_warehouses=2, horizon=3, seed=3),
        GenSpec(num_retailers=6, num_warehouses=3, horizon=4, seed=4,
                balance="unbalanced", plant_capacity_factor=1.5),
        GenSpec(num_retailers=4, num_warehouses=2, horizon=3, seed=5,
                storage_site="retailers", storage_capacity_factor=2.0),
    ]:
        inst = generate(spec)
        path = tmp_path / f"{inst.meta['instance_id']}.json"
        write_instance(inst, str(path))
        back = read_instance(str(path))
        assert back.horizon == inst.horizon
        assert back.network.assignment == inst.network.assignment
        assert np.array_equal(back.demand, inst.demand)
        assert np.array_equal(back.setup_cost, inst.setup_cost)
        assert np.array_equal(back.holding_cost, inst.holding_cost)
        if inst.plant_capacity is None:
            assert back.plant_capacity is None
        else:
            assert np.array_equal(back.plant_capacity, inst.plant_capacity)
        assert np.array_equal(back.storage_capacity, inst.storage_capacity)
        # a second write is byte-identical
        path2 = tmp_path / "again.json"
        write_instance(back, str(path2))
        assert path.read_text() == path2.read_text()


def test_instance_parse_errors_name_the_field():
    inst = generate(GenSpec(num_retailers=3, num_warehouses=1, horizon=2,
                            seed=1))
    data = instance_to_dict(inst)

    bad = json.loads(json.dumps(data))
    del bad["horizon"]
    with pytest.raises(ValueError, match="horizon"):
        instance_from_dict(bad)

    bad = json.loads(json.dumps(data))
    bad["demands"]["r9"] = [1, 1]
    with pytest.raises(ValueError, match="r9"):
        instance_from_dict(bad)

    bad = json.loads(json.dumps(data))
    del bad["demands"]["r1"]
    with pytest.raises(ValueError, match="r1"):
        instance_from_dict(bad)

    bad = json.loads(json.dumps(data))
    bad["setup_cost"]["w1"] = [1.0]  # wrong length
    with pytest.raises(ValueError, match="setup_cost"):
        instance_from_dict(bad)

    bad = json.loads(json.dumps(data))
    bad["format_version"] = "999"
    with pytest.raises(ValueError, match="format_version"):
        instance_from_dict(bad)


def test_solution_json_round_trip(tmp_path):
    from lotsizing import SolveControl, build_model, extract_solution, solve_mip
    inst = generate(GenSpec(num_retailers=3, num_warehouses=1, horizon=3,
                            seed=21))
    model = build_model(inst, "standard")
    res = solve_mip(model, SolveControl(gap_tol=0.0))
    sol = extract_solution(inst, model, res.assignment)
    path = tmp_path / "sol.json"
    write_solution(inst, sol, str(path))
    back = read_solution(str(path), inst)
    assert back.objective == sol.objective
    assert np.array_equal(back.y, sol.y)
    assert np.array_equal(back.x, sol.x)
    assert np.array_equal(back.s, sol.s)


def test_solution_parse_errors():
    inst = generate(GenSpec(num_retailers=3, num_warehouses=1, horizon=2,
                            seed=2))
    F, T = inst.num_facilities, inst.horizon
    sol = Solution(y=np.zeros((F, T)), x=np.zeros((F, T)),
                   s=np.zeros((F, T)), objective=0.0)
    data = solution_to_dict(inst, sol)

    bad = json.loads(json.dumps(data))
    del bad["y"]["p"]
    with pytest.raises(ValueError, match="p"):
        solution_from_dict(bad, inst)

    bad = json.loads(json.dumps(data))
    bad["x"]["r2"] = [0.0]
    with pytest.raises(ValueError, match="r2"):
        solution_from_dict(bad, inst)


def test_mixed_storage_rows_round_trip():
    # finite caps on some periods only must survive the trip through JSON
    inst = generate(GenSpec(num_retailers=3, num_warehouses=1, horizon=3,
                            seed=8, storage_site="retailers",
                            storage_capacity_factor=1.5))
    caps = inst.storage_capacity.copy()
    caps[2, 1] = np.inf  # poke a hole in one retailer's cap row
    mixed = type(inst)(network=inst.network, horizon=inst.horizon,
                       demand=inst.demand, setup_cost=inst.setup_cost,
                       holding_cost=inst.holding_cost, storage_capacity=caps,
                       meta=dict(inst.meta))
    back = instance_from_dict(instance_to_dict(mixed))
    assert np.array_equal(back.storage_capacity, mixed.storage_capacity)
