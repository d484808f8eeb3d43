"""Random instance generation and JSON serialization.

Instances follow a fixed recipe: integer retailer demands U[5, 100] per
period; time-invariant setup costs U[30000, 45000] at the plant,
U[1500, 4500] per warehouse, U[5, 100] per retailer; holding costs 0.25 at
the plant, 0.5 at warehouses, U[0.5, 1.0] per retailer.  A plant capacity
factor C turns into the per-period cap (C/T) * total demand; a storage
capacity factor C_s caps warehouse or retailer stock at (C_s/T) times that
facility's own total demand.

Randomness comes from a splitmix64 generator with one independent stream
per field group (demands, then setup costs, then holding costs), so adding
a later field can never shift earlier draws, and capacity factors draw
nothing at all: every capacity configuration of a seed shares the same
demands and costs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .problem import PLANT, Instance, Solution, SupplyNetwork, aggregate_demands

_MASK64 = (1 << 64) - 1

DEMAND_LO, DEMAND_HI = 5, 100
PLANT_SC = (30000.0, 45000.0)
WAREHOUSE_SC = (1500.0, 4500.0)
RETAILER_SC = (5.0, 100.0)
PLANT_HC = 0.25
WAREHOUSE_HC = 0.5
RETAILER_HC = (0.5, 1.0)

FORMAT_VERSION = "1"


class SplitMix64:
    """Tiny portable 64-bit generator (splitmix64 update and finalizer)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends included."""
        return lo + self.next_u64() % (hi - lo + 1)


@dataclass
class GenSpec:
    """Everything that determines one generated instance."""

    num_retailers: int
    num_warehouses: int
    horizon: int
    balance: str = "balanced"
    plant_capacity_factor: float | None = None
    storage_capacity_factor: float | None = None
    storage_site: str = "none"
    seed: int = 0

    def __post_init__(self):
        if self.num_warehouses < 1 or self.num_retailers < self.num_warehouses:
            raise ValueError("need num_retailers >= num_warehouses >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.balance not in ("balanced", "unbalanced"):
            raise ValueError("balance must be balanced or unbalanced")
        if self.storage_site not in ("none", "warehouses", "retailers"):
            raise ValueError("storage_site must be none, warehouses or retailers")
        if (self.storage_site == "none") != (self.storage_capacity_factor is None):
            raise ValueError("storage_capacity_factor and storage_site go together")
        if self.plant_capacity_factor is not None and self.plant_capacity_factor <= 0:
            raise ValueError("plant_capacity_factor must be positive")
        if (self.storage_capacity_factor is not None
                and self.storage_capacity_factor <= 0):
            raise ValueError("storage_capacity_factor must be positive")

    def base_id(self) -> str:
        """Identity of the structure and draws, ignoring capacity factors."""
        b = "bal" if self.balance == "balanced" else "unb"
        return (f"r{self.num_retailers}w{self.num_warehouses}"
                f"t{self.horizon}-{b}-s{self.seed}")

    def instance_id(self) -> str:
        c = "inf" if self.plant_capacity_factor is None else f"{self.plant_capacity_factor:g}"
        if self.storage_site == "none":
            cs = "none"
        else:
            cs = f"{self.storage_site[0]}{self.storage_capacity_factor:g}"
        return f"{self.base_id()}-c{c}-{cs}"


def assign_retailers(spec: GenSpec) -> SupplyNetwork:
    """Map retailers to warehouses.

    Balanced: retailer r goes to warehouse r mod W, so counts differ by at
    most one.  Unbalanced: geometric halving, warehouse 0 takes about half
    of what is left, then warehouse 1 half of the rest, and so on; the last
    warehouse takes the remainder and retailers are assigned in index order.
    """
    R, W = spec.num_retailers, spec.num_warehouses
    if spec.balance == "balanced":
        assignment = tuple(r % W for r in range(R))
    else:
        counts = []
        remaining = R
        for j in range(W - 1):
            take = max(1, remaining // 2)
            take = min(take, remaining - (W - 1 - j))  # leave one per warehouse
            counts.append(take)
            remaining -= take
        counts.append(remaining)
        assignment = tuple(
            w for w, n in enumerate(counts) for _ in range(n)
        )
    return SupplyNetwork(num_warehouses=W, num_retailers=R, assignment=assignment)


def generate(spec: GenSpec) -> Instance:
    """Draw one instance from the recipe, deterministically from spec.seed."""
    net = assign_retailers(spec)
    F, T = net.num_facilities, spec.horizon

    seeder = SplitMix64(spec.seed)
    demand_rng = SplitMix64(seeder.next_u64())
    setup_rng = SplitMix64(seeder.next_u64())
    holding_rng = SplitMix64(seeder.next_u64())

    demand = np.empty((spec.num_retailers, T), dtype=np.int64)
    for r in range(spec.num_retailers):
        for t in range(T):
            demand[r, t] = demand_rng.randint(DEMAND_LO, DEMAND_HI)

    sc = np.empty(F)
    sc[PLANT] = setup_rng.uniform(*PLANT_SC)
    for w in range(net.num_warehouses):
        sc[net.warehouse_facility(w)] = setup_rng.uniform(*WAREHOUSE_SC)
    for r in range(spec.num_retailers):
        sc[net.retailer_facility(r)] = setup_rng.uniform(*RETAILER_SC)

    hc = np.empty(F)
    hc[PLANT] = PLANT_HC
    hc[1 : 1 + net.num_warehouses] = WAREHOUSE_HC
    for r in range(spec.num_retailers):
        hc[net.retailer_facility(r)] = holding_rng.uniform(*RETAILER_HC)

    plant_capacity = None
    if spec.plant_capacity_factor is not None:
        per_period = spec.plant_capacity_factor / T * float(demand.sum())
        plant_capacity = np.full(T, per_period)

    meta = {
        "instance_id": spec.instance_id(),
        "base_id": spec.base_id(),
        "seed": spec.seed,
        "balance": spec.balance,
        "plant_capacity_factor": spec.plant_capacity_factor,
        "storage_capacity_factor": spec.storage_capacity_factor,
        "storage_site": spec.storage_site,
        "generator": "splitmix64-v1",
    }
    if spec.balance == "unbalanced":
        meta["unbalanced_rule"] = "geometric-halving"

    inst = Instance(
        network=net, horizon=T, demand=demand,
        setup_cost=np.tile(sc[:, None], (1, T)),
        holding_cost=np.tile(hc[:, None], (1, T)),
        plant_capacity=plant_capacity,
        meta=meta,
    )
    if spec.storage_site != "none":
        inst = derive_storage_caps(inst, spec.storage_capacity_factor,
                                   spec.storage_site)
    return inst


def derive_storage_caps(instance: Instance, factor: float, site: str) -> Instance:
    """New instance whose warehouse or retailer stock is capped at
    (factor / T) times that facility's total demand, every period."""
    if site not in ("warehouses", "retailers"):
        raise ValueError("site must be warehouses or retailers")
    net = instance.network
    T = instance.horizon
    agg = aggregate_demands(instance)
    caps = np.full((net.num_facilities, T), np.inf)
    if site == "warehouses":
        targets = [net.warehouse_facility(w) for w in range(net.num_warehouses)]
    else:
        targets = [net.retailer_facility(r) for r in range(net.num_retailers)]
    for i in targets:
        caps[i, :] = factor / T * float(agg[i].sum())
    return Instance(
        network=net, horizon=T, demand=instance.demand.copy(),
        setup_cost=instance.setup_cost.copy(),
        holding_cost=instance.holding_cost.copy(),
        plant_capacity=(None if instance.plant_capacity is None
                        else instance.plant_capacity.copy()),
        storage_capacity=caps,
        meta=dict(instance.meta),
    )


# -- facility labels ---------------------------------------------------------


def facility_label(network: SupplyNetwork, facility: int) -> str:
    """"p" for the plant, "w1".."wW", "r1".."rR" (1-based labels)."""
    if facility == PLANT:
        return "p"
    if network.is_warehouse(facility):
        return f"w{facility}"
    return f"r{facility - network.num_warehouses}"


def _facility_index(network: SupplyNetwork, label: str, where: str) -> int:
    if label == "p":
        return PLANT
    kind, num = label[:1], label[1:]
    if kind in ("w", "r") and num.isdigit():
        n = int(num)
        if kind == "w" and 1 <= n <= network.num_warehouses:
            return n
        if kind == "r" and 1 <= n <= network.num_retailers:
            return network.num_warehouses + n
    raise ValueError(f"{where}: unknown facility label {label!r}")


# -- instance files ----------------------------------------------------------


def _cost_entry(row: np.ndarray):
    vals = [float(v) for v in row]
    return vals[0] if all(v == vals[0] for v in vals) else vals


def instance_to_dict(instance: Instance) -> dict:
    net = instance.network
    warehouses = []
    for w in range(net.num_warehouses):
        wf = net.warehouse_facility(w)
        warehouses.append({
            "id": facility_label(net, wf),
            "retailers": [facility_label(net, rf) for rf in net.children(wf)],
        })
    demands = {
        facility_label(net, net.retailer_facility(r)):
            [int(v) for v in instance.demand[r]]
        for r in range(net.num_retailers)
    }
    setup = {
        facility_label(net, i): _cost_entry(instance.setup_cost[i])
        for i in range(net.num_facilities)
    }
    holding = {
        facility_label(net, i): _cost_entry(instance.holding_cost[i])
        for i in range(net.num_facilities)
    }
    if instance.plant_capacity is None:
        plant_cap = None
    else:
        plant_cap = _cost_entry(instance.plant_capacity)
    storage = {}
    for i in range(1, net.num_facilities):
        row = instance.storage_capacity[i]
        if not np.any(np.isfinite(row)):
            continue
        if np.all(np.isfinite(row)):
            storage[facility_label(net, i)] = _cost_entry(row)
        else:
            # null marks the periods where stock is unbounded
            storage[facility_label(net, i)] = [
                None if not np.isfinite(v) else float(v) for v in row
            ]
    return {
        "format_version": FORMAT_VERSION,
        "meta": instance.meta,
        "horizon": instance.horizon,
        "warehouses": warehouses,
        "demands": demands,
        "setup_cost": setup,
        "holding_cost": holding,
        "plant_capacity": plant_cap,
        "storage_capacity": storage,
    }


def _row_from_entry(entry, T: int, where: str) -> np.ndarray:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return np.full(T, float(entry))
    if isinstance(entry, list):
        if len(entry) != T:
            raise ValueError(f"{where}: expected {T} values, got {len(entry)}")
        return np.array([float(v) for v in entry])
    raise ValueError(f"{where}: expected a number or a list of numbers")


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise ValueError("instance file must hold a JSON object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"format_version: unsupported value {version!r}")
    try:
        T = int(data["horizon"])
        raw_warehouses = data["warehouses"]
        raw_demands = data["demands"]
    except KeyError as e:
        raise ValueError(f"missing required field {e.args[0]!r}") from None
    if T < 1:
        raise ValueError("horizon: must be at least 1")
    if not raw_warehouses:
        raise ValueError("warehouses: must not be empty")

    W = len(raw_warehouses)
    seen: dict[str, int] = {}
    for w, entry in enumerate(raw_warehouses):
        wid = entry.get("id")
        if wid != f"w{w + 1}":
            raise ValueError(f"warehouses[{w}].id: expected 'w{w + 1}', got {wid!r}")
        for rid in entry.get("retailers", []):
            if rid in seen:
                raise ValueError(f"warehouses[{w}].retailers: duplicate {rid!r}")
            seen[rid] = w
    R = len(seen)
    if R == 0:
        raise ValueError("warehouses: no retailers assigned")
    assignment = []
    for r in range(R):
        rid = f"r{r + 1}"
        if rid not in seen:
            raise ValueError(f"warehouses: retailer {rid!r} missing "
                             f"(labels must be r1..r{R})")
        assignment.append(seen[rid])
    net = SupplyNetwork(num_warehouses=W, num_retailers=R,
                        assignment=tuple(assignment))

    demand = np.zeros((R, T), dtype=np.int64)
    known = {f"r{r + 1}" for r in range(R)}
    for rid in raw_demands:
        if rid not in known:
            raise ValueError(f"demands.{rid}: unknown retailer")
    for r in range(R):
        rid = f"r{r + 1}"
        if rid not in raw_demands:
            raise ValueError(f"demands.{rid}: missing")
        row = raw_demands[rid]
        if not isinstance(row, list) or len(row) != T:
            raise ValueError(f"demands.{rid}: expected a list of {T} values")
        for t, v in enumerate(row):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"demands.{rid}[{t}]: expected a nonnegative "
                                 f"integer, got {v!r}")
            demand[r, t] = v

    F = net.num_facilities
    setup = np.zeros((F, T))
    holding = np.zeros((F, T))
    for field_name, target in (("setup_cost", setup), ("holding_cost", holding)):
        raw = data.get(field_name)
        if not isinstance(raw, dict):
            raise ValueError(f"{field_name}: expected an object")
        for i in range(F):
            label = facility_label(net, i)
            if label not in raw:
                raise ValueError(f"{field_name}.{label}: missing")
            target[i] = _row_from_entry(raw[label], T, f"{field_name}.{label}")
        if np.any(target < 0):
            raise ValueError(f"{field_name}: values must be nonnegative")

    plant_cap = data.get("plant_capacity")
    plant_capacity = (
        None if plant_cap is None
        else _row_from_entry(plant_cap, T, "plant_capacity")
    )

    storage = np.full((F, T), np.inf)
    raw_storage = data.get("storage_capacity") or {}
    if not isinstance(raw_storage, dict):
        raise ValueError("storage_capacity: expected an object")
    for label, entry in raw_storage.items():
        i = _facility_index(net, label, "storage_capacity")
        if i == PLANT:
            raise ValueError("storage_capacity.p: plant stock cannot be capped")
        if isinstance(entry, list):
            entry = [np.inf if v is None else v for v in entry]
        storage[i] = _row_from_entry(entry, T, f"storage_capacity.{label}")

    return Instance(
        network=net, horizon=T, demand=demand,
        setup_cost=setup, holding_cost=holding,
        plant_capacity=plant_capacity, storage_capacity=storage,
        meta=dict(data.get("meta") or {}),
    )


def write_instance(instance: Instance, path: str):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def read_instance(path: str) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


# -- solution files ----------------------------------------------------------


def solution_to_dict(instance: Instance, solution: Solution) -> dict:
    net = instance.network
    def grid(arr):
        return {
            facility_label(net, i): [float(v) for v in arr[i]]
            for i in range(net.num_facilities)
        }
    return {
        "objective": float(solution.objective),
        "y": grid(solution.y),
        "x": grid(solution.x),
        "s": grid(solution.s),
    }


def solution_from_dict(data: dict, instance: Instance) -> Solution:
    net = instance.network
    T = instance.horizon
    out = {}
    for field_name in ("y", "x", "s"):
        raw = data.get(field_name)
        if not isinstance(raw, dict):
            raise ValueError(f"{field_name}: expected an object")
        arr = np.zeros((net.num_facilities, T))
        for i in range(net.num_facilities):
            label = facility_label(net, i)
            if label not in raw:
                raise ValueError(f"{field_name}.{label}: missing")
            arr[i] = _row_from_entry(raw[label], T, f"{field_name}.{label}")
        out[field_name] = arr
    if "objective" not in data:
        raise ValueError("objective: missing")
    return Solution(y=out["y"], x=out["x"], s=out["s"],
                    objective=float(data["objective"]))


def write_solution(instance: Instance, solution: Solution, path: str):
    with open(path, "w") as fh:
        json.dump(solution_to_dict(instance, solution), fh, indent=2)
        fh.write("\n")


def read_solution(path: str, instance: Instance) -> Solution:
    with open(path) as fh:
        return solution_from_dict(json.load(fh), instance)
