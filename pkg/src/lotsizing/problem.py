"""Core types for three-level lot sizing and replenishment planning.

The supply chain is a tree: one production plant ships to warehouses, each
warehouse ships to a fixed set of retailers, and each retailer faces a known
integer demand per period.  Every facility that produces or receives goods in
a period pays that facility's setup cost for the period, and end-of-period
stock pays a per-unit holding cost.  Production at the plant may be capped
per period, and warehouse or retailer end-of-period stock may be capped too.
Demand must be met on time (no backlogging), all stocks start at zero.

Facilities are indexed 0 .. 1+W+R-1: facility 0 is the plant, facilities
1 .. W are the warehouses, facilities W+1 .. W+R are the retailers.  Periods
are 1-based in every public API; matrices are indexed [facility, period-1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PLANT = 0


@dataclass
class SupplyNetwork:
    """Plant -> warehouse -> retailer tree.

    assignment[r] is the warehouse index (0-based, in 0..num_warehouses-1)
    serving retailer r.  Every retailer is served by exactly one warehouse.
    """

    num_warehouses: int
    num_retailers: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        if self.num_warehouses < 1 or self.num_retailers < 1:
            raise ValueError("network needs at least one warehouse and one retailer")
        self.assignment = tuple(int(a) for a in self.assignment)
        if len(self.assignment) != self.num_retailers:
            raise ValueError(
                f"assignment has {len(self.assignment)} entries for "
                f"{self.num_retailers} retailers"
            )
        for r, w in enumerate(self.assignment):
            if not 0 <= w < self.num_warehouses:
                raise ValueError(f"retailer {r} assigned to unknown warehouse {w}")

    @property
    def num_facilities(self) -> int:
        return 1 + self.num_warehouses + self.num_retailers

    def warehouse_facility(self, w: int) -> int:
        """Facility index of warehouse w (0-based warehouse number)."""
        return 1 + w

    def retailer_facility(self, r: int) -> int:
        """Facility index of retailer r (0-based retailer number)."""
        return 1 + self.num_warehouses + r

    def warehouse_of(self, r: int) -> int:
        """Facility index of the warehouse serving retailer r."""
        return 1 + self.assignment[r]

    def children(self, facility: int) -> list[int]:
        """Facility indices directly supplied by `facility` (empty for retailers)."""
        if facility == PLANT:
            return [1 + w for w in range(self.num_warehouses)]
        if facility <= self.num_warehouses:
            w = facility - 1
            return [
                self.retailer_facility(r)
                for r, a in enumerate(self.assignment)
                if a == w
            ]
        return []

    def is_warehouse(self, facility: int) -> bool:
        return 1 <= facility <= self.num_warehouses

    def is_retailer(self, facility: int) -> bool:
        return facility > self.num_warehouses


@dataclass
class Instance:
    """One planning problem.

    demand          (R, T) nonnegative integers, retailer rows only
    setup_cost      (F, T) nonnegative
    holding_cost    (F, T) nonnegative
    plant_capacity  (T,) positive, or None when production is uncapacitated
    storage_capacity (F, T) with +inf where stock is unbounded; the plant row
                    must be all +inf (plant stock is never capped), or None
                    for no storage caps at all
    """

    network: SupplyNetwork
    horizon: int
    demand: np.ndarray
    setup_cost: np.ndarray
    holding_cost: np.ndarray
    plant_capacity: np.ndarray | None = None
    storage_capacity: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        T = int(self.horizon)
        if T < 1:
            raise ValueError("horizon must be at least 1")
        self.horizon = T
        F = self.network.num_facilities
        R = self.network.num_retailers

        self.demand = np.asarray(self.demand)
        if self.demand.shape != (R, T):
            raise ValueError(f"demand shape {self.demand.shape}, expected {(R, T)}")
        if np.any(self.demand < 0):
            raise ValueError("demand must be nonnegative")
        if not np.all(self.demand == np.floor(self.demand)):
            raise ValueError("demand must be integer valued")
        self.demand = self.demand.astype(np.int64)

        self.setup_cost = np.asarray(self.setup_cost, dtype=np.float64)
        self.holding_cost = np.asarray(self.holding_cost, dtype=np.float64)
        for name, arr in (("setup_cost", self.setup_cost), ("holding_cost", self.holding_cost)):
            if arr.shape != (F, T):
                raise ValueError(f"{name} shape {arr.shape}, expected {(F, T)}")
            if np.any(arr < 0):
                raise ValueError(f"{name} must be nonnegative")

        if self.plant_capacity is not None:
            self.plant_capacity = np.asarray(self.plant_capacity, dtype=np.float64)
            if self.plant_capacity.shape != (T,):
                raise ValueError(
                    f"plant_capacity shape {self.plant_capacity.shape}, expected {(T,)}"
                )
            if np.any(self.plant_capacity <= 0):
                raise ValueError("plant_capacity must be positive")

        if self.storage_capacity is None:
            self.storage_capacity = np.full((F, T), np.inf)
        else:
            self.storage_capacity = np.asarray(self.storage_capacity, dtype=np.float64)
            if self.storage_capacity.shape != (F, T):
                raise ValueError(
                    f"storage_capacity shape {self.storage_capacity.shape}, expected {(F, T)}"
                )
            if np.any(self.storage_capacity < 0):
                raise ValueError("storage_capacity must be nonnegative")
            if np.any(np.isfinite(self.storage_capacity[PLANT])):
                raise ValueError("plant stock cannot be capped")

    @property
    def num_facilities(self) -> int:
        return self.network.num_facilities

    def has_storage_caps(self) -> bool:
        return bool(np.any(np.isfinite(self.storage_capacity)))


@dataclass
class Solution:
    """A complete plan: y (setups), x (received/produced quantity), s (end stock).

    All three are (F, T) float arrays; y entries are 0/1 up to tolerance.
    `objective` is the total setup plus holding cost.
    """

    y: np.ndarray
    x: np.ndarray
    s: np.ndarray
    objective: float


@dataclass
class HeuristicParams:
    """Knobs for the relax-and-fix / fix-and-optimize runs.

    rf_window / rf_fix      width of each relax-and-fix window and how many
                            of its leading periods get fixed (also the window
                            advance step)
    rf_budget_s             wall-clock budget for the relax-and-fix stage;
                            None means ceil(0.10 * total_budget_s)
    rf_strategy             "S1" fixes only setups at value 1, "S2" fixes the
                            whole window prefix, zeros included
    fo_window_min/fo_fix_min  initial fix-and-optimize window width and step
    fo_window_step/fo_fix_step  growth added after a non-improving round
    fo_min_rounds           round count used to size per-solve budgets
    total_budget_s          wall-clock budget for the whole hybrid run
    formulation             "standard" or "echelon" model for the subproblems
    """

    rf_window: int = 5
    rf_fix: int = 3
    rf_budget_s: float | None = None
    rf_strategy: str = "S1"
    fo_window_min: int = 5
    fo_fix_min: int = 3
    fo_window_step: int = 0
    fo_fix_step: int = 1
    fo_min_rounds: int = 2
    total_budget_s: float = 600.0
    formulation: str = "echelon"
    gap_tol: float = 1e-6

    def __post_init__(self):
        if not 1 <= self.rf_fix <= self.rf_window:
            raise ValueError("need rf_window >= rf_fix >= 1")
        if not 1 <= self.fo_fix_min <= self.fo_window_min:
            raise ValueError("need fo_window_min >= fo_fix_min >= 1")
        if self.fo_window_step < 0 or self.fo_fix_step < 0:
            raise ValueError("growth steps must be nonnegative")
        if self.fo_min_rounds < 1:
            raise ValueError("fo_min_rounds must be at least 1")
        if self.total_budget_s <= 0:
            raise ValueError("total_budget_s must be positive")
        if self.rf_budget_s is not None and self.rf_budget_s <= 0:
            raise ValueError("rf_budget_s must be positive")
        if self.rf_strategy not in ("S1", "S2"):
            raise ValueError("rf_strategy must be S1 or S2")
        if self.formulation not in ("standard", "echelon"):
            raise ValueError("formulation must be standard or echelon")
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")

    def resolved_rf_budget(self) -> float:
        if self.rf_budget_s is not None:
            return float(self.rf_budget_s)
        return float(math.ceil(0.10 * self.total_budget_s))


def aggregate_demands(instance: Instance) -> np.ndarray:
    """Demand seen by each facility per period, as an (F, T) float array.

    A retailer sees its own demand, a warehouse the sum over its retailers,
    the plant the sum over everyone.
    """
    net = instance.network
    agg = np.zeros((net.num_facilities, instance.horizon))
    for r in range(net.num_retailers):
        row = instance.demand[r].astype(np.float64)
        agg[net.retailer_facility(r)] = row
        agg[net.warehouse_of(r)] += row
    agg[PLANT] = instance.demand.sum(axis=0)
    return agg


def cumulative_demand(instance: Instance, facility: int, t: int, k: int) -> float:
    """Demand seen by `facility` summed over periods t..k (1-based, inclusive)."""
    if not 1 <= t <= k <= instance.horizon:
        raise ValueError(f"need 1 <= t <= k <= {instance.horizon}, got t={t} k={k}")
    agg = aggregate_demands(instance)
    return float(agg[facility, t - 1 : k].sum())


def demand_tails(aggregate: np.ndarray) -> np.ndarray:
    """tails[i, t-1] = demand of facility i summed over periods t..T."""
    return np.cumsum(aggregate[:, ::-1], axis=1)[:, ::-1]


def total_cost(instance: Instance, solution: Solution) -> float:
    """Setup cost of every switched-on period plus holding cost of all stock."""
    return float(
        np.sum(instance.setup_cost * solution.y)
        + np.sum(instance.holding_cost * solution.s)
    )


def echelon_stock(instance: Instance, s: np.ndarray) -> np.ndarray:
    """Echelon stock per facility: own stock plus all stock downstream of it.

    For a retailer that is just s; for a warehouse it adds its retailers'
    stock; for the plant it adds everything.
    """
    net = instance.network
    ech = np.array(s, dtype=np.float64)
    for w in range(net.num_warehouses):
        wf = net.warehouse_facility(w)
        for rf in net.children(wf):
            ech[wf] += s[rf]
    ech[PLANT] = s[PLANT] + np.sum(ech[1 : 1 + net.num_warehouses], axis=0)
    return ech


def physical_stock(instance: Instance, echelon: np.ndarray) -> np.ndarray:
    """Invert echelon_stock: facility stock = echelon stock minus children's."""
    net = instance.network
    s = np.array(echelon, dtype=np.float64)
    s[PLANT] = echelon[PLANT] - np.sum(echelon[1 : 1 + net.num_warehouses], axis=0)
    for w in range(net.num_warehouses):
        wf = net.warehouse_facility(w)
        for rf in net.children(wf):
            s[wf] -= echelon[rf]
    return s
