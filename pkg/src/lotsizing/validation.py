"""Solution checking, an exact enumeration oracle, and benchmark metrics.

check_feasibility re-derives every constraint family straight from the
instance data, independently of any model object, so it can vet solutions
produced by any route.  exact_optimum_enumerate brute-forces the setup
patterns of very small instances and prices each one with a plain LP,
which makes it a trustworthy reference for the branch-and-bound path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import SolveControl, VarKey, solve_lp
from .formulations import build_standard, add_storage_capacity, extract_solution
from .problem import (
    PLANT,
    Instance,
    Solution,
    aggregate_demands,
    demand_tails,
)

DEFAULT_TOL = 1e-6
ENUM_MAX_BITS = 16

FAMILIES = (
    "balance",
    "setup-link",
    "plant-capacity",
    "storage-capacity",
    "nonnegativity",
    "binarity",
)


@dataclass
class Violation:
    family: str
    facility: int
    period: int
    residual: float

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "facility": self.facility,
            "period": self.period,
            "residual": self.residual,
        }


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[Violation] = field(default_factory=list)

    def families(self) -> set[str]:
        return {v.family for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": [v.to_dict() for v in self.violations],
        }


def check_feasibility(instance: Instance, solution: Solution,
                      tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Check a plan against every constraint family of the instance.

    Families reported: balance, setup-link (positive flow needs an open
    setup), plant-capacity, storage-capacity (stock of a capacitated
    facility at most min(cap, remaining demand)), nonnegativity, binarity.
    """
    net = instance.network
    F = net.num_facilities
    T = instance.horizon
    x, s, y = solution.x, solution.s, solution.y
    for name, arr in (("x", x), ("s", s), ("y", y)):
        if np.asarray(arr).shape != (F, T):
            raise ValueError(f"solution {name} has shape {np.asarray(arr).shape}, "
                             f"expected {(F, T)}")
    agg = aggregate_demands(instance)
    tails = demand_tails(agg)
    out: list[Violation] = []

    for i in range(F):
        children = net.children(i)
        for t in range(1, T + 1):
            prev = s[i, t - 2] if t > 1 else 0.0
            outflow = (
                sum(x[j, t - 1] for j in children) if children else agg[i, t - 1]
            )
            resid = prev + x[i, t - 1] - outflow - s[i, t - 1]
            if abs(resid) > tol:
                out.append(Violation("balance", i, t, float(abs(resid))))

            if x[i, t - 1] > tol and y[i, t - 1] < 1.0 - tol:
                out.append(Violation("setup-link", i, t, float(x[i, t - 1])))

            if i == PLANT and instance.plant_capacity is not None:
                over = x[i, t - 1] - instance.plant_capacity[t - 1]
                if over > tol:
                    out.append(Violation("plant-capacity", i, t, float(over)))

            if i != PLANT and np.isfinite(instance.storage_capacity[i, t - 1]):
                cap = min(instance.storage_capacity[i, t - 1], tails[i, t - 1])
                over = s[i, t - 1] - cap
                if over > tol:
                    out.append(Violation("storage-capacity", i, t, float(over)))

            for arr, val in (("x", x[i, t - 1]), ("s", s[i, t - 1])):
                if val < -tol:
                    out.append(Violation("nonnegativity", i, t, float(-val)))

            bin_dist = min(abs(y[i, t - 1]), abs(y[i, t - 1] - 1.0))
            if bin_dist > tol:
                out.append(Violation("binarity", i, t, float(bin_dist)))

    return FeasibilityReport(feasible=not out, violations=out)


def exact_optimum_enumerate(instance: Instance,
                            tie_tol: float = 1e-9) -> Solution | None:
    """Globally optimal plan by trying every setup pattern, or None if the
    instance is infeasible.

    Only for very small instances (at most 16 setup variables).  Each
    pattern that passes a cheap cumulative-supply screen gets its flows
    priced by an LP with all setups pinned; the best priced pattern wins,
    first one encountered on ties.
    """
    F = instance.num_facilities
    T = instance.horizon
    nbits = F * T
    if nbits > ENUM_MAX_BITS:
        raise ValueError(f"enumeration limited to {ENUM_MAX_BITS} setup variables, "
                         f"instance has {nbits}")

    model = build_standard(instance)
    if instance.has_storage_caps():
        model = add_storage_capacity(model, instance)

    agg = aggregate_demands(instance)
    caps = demand_tails(agg)  # per-period inflow limit when the setup is open
    if instance.plant_capacity is not None:
        caps = caps.copy()
        caps[PLANT] = np.minimum(caps[PLANT], instance.plant_capacity)

    npat = 1 << nbits
    idx = np.arange(npat, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(nbits, dtype=np.uint32)) & 1).astype(np.float64)
    patterns = bits.reshape(npat, F, T)
    # a pattern can only work if, at every facility, what the open setups
    # let in by period t covers the demand through period t
    supply = np.cumsum(patterns * caps[None, :, :], axis=2)
    need = np.cumsum(agg, axis=1)[None, :, :]
    viable = np.all(supply >= need - 1e-9, axis=(1, 2))

    ykeys = [VarKey("y", i, t) for i in range(F) for t in range(1, T + 1)]
    best_obj = np.inf
    best_assignment = None
    for p in np.flatnonzero(viable):
        pat = patterns[p]
        fixings = {
            ykeys[i * T + (t - 1)]: pat[i, t - 1]
            for i in range(F) for t in range(1, T + 1)
        }
        res = solve_lp(model, SolveControl(fixings=fixings))
        if res.status == "optimal" and res.objective < best_obj - tie_tol:
            best_obj = res.objective
            best_assignment = res.assignment
    if best_assignment is None:
        return None
    return extract_solution(instance, model, best_assignment)


# -- benchmark metrics -------------------------------------------------------


def optimality_gap(best: float, bound: float) -> float:
    """Percent gap of a cost against a lower bound, clamped at 0."""
    if not best > 0:
        raise ValueError("best must be positive")
    return max(0.0, 100.0 * (best - bound) / best)


def improvement(reference: float, candidate: float) -> float:
    """Percent cost reduction of candidate relative to reference."""
    if not reference > 0:
        raise ValueError("reference must be positive")
    return 100.0 * (reference - candidate) / reference


def deviation(value: float, baseline: float) -> float:
    """Percent cost change against a baseline; negative means cheaper."""
    if not baseline > 0:
        raise ValueError("baseline must be positive")
    return 100.0 * (value - baseline) / baseline
