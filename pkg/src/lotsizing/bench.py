"""Batch benchmark runner and result files.

A run takes a list of generation specs and a list of methods, solves every
(instance, method) pair, and appends one CSV row per pair as soon as it
finishes, so a killed run keeps everything it already produced.  Floats are
written with repr, which makes parse(emit(rows)) bit-exact, and summaries
are plain arithmetic means over the parsed rows, so re-aggregating a CSV
always reproduces the published numbers.

Methods: "rffo" is the relax-and-fix plus fix-and-optimize hybrid,
"mip-es" and "mip-std" run branch and bound on the echelon or standard
formulation with the whole budget.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from time import perf_counter

import numpy as np

from .engine import SolveControl, solve_mip
from .formulations import build_model
from .heuristics import BudgetError, ConstructionError, hybrid
from .instances import GenSpec, generate, write_instance
from .problem import HeuristicParams, Instance
from .validation import deviation, improvement, optimality_gap

RESULT_COLUMNS = (
    "instance_id", "method", "status", "best", "bound", "gap_pct",
    "elapsed_s", "rf_best", "fo_rounds",
)

SUMMARY_COLUMNS = (
    "group", "n", "best_ref", "gap_ref", "n_opt_ref",
    "best_rf", "best_rffo", "gap_rffo", "impr_fo_rf", "impr_rffo_ref",
    "n_le_ref", "n_lt_ref", "fo_rounds", "note",
)

METHODS = ("rffo", "mip-es", "mip-std")


@dataclass
class ExperimentConfig:
    """One batch: which instances, which methods, how much time per run."""

    specs: list[GenSpec]
    methods: tuple[str, ...] = ("rffo",)
    budget_s: float = 10.0
    params: HeuristicParams = field(default_factory=HeuristicParams)
    out_dir: str = "bench-out"
    name: str = "results"
    write_instances: bool = False

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


def run_one(instance: Instance, method: str, budget_s: float,
            params: HeuristicParams | None = None) -> dict:
    """Solve one instance with one method and return a result row."""
    params = params or HeuristicParams()
    row = {
        "instance_id": str(instance.meta.get("instance_id", "")),
        "method": method, "status": "", "best": None, "bound": None,
        "gap_pct": None, "elapsed_s": 0.0, "rf_best": None, "fo_rounds": None,
    }
    t0 = perf_counter()
    if method == "rffo":
        run_params = replace(params, total_budget_s=budget_s)
        try:
            sol, report = hybrid(instance, run_params)
        except ConstructionError:
            row.update(status="infeasible")
            row["elapsed_s"] = perf_counter() - t0
            return row
        except BudgetError:
            row.update(status="no_solution")
            row["elapsed_s"] = perf_counter() - t0
            return row
        row.update(status="feasible", best=sol.objective,
                   rf_best=report.rf_cost, fo_rounds=report.fo_rounds)
    else:
        formulation = "echelon" if method == "mip-es" else "standard"
        model = build_model(instance, formulation)
        res = solve_mip(model, SolveControl(time_limit_s=budget_s,
                                            gap_tol=params.gap_tol))
        row.update(status=res.status, best=res.objective, bound=res.dual_bound)
        if res.objective is not None and res.dual_bound is not None \
                and res.objective > 0:
            row["gap_pct"] = optimality_gap(res.objective, res.dual_bound)
    row["elapsed_s"] = perf_counter() - t0
    return row


def _cell(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_cell(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_rows(path: str, rows: list[dict], columns=RESULT_COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in columns])


def parse_results(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [
            {c: _parse_cell(v) for c, v in zip(header, row)}
            for row in reader
        ]


def run_benchmark(config: ExperimentConfig):
    """Run the batch; returns (rows, results_csv_path, manifest_path).

    Rows land in the CSV incrementally, one flush per finished run; the
    manifest maps instance ids to their generation metadata for grouping.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    csv_path = os.path.join(config.out_dir, f"{config.name}.csv")
    manifest_path = os.path.join(config.out_dir, f"{config.name}-instances.json")

    manifest = {}
    rows = []
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        fh.flush()
        for spec in config.specs:
            instance = generate(spec)
            iid = instance.meta["instance_id"]
            manifest[iid] = dict(instance.meta)
            if config.write_instances:
                write_instance(instance,
                               os.path.join(config.out_dir, f"{iid}.json"))
            for method in config.methods:
                row = run_one(instance, method, config.budget_s, config.params)
                rows.append(row)
                writer.writerow([_cell(row.get(c)) for c in RESULT_COLUMNS])
                fh.flush()
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return rows, csv_path, manifest_path


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return math.fsum(vals) / len(vals)


def emit_summary(rows: list[dict], group_of: dict[str, str]) -> list[dict]:
    """Per-group averages in the usual comparison-table layout.

    group_of maps instance_id to a group label.  The reference method is
    mip-es when present, else mip-std.  Groups missing the method pair the
    comparison needs keep a row with a note instead of numbers.
    """
    methods = {r["method"] for r in rows}
    ref_method = "mip-es" if "mip-es" in methods else (
        "mip-std" if "mip-std" in methods else None)

    groups: dict[str, dict[str, dict]] = {}
    for r in rows:
        g = group_of.get(r["instance_id"], "all")
        groups.setdefault(g, {}).setdefault(r["instance_id"], {})[r["method"]] = r

    out = []
    for g in sorted(groups):
        per_inst = groups[g]
        ref_rows = [m[ref_method] for m in per_inst.values() if ref_method in m]
        heur_rows = [m["rffo"] for m in per_inst.values() if "rffo" in m]
        row = {c: None for c in SUMMARY_COLUMNS}
        row.update(group=g, n=len(per_inst), note="")

        if ref_rows:
            row["best_ref"] = _mean(r["best"] for r in ref_rows)
            row["gap_ref"] = _mean(r["gap_pct"] for r in ref_rows)
            row["n_opt_ref"] = sum(r["status"] == "optimal" for r in ref_rows)
        if heur_rows:
            row["best_rf"] = _mean(r["rf_best"] for r in heur_rows)
            row["best_rffo"] = _mean(r["best"] for r in heur_rows)
            row["fo_rounds"] = _mean(r["fo_rounds"] for r in heur_rows)
            row["impr_fo_rf"] = _mean(
                improvement(r["rf_best"], r["best"]) for r in heur_rows
                if r["rf_best"] not in (None, 0)
            )

        pairs = [
            (m["rffo"], m[ref_method]) for m in per_inst.values()
            if ref_method is not None and "rffo" in m and ref_method in m
        ]
        if pairs:
            row["impr_rffo_ref"] = _mean(
                improvement(ref["best"], heur["best"])
                for heur, ref in pairs if ref["best"] not in (None, 0)
            )
            row["gap_rffo"] = _mean(
                optimality_gap(heur["best"], ref["bound"])
                for heur, ref in pairs
                if heur["best"] not in (None, 0) and ref["bound"] is not None
            )
            row["n_le_ref"] = sum(
                heur["best"] is not None and ref["best"] is not None
                and heur["best"] <= ref["best"] + 1e-6
                for heur, ref in pairs
            )
            row["n_lt_ref"] = sum(
                heur["best"] is not None and ref["best"] is not None
                and heur["best"] < ref["best"] - 1e-6
                for heur, ref in pairs
            )
        elif ref_method is not None and "rffo" in methods:
            row["note"] = "missing-pair"
        out.append(row)
    return out


def write_summary(path: str, summary: list[dict]):
    write_rows(path, summary, columns=SUMMARY_COLUMNS)


def _is_uncapacitated(meta: dict) -> bool:
    return meta.get("plant_capacity_factor") is None \
        and meta.get("storage_site", "none") == "none"


def emit_deviation_data(rows: list[dict], baseline_rows: list[dict],
                        manifest: dict[str, dict],
                        method: str = "rffo") -> list[dict]:
    """Percent cost deviation of capacitated runs against the uncapacitated
    run on the same draws, grouped into boxplot-ready stats.

    Baselines are the uncapacitated rows of baseline_rows (which may be the
    same list as rows), matched on base_id: same structure, same seed, and
    by construction the same demand and cost draws.  One entry per capacity
    configuration label, each with min, quartiles, max and the raw values.
    """
    base_best: dict[str, float] = {}
    for r in baseline_rows:
        if r["method"] != method or r["best"] is None:
            continue
        meta = manifest.get(r["instance_id"], {})
        if not _is_uncapacitated(meta):
            continue
        base_best[meta.get("base_id", r["instance_id"])] = r["best"]

    by_config: dict[str, list[float]] = {}
    for r in rows:
        if r["method"] != method or r["best"] is None:
            continue
        meta = manifest.get(r["instance_id"], {})
        if _is_uncapacitated(meta):
            continue
        base = base_best.get(meta.get("base_id"))
        if base is None:
            continue
        by_config.setdefault(_config_label(meta), []).append(
            deviation(r["best"], base))

    out = []
    for config in sorted(by_config):
        values = by_config[config]
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        out.append({
            "config": config,
            "min": float(min(values)), "q1": float(q1), "median": float(med),
            "q3": float(q3), "max": float(max(values)),
            "values": [float(v) for v in values],
        })
    return out


def _config_label(meta: dict) -> str:
    pcf = meta.get("plant_capacity_factor")
    site = meta.get("storage_site", "none")
    csf = meta.get("storage_capacity_factor")
    parts = [f"C={'inf' if pcf is None else f'{pcf:g}'}"]
    if site != "none" and csf is not None:
        parts.append(f"Cs[{site}]={csf:g}")
    return " ".join(parts)


def capacity_configs(plant_factors=(None, 2.0, 1.5),
                     storage=(("none", None), ("warehouses", 1.5),
                              ("warehouses", 2.0), ("retailers", 1.5),
                              ("retailers", 2.0))):
    """Cross product of plant and storage capacity settings."""
    return [
        {"plant_capacity_factor": c, "storage_site": site,
         "storage_capacity_factor": csf}
        for c in plant_factors
        for site, csf in storage
    ]


def desk_specs(retailers=(10, 25), warehouses=(2, 5), horizons=(6, 15),
               balances=("balanced",), replicates=1, seed_base=0,
               configs=None, shared_seeds=False) -> list[GenSpec]:
    """Small benchmark grid.

    By default every instance gets its own seed.  With shared_seeds all
    capacity configurations of one (structure, replicate) cell reuse one
    seed, so their demand and cost draws are identical and deviation
    against the uncapacitated member of the cell is meaningful.
    """
    configs = configs if configs is not None else capacity_configs()
    specs = []
    seed = seed_base
    for R in retailers:
        for W in warehouses:
            if W > R:
                continue
            for T in horizons:
                for bal in balances:
                    for _ in range(replicates):
                        cell_seed = seed
                        for cfg in configs:
                            specs.append(GenSpec(
                                num_retailers=R, num_warehouses=W, horizon=T,
                                balance=bal, seed=cell_seed, **cfg))
                            if not shared_seeds:
                                cell_seed += 1
                        seed = cell_seed if not shared_seeds else seed + 1
    return specs
