"""Command line front end.

Subcommands: generate, solve, validate, bench, report.  Each is a thin
wrapper over the library; anything scriptable should import the package
instead.  validate exits 1 when the solution is infeasible so shell
pipelines can branch on it.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .bench import (
    ExperimentConfig, capacity_configs, desk_specs, emit_deviation_data,
    emit_summary, parse_results, run_benchmark, write_summary,
)
from .instances import (
    GenSpec, generate, read_instance, read_solution, write_instance,
    write_solution,
)
from .problem import HeuristicParams
from .validation import check_feasibility


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate a seeded instance")
    p.add_argument("--retailers", type=int, required=True)
    p.add_argument("--warehouses", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--balance", choices=("balanced", "unbalanced"),
                   default="balanced")
    p.add_argument("--plant-capacity-factor", type=float, default=None)
    p.add_argument("--storage-capacity-factor", type=float, default=None)
    p.add_argument("--storage-site", choices=("none", "warehouses",
                                              "retailers"), default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="instance JSON path")


def _cmd_generate(args) -> int:
    spec = GenSpec(
        num_retailers=args.retailers, num_warehouses=args.warehouses,
        horizon=args.horizon, balance=args.balance,
        plant_capacity_factor=args.plant_capacity_factor,
        storage_capacity_factor=args.storage_capacity_factor,
        storage_site=args.storage_site, seed=args.seed,
    )
    instance = generate(spec)
    write_instance(instance, args.out)
    print(f"{instance.meta['instance_id']} -> {args.out}")
    return 0


def _add_solve(sub):
    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=("rffo", "mip-es", "mip-std"),
                   default="rffo")
    p.add_argument("--budget", type=float, default=600.0,
                   help="wall clock budget in seconds")
    p.add_argument("--gap-tol", type=float, default=1e-6)
    p.add_argument("--formulation", choices=("echelon", "standard"),
                   default="echelon", help="formulation used by rffo")
    p.add_argument("--rf-window", type=int, default=5)
    p.add_argument("--rf-fix", type=int, default=3)
    p.add_argument("--rf-strategy", choices=("S1", "S2"), default="S1")
    p.add_argument("--rf-budget", type=float, default=None,
                   help="construction share of the budget (default 10%%)")
    p.add_argument("--fo-window-min", type=int, default=5)
    p.add_argument("--fo-fix-min", type=int, default=3)
    p.add_argument("--fo-window-step", type=int, default=0)
    p.add_argument("--fo-fix-step", type=int, default=1)
    p.add_argument("--fo-min-rounds", type=int, default=2)
    p.add_argument("--solution", help="write solution JSON here")
    p.add_argument("--report", help="write run report JSON here")


def _cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    params = HeuristicParams(
        rf_window=args.rf_window, rf_fix=args.rf_fix,
        rf_budget_s=args.rf_budget, rf_strategy=args.rf_strategy,
        fo_window_min=args.fo_window_min, fo_fix_min=args.fo_fix_min,
        fo_window_step=args.fo_window_step, fo_fix_step=args.fo_fix_step,
        fo_min_rounds=args.fo_min_rounds, total_budget_s=args.budget,
        formulation=args.formulation, gap_tol=args.gap_tol,
    )
    if args.method == "rffo":
        from .heuristics import hybrid
        sol, report = hybrid(instance, params)
        print(f"feasible best={sol.objective!r} "
              f"rf={report.rf_cost!r} fo_rounds={report.fo_rounds} "
              f"elapsed={report.rf_seconds + report.fo_seconds:.2f}s")
        if args.report:
            with open(args.report, "w") as fh:
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
        if args.solution:
            write_solution(instance, sol, args.solution)
        return 0

    from .engine import SolveControl, solve_mip
    from .formulations import build_model, extract_solution
    formulation = "echelon" if args.method == "mip-es" else "standard"
    model = build_model(instance, formulation)
    res = solve_mip(model, SolveControl(time_limit_s=args.budget,
                                        gap_tol=args.gap_tol))
    print(f"{res.status} best={res.objective!r} bound={res.dual_bound!r} "
          f"nodes={res.nodes} elapsed={res.elapsed_s:.2f}s")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({"status": res.status, "objective": res.objective,
                       "dual_bound": res.dual_bound, "nodes": res.nodes,
                       "elapsed_s": res.elapsed_s}, fh, indent=2)
            fh.write("\n")
    if res.assignment is None:
        return 1
    if args.solution:
        sol = extract_solution(instance, model, res.assignment)
        write_solution(instance, sol, args.solution)
    return 0


def _add_validate(sub):
    p = sub.add_parser("validate", help="check a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", help="write the report JSON here")


def _cmd_validate(args) -> int:
    instance = read_instance(args.instance)
    solution = read_solution(args.solution, instance)
    report = check_feasibility(instance, solution, tol=args.tol)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    if report.feasible:
        print(f"feasible objective={solution.objective!r}")
        return 0
    fams = ", ".join(sorted(report.families()))
    print(f"infeasible ({len(report.violations)} violations: {fams})")
    for v in report.violations[:10]:
        print(f"  {v.family} facility={v.facility} t={v.period} "
              f"residual={v.residual:.6g}")
    if len(report.violations) > 10:
        print(f"  ... {len(report.violations) - 10} more")
    return 1


def _add_bench(sub):
    p = sub.add_parser("bench", help="run a benchmark grid")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--name", default="results")
    p.add_argument("--retailers", default="10,25")
    p.add_argument("--warehouses", default="2,5")
    p.add_argument("--horizons", default="6,15")
    p.add_argument("--balances", default="balanced")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--methods", default="rffo",
                   help="comma list from rffo,mip-es,mip-std")
    p.add_argument("--uncapacitated-only", action="store_true",
                   help="skip the capacity configurations")
    p.add_argument("--shared-seeds", action="store_true",
                   help="reuse one seed across the capacity configurations "
                        "of each cell (for deviation studies)")
    p.add_argument("--write-instances", action="store_true")


def _cmd_bench(args) -> int:
    configs = None
    if args.uncapacitated_only:
        configs = capacity_configs(plant_factors=(None,),
                                   storage=(("none", None),))
    specs = desk_specs(
        retailers=_int_list(args.retailers),
        warehouses=_int_list(args.warehouses),
        horizons=_int_list(args.horizons),
        balances=tuple(args.balances.split(",")),
        replicates=args.replicates, seed_base=args.seed_base,
        configs=configs, shared_seeds=args.shared_seeds,
    )
    config = ExperimentConfig(
        specs=specs, methods=tuple(args.methods.split(",")),
        budget_s=args.budget, out_dir=args.out_dir, name=args.name,
        write_instances=args.write_instances,
    )
    rows, csv_path, manifest_path = run_benchmark(config)
    print(f"{len(rows)} runs -> {csv_path}")
    print(f"manifest -> {manifest_path}")
    return 0


def _add_report(sub):
    p = sub.add_parser("report", help="aggregate a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--group-by", default="structure",
                   help="manifest meta key, or 'structure' / 'capacity'")
    p.add_argument("--summary-out", help="write the summary CSV here")
    p.add_argument("--deviation", action="store_true",
                   help="also emit deviation-vs-uncapacitated boxplot data")
    p.add_argument("--baseline", help="results CSV holding the uncapacitated "
                                      "runs (default: --results itself)")
    p.add_argument("--baseline-manifest",
                   help="manifest for --baseline when it is a separate run")
    p.add_argument("--boxplot-out", help="write deviation boxplot JSON here")


def _group_label(meta: dict, key: str) -> str:
    if key == "structure":
        return meta.get("base_id", "?")
    if key == "capacity":
        from .bench import _config_label
        return _config_label(meta)
    return str(meta.get(key, "?"))


def _cmd_report(args) -> int:
    rows = parse_results(args.results)
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    group_of = {iid: _group_label(meta, args.group_by)
                for iid, meta in manifest.items()}
    summary = emit_summary(rows, group_of)
    if args.summary_out:
        write_summary(args.summary_out, summary)
        print(f"summary -> {args.summary_out}")
    else:
        for row in summary:
            print(row)
    if args.deviation or args.baseline or args.boxplot_out:
        baseline_rows = parse_results(args.baseline) if args.baseline else rows
        if args.baseline_manifest:
            with open(args.baseline_manifest) as fh:
                manifest = {**json.load(fh), **manifest}
        data = emit_deviation_data(rows, baseline_rows, manifest)
        if args.boxplot_out:
            with open(args.boxplot_out, "w") as fh:
                json.dump(data, fh, indent=2)
                fh.write("\n")
            print(f"deviation data -> {args.boxplot_out}")
        else:
            for entry in data:
                print({k: v for k, v in entry.items() if k != "values"})
    return 0


def _int_list(s: str):
    return tuple(int(v) for v in s.split(","))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lotsizing",
        description="three-level lot sizing: generate, solve, validate, "
                    "benchmark, report")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_solve(sub)
    _add_validate(sub)
    _add_bench(sub)
    _add_report(sub)
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate, "solve": _cmd_solve,
        "validate": _cmd_validate, "bench": _cmd_bench, "report": _cmd_report,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
