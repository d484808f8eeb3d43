"""Lot sizing and replenishment planning over plant-warehouse-retailer trees.

Library layout:

problem       instance/solution types and pure cost and demand operations
instances     seeded random instances plus JSON reading and writing
formulations  standard and echelon-stock MIP models
engine        LP relaxations, branch and bound, LP text export
heuristics    relax-and-fix, fix-and-optimize, and their hybrid
validation    feasibility checking, exact enumeration oracle, metrics
bench         batch runner, CSV results, summary and deviation reports
cli           command line front end over all of the above
"""

from .problem import (
    PLANT,
    HeuristicParams,
    Instance,
    Solution,
    SupplyNetwork,
    aggregate_demands,
    cumulative_demand,
    echelon_stock,
    total_cost,
)
from .engine import (
    MipModel,
    SolveControl,
    SolveResult,
    VarKey,
    export_model_text,
    solve_lp,
    solve_mip,
)
from .formulations import (
    add_storage_capacity,
    build_echelon,
    build_model,
    build_standard,
    extract_solution,
    solution_to_assignment,
)
from .validation import (
    FeasibilityReport,
    check_feasibility,
    deviation,
    exact_optimum_enumerate,
    improvement,
    optimality_gap,
)
from .heuristics import (
    BudgetError,
    ConstructionError,
    RunReport,
    fix_and_optimize,
    hybrid,
    relax_and_fix,
)
from .instances import (
    GenSpec,
    derive_storage_caps,
    generate,
    instance_from_dict,
    instance_to_dict,
    read_instance,
    read_solution,
    solution_from_dict,
    solution_to_dict,
    write_instance,
    write_solution,
)
from .bench import (
    ExperimentConfig,
    emit_deviation_data,
    emit_summary,
    parse_results,
    run_benchmark,
    run_one,
)

__all__ = [
    "PLANT",
    "HeuristicParams",
    "Instance",
    "Solution",
    "SupplyNetwork",
    "aggregate_demands",
    "cumulative_demand",
    "echelon_stock",
    "total_cost",
    "MipModel",
    "SolveControl",
    "SolveResult",
    "VarKey",
    "export_model_text",
    "solve_lp",
    "solve_mip",
    "add_storage_capacity",
    "build_echelon",
    "build_model",
    "build_standard",
    "extract_solution",
    "solution_to_assignment",
    "FeasibilityReport",
    "check_feasibility",
    "deviation",
    "exact_optimum_enumerate",
    "improvement",
    "optimality_gap",
    "BudgetError",
    "ConstructionError",
    "RunReport",
    "fix_and_optimize",
    "hybrid",
    "relax_and_fix",
    "GenSpec",
    "derive_storage_caps",
    "generate",
    "instance_from_dict",
    "instance_to_dict",
    "read_instance",
    "read_solution",
    "solution_from_dict",
    "solution_to_dict",
    "write_instance",
    "write_solution",
    "ExperimentConfig",
    "emit_deviation_data",
    "emit_summary",
    "parse_results",
    "run_benchmark",
    "run_one",
]

__version__ = "0.1.0"
