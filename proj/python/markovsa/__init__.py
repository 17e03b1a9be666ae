"""Projection-based and projection-free stochastic approximation over
Markovian data streams: constraint-set primitives (projection, LMO),
the inexact conditional-gradient inner loop, suboptimality metrics, the
synthetic Markovian environments and the experiment harness."""

from markovsa._core import (
    FeasibleSet,
    Oracle,
    Schedule,
    __version__,
    eta_of,
    fw_gap,
    gradient_mapping,
    icg_solve,
    ingest_agents,
    merit_w,
    phi_value,
    property_suite,
    run_experiment,
    run_single,
    sample_output_index,
    solve_exact,
    suboptimality_v,
    sweep,
    t_of,
)

__all__ = [
    "FeasibleSet",
    "Oracle",
    "Schedule",
    "__version__",
    "eta_of",
    "fw_gap",
    "gradient_mapping",
    "icg_solve",
    "ingest_agents",
    "merit_w",
    "phi_value",
    "property_suite",
    "run_experiment",
    "run_single",
    "sample_output_index",
    "solve_exact",
    "suboptimality_v",
    "sweep",
    "t_of",
]
