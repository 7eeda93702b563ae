"""Robust control toolkit for a variable-stiffness series elastic actuator."""

from ._vssea import (
    ConfigError,
    SimulationDivergence,
    SynthesisError,
    check_config,
    config_keys,
    controllability_rank,
    default_config,
    design_gains,
    pole_place_chain,
    routh_hurwitz,
    simulate,
    simulate_csv,
    solve_care,
    solve_lyapunov,
    sweep,
    synthesis_report,
    validate,
)

__all__ = [
    "ConfigError",
    "SimulationDivergence",
    "SynthesisError",
    "check_config",
    "config_keys",
    "controllability_rank",
    "default_config",
    "design_gains",
    "pole_place_chain",
    "routh_hurwitz",
    "simulate",
    "simulate_csv",
    "solve_care",
    "solve_lyapunov",
    "sweep",
    "synthesis_report",
    "validate",
]
