"""
Post-measurement quasiprobability of the MIR mode: the s -> s' parameter flow,
the outcome-dependent argument map, the strong-squeezing limit and chains of
consecutive measurements.
"""
from .postmap import (
    AxisMap,
    PostMap,
    fitted_post_grid,
    outcome_displacement,
    post_envelope,
    post_grid,
    post_map,
    post_qpd,
    post_qpd_characteristic,
    post_state,
    post_window,
    prime_map,
    prime_params,
    project_grid,
)
from .strong_limit import QuadratureEigenstate, pump_fraction, strong_limit_qpd, strong_limit_state
from .chain import ChainStage, StageSpec, chain, run_stage

__all__ = [
    "AxisMap",
    "PostMap",
    "fitted_post_grid",
    "outcome_displacement",
    "post_envelope",
    "post_grid",
    "post_map",
    "post_qpd",
    "post_qpd_characteristic",
    "post_state",
    "post_window",
    "prime_map",
    "prime_params",
    "project_grid",
    "QuadratureEigenstate",
    "pump_fraction",
    "strong_limit_qpd",
    "strong_limit_state",
    "ChainStage",
    "StageSpec",
    "chain",
    "run_stage",
]
