"""
Brute-force Fock-space oracle for small probes: evolves a truncated multimode
register under the EOS interaction and reads off exact count statistics.
"""
from .register import (
    TAIL_LIMIT,
    TruncatedRegister,
    apply_displacement,
    apply_multimode_squeeze,
    apply_passive,
    apply_waveplate,
    collective_basis,
    displacement_matrix,
    waveplate_heisenberg_residual,
    waveplate_transfer,
)
from .simulate import (
    MAX_CHANNELS,
    MAX_PROBE,
    MAX_SQUEEZE,
    MIR_CAP,
    NIR_CAP,
    Cutoffs,
    check_envelope,
    cutoff_policy,
    evolve,
    oracle_count_distribution,
    outcome_probabilities,
    post_state,
    register_from_setup,
)

__all__ = [
    "TAIL_LIMIT",
    "TruncatedRegister",
    "apply_displacement",
    "apply_multimode_squeeze",
    "apply_passive",
    "apply_waveplate",
    "collective_basis",
    "displacement_matrix",
    "waveplate_heisenberg_residual",
    "waveplate_transfer",
    "MAX_CHANNELS",
    "MAX_PROBE",
    "MAX_SQUEEZE",
    "MIR_CAP",
    "NIR_CAP",
    "Cutoffs",
    "check_envelope",
    "cutoff_policy",
    "evolve",
    "oracle_count_distribution",
    "outcome_probabilities",
    "post_state",
    "register_from_setup",
]
