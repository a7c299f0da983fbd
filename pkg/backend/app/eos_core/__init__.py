"""
Electro-optic sampling core: channel setup, count-probability distributions in
the strong-probe regime and the exact Skellam route for coherent signals.
"""
from .channels import (
    PROBE_FLOOR,
    Channel,
    ChannelSpec,
    WaveplateSolution,
    balanced_rotation,
    interference_phase,
    solve_waveplate,
    waveplate_matrix,
)
from .setup import EosSetup, derive_setup, detuned, s_tilde, symmetric_xy, symmetric_xyxy, x_only
from .counting import (
    NEGATIVE_CLAMPS,
    ChannelMoments,
    CountTable,
    OutcomeSet,
    count_distribution,
    count_probabilities,
    count_probability,
    envelope,
    log_envelope,
    marginal_count_probability,
    moments,
    outcome_to_point,
    outcome_window,
    statistic_to_point,
    sufficient_statistic_distribution,
    window_moments,
)
from .exact import exact_count_distribution, exact_count_probability, exact_count_probability_coherent, skellam_means

__all__ = [
    "PROBE_FLOOR",
    "Channel",
    "ChannelSpec",
    "WaveplateSolution",
    "balanced_rotation",
    "interference_phase",
    "solve_waveplate",
    "waveplate_matrix",
    "EosSetup",
    "derive_setup",
    "detuned",
    "s_tilde",
    "symmetric_xy",
    "symmetric_xyxy",
    "x_only",
    "NEGATIVE_CLAMPS",
    "ChannelMoments",
    "CountTable",
    "OutcomeSet",
    "count_distribution",
    "count_probabilities",
    "count_probability",
    "envelope",
    "log_envelope",
    "marginal_count_probability",
    "moments",
    "outcome_to_point",
    "outcome_window",
    "statistic_to_point",
    "sufficient_statistic_distribution",
    "window_moments",
    "exact_count_distribution",
    "exact_count_probability",
    "exact_count_probability_coherent",
    "skellam_means",
]
