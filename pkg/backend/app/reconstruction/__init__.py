"""
Bayesian reconstruction of state-family parameters from EOS records and the
fidelity comparison between measurement schemes.
"""
from .families import CoherentFamily, FockFamily, ParameterFamily, family_for
from .posterior import (
    LIKELIHOOD_MODES,
    PosteriorGrid,
    bayes_update,
    consecutive_update,
    fidelity_vs_initial,
    likelihood,
    log_likelihood,
    point_update,
    reconstruct,
    single_node,
)
from .fidelity import (
    SCHEMES,
    FidelityEstimate,
    analytic_avg_fidelity_single,
    analytic_pointwise_fidelity,
    avg_fidelity_mc,
    continuum_avg_fidelity,
    eight_port_mc,
    eight_port_reference,
    gaussian_overlap,
    post_fidelity_mc,
    printed_consecutive_closed_form,
)

__all__ = [
    "CoherentFamily",
    "FockFamily",
    "ParameterFamily",
    "family_for",
    "LIKELIHOOD_MODES",
    "PosteriorGrid",
    "bayes_update",
    "consecutive_update",
    "fidelity_vs_initial",
    "likelihood",
    "log_likelihood",
    "point_update",
    "reconstruct",
    "single_node",
    "SCHEMES",
    "FidelityEstimate",
    "analytic_avg_fidelity_single",
    "analytic_pointwise_fidelity",
    "avg_fidelity_mc",
    "continuum_avg_fidelity",
    "eight_port_mc",
    "eight_port_reference",
    "gaussian_overlap",
    "post_fidelity_mc",
    "printed_consecutive_closed_form",
]
