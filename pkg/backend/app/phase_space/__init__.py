"""
Phase-space representations of the single MIR mode: characteristic functions,
(s_X, s_Y)-ordered quasiprobabilities, marginals and Wigner overlaps.
"""
from .states import (
    HUSIMI,
    WIGNER,
    Cat,
    Coherent,
    Fock,
    Gaussian,
    GaussianState,
    Numeric,
    OrderingParams,
    Squeezed,
    StateModel,
    Vacuum,
)
from .operations import char_function, density_matrix, marginal, qpd_eval, quadrature_moments
from .grid import (
    QpdGrid,
    Window,
    default_window,
    numeric_from_wigner,
    purity,
    qpd_grid,
    simpson_weights,
    wigner_fidelity,
)

__all__ = [
    "HUSIMI",
    "WIGNER",
    "Cat",
    "Coherent",
    "Fock",
    "Gaussian",
    "GaussianState",
    "Numeric",
    "OrderingParams",
    "Squeezed",
    "StateModel",
    "Vacuum",
    "char_function",
    "density_matrix",
    "marginal",
    "qpd_eval",
    "quadrature_moments",
    "QpdGrid",
    "Window",
    "default_window",
    "numeric_from_wigner",
    "purity",
    "qpd_grid",
    "simpson_weights",
    "wigner_fidelity",
]
