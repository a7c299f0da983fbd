"""Point-wise phase-space operations on StateModel instances."""
import logging
from typing import Optional, Tuple

import numpy as np

from ..errors import InvalidState
from .states import WIGNER, OrderingParams, StateModel

logger = logging.getLogger(__name__)

QUADRATURES = ("X", "Y")


def char_function(state: StateModel, gamma: complex, ordering: OrderingParams = WIGNER) -> complex:
    """chi(gamma; 0) exp(s_Y Re^2 gamma / 2 + s_X Im^2 gamma / 2); defined for any ordering."""
    return complex(state.char_function(np.asarray(gamma, dtype=complex), ordering))


def qpd_eval(state: StateModel, z: complex, ordering: OrderingParams = WIGNER) -> float:
    ordering.require_transform()
    return float(state.qpd(np.asarray(z.real), np.asarray(z.imag), ordering))


def marginal(state: StateModel, quadrature: str, q: float) -> float:
    """<q|rho|q> for quadrature X (q = Re z) or Y (q = Im z)."""
    if quadrature not in QUADRATURES:
        raise InvalidState(f"Unknown quadrature {quadrature!r}; expected X or Y")
    return float(state.marginal(quadrature, np.asarray(q, dtype=float)))


def quadrature_moments(state: StateModel) -> Tuple[float, float, float, float]:
    return state.moments()


def density_matrix(state: StateModel, n_max: Optional[int] = None) -> np.ndarray:
    return state.density_matrix(n_max)
