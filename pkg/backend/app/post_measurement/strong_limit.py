"""Infinite-squeezing limit of the post-measurement state."""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..eos_core import EosSetup
from ..errors import DegeneratePartition
from ..phase_space import Gaussian

PARTITION_TOL = 1e-15


@dataclass(frozen=True)
class QuadratureEigenstate:
    """Marker for the unnormalizable limit of a one-quadrature measurement record."""
    quadrature: str
    value: float


def pump_fraction(setup: EosSetup, quadrature: str = "X") -> float:
    """sum over the quadrature group of |alpha~|^2."""
    return float(sum(abs(setup.alpha_tilde[i]) ** 2 for i in setup.indices(quadrature)))


def strong_limit_state(y_tilde: complex, x_fraction: float) -> Union[Gaussian, QuadratureEigenstate]:
    """
    Displaced squeezed state |c, r> with r = 1/2 ln(f_X / f_Y).

    The center is y~_Q / (2 f_Q) per quadrature, which is y~ itself for the
    symmetric split f_X = f_Y = 1/2 (r = 0, a coherent state).
    """
    fx, fy = x_fraction, 1.0 - x_fraction
    if fy <= PARTITION_TOL:
        return QuadratureEigenstate("X", y_tilde.real / (2 * fx))
    if fx <= PARTITION_TOL:
        return QuadratureEigenstate("Y", y_tilde.imag / (2 * fy))
    r = 0.5 * math.log(fx / fy)
    center = complex(y_tilde.real / (2 * fx), y_tilde.imag / (2 * fy))
    return Gaussian.from_arrays(center, np.diag([math.exp(-2 * r) / 4, math.exp(2 * r) / 4]))


def strong_limit_qpd(y_tilde: complex, x_fraction: float, z) -> np.ndarray:
    """(2/pi) exp[-2 e^{2r} Re^2(z - c) - 2 e^{-2r} Im^2(z - c)]."""
    state = strong_limit_state(y_tilde, x_fraction)
    if isinstance(state, QuadratureEigenstate):
        raise DegeneratePartition(
            f"Only {state.quadrature} channels are pumped; the limit is a quadrature eigenstate at {state.value:.6g}"
        )
    z = np.asarray(z, dtype=complex)
    r = 0.5 * math.log(x_fraction / (1.0 - x_fraction))
    d = z - state.mean
    values = (2 / math.pi) * np.exp(-2 * math.exp(2 * r) * d.real ** 2 - 2 * math.exp(-2 * r) * d.imag ** 2)
    return float(values) if values.ndim == 0 else values
