"""Parameterized state families that the Bayesian reconstruction runs over."""
import math
from abc import ABC, abstractmethod
from typing import Any

import numpy as np
from scipy import special

from ..errors import UnsupportedFamily
from ..phase_space import Coherent, Fock, OrderingParams, StateModel

COHERENT_ALPHA_MAX = 6.0
COHERENT_POINTS = 81
FOCK_FAMILY_MAX = 20


class ParameterFamily(ABC):
    """A grid of family members lambda_j with a uniform prior."""

    tag: str = ""

    @property
    @abstractmethod
    def size(self) -> int:
        ...

    @abstractmethod
    def parameter(self, j: int) -> Any:
        ...

    @abstractmethod
    def member(self, j: int) -> StateModel:
        ...

    @abstractmethod
    def qpd_at(self, z: complex, ordering: OrderingParams) -> np.ndarray:
        """rho_lambda(z; s_X, s_Y) for every node."""

    def log_qpd_at(self, z: complex, ordering: OrderingParams) -> np.ndarray:
        """log rho_lambda(z; s_X, s_Y); non-positive values map to -inf."""
        values = np.asarray(self.qpd_at(z, ordering), dtype=float)
        out = np.full(values.shape, -np.inf)
        positive = values > 0
        out[positive] = np.log(values[positive])
        return out

    @abstractmethod
    def vectors(self, dim: int) -> np.ndarray:
        """Fock amplitudes of every (pure) member, shape (size, dim)."""

    def prior(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def nearest(self, value: Any) -> int:
        raise UnsupportedFamily(f"{self.tag} family does not support nearest-node lookup")


class CoherentFamily(ParameterFamily):
    """Coherent states |alpha> on a square grid with uniform Lebesgue measure."""

    tag = "coherent"

    def __init__(self, alpha_max: float = COHERENT_ALPHA_MAX, n_points: int = COHERENT_POINTS):
        self.alpha_max = alpha_max
        self.n_points = n_points
        axis = np.linspace(-alpha_max, alpha_max, n_points)
        re, im = np.meshgrid(axis, axis)
        self.nodes = (re + 1j * im).ravel()
        self.spacing = axis[1] - axis[0]
        self._vector_cache = {}

    @property
    def size(self) -> int:
        return self.nodes.size

    def parameter(self, j: int) -> complex:
        return complex(self.nodes[j])

    def member(self, j: int) -> StateModel:
        return Coherent(self.parameter(j))

    def nearest(self, value: complex) -> int:
        return int(np.argmin(np.abs(self.nodes - value)))

    def qpd_at(self, z, ordering):
        return np.exp(self.log_qpd_at(z, ordering))

    def log_qpd_at(self, z, ordering):
        sx, sy = ordering.s_x, ordering.s_y
        d = complex(z) - self.nodes
        log_norm = math.log(2.0 / math.pi) - 0.5 * math.log((1 - sx) * (1 - sy))
        return log_norm - 2 * d.real ** 2 / (1 - sx) - 2 * d.imag ** 2 / (1 - sy)

    def vectors(self, dim):
        if dim not in self._vector_cache:
            n = np.arange(dim)
            r = np.abs(self.nodes)
            # alpha = 0 holds only |0>; keep n log|alpha| at -inf for n > 0 instead of 0 * -inf
            log_abs = np.log(np.where(r > 0, r, 1.0))
            power = np.where(r[:, None] > 0, n[None, :] * log_abs[:, None], np.where(n[None, :] == 0, 0.0, -np.inf))
            log_mag = -0.5 * r[:, None] ** 2 + power - 0.5 * special.gammaln(n + 1)[None, :]
            phase = np.exp(1j * np.outer(np.angle(self.nodes), n))
            self._vector_cache[dim] = np.exp(log_mag) * phase
        return self._vector_cache[dim]


class FockFamily(ParameterFamily):
    """Number states |0> .. |n_max>."""

    tag = "fock"

    def __init__(self, n_max: int = FOCK_FAMILY_MAX):
        self.n_max = n_max

    @property
    def size(self) -> int:
        return self.n_max + 1

    def parameter(self, j: int) -> int:
        return j

    def member(self, j: int) -> StateModel:
        return Fock(j)

    def nearest(self, value: int) -> int:
        return int(min(max(round(value), 0), self.n_max))

    def qpd_at(self, z, ordering):
        z = complex(z)
        return np.array([Fock(n).qpd(np.array(z.real), np.array(z.imag), ordering) for n in range(self.size)], dtype=float)

    def vectors(self, dim):
        out = np.zeros((self.size, dim), dtype=complex)
        k = min(self.size, dim)
        out[np.arange(k), np.arange(k)] = 1.0
        return out


def family_for(state: StateModel, **kwargs) -> ParameterFamily:
    """Default family matching an initial state's type."""
    if isinstance(state, Coherent):
        return CoherentFamily(**kwargs)
    if isinstance(state, Fock):
        return FockFamily(**kwargs)
    raise UnsupportedFamily(f"No reconstruction family for {type(state).__name__}")
