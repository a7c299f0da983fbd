"""
Single-mode MIR state families and their phase-space representations.

Conventions: z = x + iy, X = (a + a^dag)/2 so the vacuum has quadrature variance
1/4, gamma = u + iv.  The (s_X, s_Y) quasiprobability is the Fourier transform of
chi(gamma; s_X, s_Y) = chi(gamma; 0) exp(s_Y u^2 / 2 + s_X v^2 / 2), so s_X
smooths along Re z and s_Y along Im z with extra variance -s/4.
"""
import hashlib
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from cachetools import LRUCache
from scipy import linalg, special, stats

from ..errors import InvalidState, OrderingOutOfRange
from . import fock
from .quadrature import DEFAULT_NODES, NodeMatrix

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 40
FOCK_HERMITE_SUM_LIMIT = 20
GAUSSIAN_PAD = 60


@dataclass(frozen=True)
class OrderingParams:
    s_x: float = 0.0
    s_y: float = 0.0

    @classmethod
    def symmetric(cls, s: float) -> "OrderingParams":
        return cls(s_x=s, s_y=s)

    @property
    def is_wigner(self) -> bool:
        return self.s_x == 0.0 and self.s_y == 0.0

    @property
    def is_isotropic(self) -> bool:
        return self.s_x == self.s_y

    def require_transform(self):
        """Weierstrass-transform evaluation needs both parameters below 1."""
        if self.s_x >= 1 or self.s_y >= 1:
            raise OrderingOutOfRange(f"Ordering ({self.s_x}, {self.s_y}) needs s_X < 1 and s_Y < 1")


WIGNER = OrderingParams(0.0, 0.0)
HUSIMI = OrderingParams(-1.0, -1.0)


class StateModel(ABC):
    """A single-mode state that owns its symmetric characteristic function."""

    @abstractmethod
    def char0(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Symmetric-ordered characteristic function chi(u + iv; 0)."""

    @abstractmethod
    def qpd(self, x: np.ndarray, y: np.ndarray, ordering: OrderingParams) -> np.ndarray:
        """Quasiprobability on broadcast coordinate arrays."""

    @abstractmethod
    def marginal(self, quadrature: str, q: np.ndarray) -> np.ndarray:
        """<q|rho|q> in the X (Re z) or Y (Im z) eigenbasis."""

    @abstractmethod
    def density_matrix(self, n_max: Optional[int] = None) -> np.ndarray:
        """Truncated Fock-basis density matrix of dimension n_max + 1."""

    @abstractmethod
    def extent(self) -> float:
        """Distance from the origin beyond which the Wigner function is negligible, minus a vacuum margin."""

    def default_n_max(self) -> int:
        return DEFAULT_N_MAX

    def is_pure(self) -> bool:
        return True

    def cache_key(self) -> Tuple:
        return (type(self).__name__,) + tuple(self.__dict__.values())

    def qpd_grid_values(self, xs: np.ndarray, ys: np.ndarray, ordering: OrderingParams) -> np.ndarray:
        """Values on the tensor grid ys x xs, shape (len(ys), len(xs))."""
        X, Y = np.meshgrid(xs, ys)
        return self.qpd(X, Y, ordering)

    def char_function(self, gamma, ordering: OrderingParams):
        gamma = np.asarray(gamma, dtype=complex)
        u, v = gamma.real, gamma.imag
        return self.char0(u, v) * np.exp(0.5 * ordering.s_y * u ** 2 + 0.5 * ordering.s_x * v ** 2)

    def moments(self) -> Tuple[float, float, float, float]:
        """(<X>, <Y>, Var X, Var Y)."""
        return fock.fock_moments(self.density_matrix())

    def state_vector(self, n_max: Optional[int] = None) -> np.ndarray:
        rho = self.density_matrix(n_max)
        w, vecs = np.linalg.eigh(rho)
        if abs(w[-1] - 1.0) > 1e-8:
            raise InvalidState(f"{type(self).__name__} is not pure (largest eigenvalue {w[-1]:.6f})")
        return vecs[:, -1]


class GaussianState(StateModel):
    """States fully described by a Wigner mean and covariance."""

    @property
    @abstractmethod
    def mean(self) -> complex:
        ...

    @property
    @abstractmethod
    def covariance(self) -> np.ndarray:
        ...

    def char0(self, u, v):
        cov = self.covariance
        m = self.mean
        quad = 4.0 * (cov[0, 0] * v ** 2 - 2.0 * cov[0, 1] * u * v + cov[1, 1] * u ** 2)
        return np.exp(-0.5 * quad + 2j * (v * m.real - u * m.imag))

    def smoothed_covariance(self, ordering: OrderingParams) -> np.ndarray:
        cov = self.covariance + np.diag([-ordering.s_x / 4.0, -ordering.s_y / 4.0])
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise OrderingOutOfRange(
                f"Ordering ({ordering.s_x}, {ordering.s_y}) has no regular quasiprobability for this Gaussian state"
            )
        return cov

    def qpd(self, x, y, ordering):
        ordering.require_transform()
        cov = self.smoothed_covariance(ordering)
        pts = np.stack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)], axis=-1)
        return stats.multivariate_normal(mean=[self.mean.real, self.mean.imag], cov=cov).pdf(pts)

    def marginal(self, quadrature, q):
        if quadrature == "X":
            return stats.norm.pdf(q, loc=self.mean.real, scale=math.sqrt(self.covariance[0, 0]))
        return stats.norm.pdf(q, loc=self.mean.imag, scale=math.sqrt(self.covariance[1, 1]))

    def moments(self):
        cov = self.covariance
        return self.mean.real, self.mean.imag, float(cov[0, 0]), float(cov[1, 1])

    def mean_photon_number(self) -> float:
        return abs(self.mean) ** 2 + float(np.trace(self.covariance)) - 0.5

    def extent(self):
        spread = math.sqrt(float(np.max(np.linalg.eigvalsh(self.covariance))))
        return abs(self.mean) + 8.0 * max(0.0, spread - 0.5)

    def default_n_max(self):
        nbar = self.mean_photon_number()
        return max(DEFAULT_N_MAX, int(math.ceil(nbar + 12.0 * math.sqrt(nbar + 1.0) + 10)))

    def is_pure(self):
        return abs(4.0 * math.sqrt(np.linalg.det(self.covariance)) - 1.0) < 1e-9

    def density_matrix(self, n_max=None):
        dim = (n_max if n_max is not None else self.default_n_max()) + 1
        return gaussian_density_matrix(self.mean, self.covariance, dim)


def gaussian_density_matrix(mean: complex, cov: np.ndarray, dim: int, pad: int = GAUSSIAN_PAD) -> np.ndarray:
    """D(m) S(r, phase) rho_thermal S^dag D^dag built on a padded basis, then truncated."""
    det = float(np.linalg.det(cov))
    if det <= 0:
        raise InvalidState("Gaussian covariance must be positive definite")
    nbar = 2.0 * math.sqrt(det) - 0.5
    if nbar < -1e-9:
        raise InvalidState(f"Gaussian covariance violates the uncertainty relation (det = {det:.3e})")
    nbar = max(nbar, 0.0)

    w, vecs = np.linalg.eigh(cov / math.sqrt(det))
    r = -0.5 * math.log(w[0])
    phase = 2.0 * math.atan2(vecs[1, 0], vecs[0, 0])

    big = dim + pad
    a = fock.annihilation(big)
    ad = a.conj().T
    xi = r * np.exp(1j * phase)
    S = linalg.expm(0.5 * (np.conj(xi) * (a @ a) - xi * (ad @ ad)))
    D = linalg.expm(mean * ad - np.conj(mean) * a)
    n = np.arange(big)
    thermal = np.diag((nbar ** n / (1.0 + nbar) ** (n + 1)) if nbar > 0 else (n == 0).astype(float))
    U = D @ S
    rho = (U @ thermal @ U.conj().T)[:dim, :dim]
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


@dataclass(frozen=True)
class Gaussian(GaussianState):
    """General single-mode Gaussian state given by Wigner mean and covariance."""
    mean_value: complex = 0j
    cov: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.25, 0.0), (0.0, 0.25))

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T, atol=1e-14):
            raise InvalidState("Gaussian covariance must be a symmetric 2x2 matrix")
        if np.linalg.det(cov) < 1.0 / 16.0 - 1e-12:
            raise InvalidState("Gaussian covariance violates the uncertainty relation")

    @classmethod
    def from_arrays(cls, mean: complex, cov: np.ndarray) -> "Gaussian":
        cov = 0.5 * (np.asarray(cov, dtype=float) + np.asarray(cov, dtype=float).T)
        return cls(mean_value=complex(mean), cov=tuple(tuple(float(c) for c in row) for row in cov))

    @property
    def mean(self):
        return complex(self.mean_value)

    @property
    def covariance(self):
        return np.asarray(self.cov, dtype=float)


@dataclass(frozen=True)
class Vacuum(GaussianState):

    @property
    def mean(self):
        return 0j

    @property
    def covariance(self):
        return np.eye(2) / 4.0

    def density_matrix(self, n_max=None):
        dim = (n_max if n_max is not None else DEFAULT_N_MAX) + 1
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho


@dataclass(frozen=True)
class Coherent(GaussianState):
    alpha: complex = 0j

    @property
    def mean(self):
        return complex(self.alpha)

    @property
    def covariance(self):
        return np.eye(2) / 4.0

    def density_matrix(self, n_max=None):
        dim = (n_max if n_max is not None else self.default_n_max()) + 1
        vec = fock.coherent_vector(self.alpha, dim)
        return np.outer(vec, vec.conj())


@dataclass(frozen=True)
class Squeezed(GaussianState):
    """Squeezed vacuum S(r e^{i phase})|0>; the squeezed quadrature lies at angle phase/2."""
    r: float = 0.0
    phase: float = 0.0

    @property
    def mean(self):
        return 0j

    @property
    def covariance(self):
        c, s = math.cos(self.phase / 2), math.sin(self.phase / 2)
        rot = np.array([[c, -s], [s, c]])
        return rot @ np.diag([math.exp(-2 * self.r), math.exp(2 * self.r)]) @ rot.T / 4.0

    def density_matrix(self, n_max=None):
        dim = (n_max if n_max is not None else self.default_n_max()) + 1
        vec = fock.squeezed_vacuum_vector(self.r, self.phase, dim)
        return np.outer(vec, vec.conj())


def _dyad_char0(a: complex, b: complex, u, v):
    """Tr(|a><b| D(gamma)) for coherent kets a, b."""
    C = np.conj(b) * a - 0.5 * (abs(a) ** 2 + abs(b) ** 2)
    p = np.conj(b) - a
    q = 1j * (a + np.conj(b))
    return np.exp(C - 0.5 * (u ** 2 + v ** 2) + p * u + q * v)


def _dyad_qpd(a: complex, b: complex, x, y, a_u: float, a_v: float):
    C = np.conj(b) * a - 0.5 * (abs(a) ** 2 + abs(b) ** 2)
    kappa_u = 2j * y + (np.conj(b) - a)
    kappa_v = -2j * x + 1j * (a + np.conj(b))
    return (2.0 / (np.pi * math.sqrt(a_u * a_v))) * np.exp(
        C + kappa_u ** 2 / (2 * a_u) + kappa_v ** 2 / (2 * a_v)
    )


def _dyad_marginal(a: complex, b: complex, quadrature: str, q):
    C = np.conj(b) * a - 0.5 * (abs(a) ** 2 + abs(b) ** 2)
    if quadrature == "X":
        kappa = -2j * q + 1j * (a + np.conj(b))
    else:
        kappa = 2j * q + (np.conj(b) - a)
    return math.sqrt(2.0 * math.pi) / math.pi * np.exp(C + kappa ** 2 / 2)


@dataclass(frozen=True)
class Cat(StateModel):
    """N(|alpha> + parity |-alpha>) with parity +1 (even) or -1 (odd)."""
    alpha: complex = 0j
    parity: int = 1

    def __post_init__(self):
        if self.parity not in (1, -1):
            raise InvalidState("Cat parity must be +1 or -1")
        if self.parity == -1 and self.alpha == 0:
            raise InvalidState("Odd cat state with alpha = 0 does not exist")

    @property
    def norm(self) -> float:
        return (2.0 * (1.0 + self.parity * math.exp(-2.0 * abs(self.alpha) ** 2))) ** -0.5

    def dyads(self) -> List[Tuple[float, complex, complex]]:
        a = complex(self.alpha)
        n2 = self.norm ** 2
        return [(n2, a, a), (n2, -a, -a), (self.parity * n2, a, -a), (self.parity * n2, -a, a)]

    def char0(self, u, v):
        return sum(c * _dyad_char0(a, b, u, v) for c, a, b in self.dyads())

    def qpd(self, x, y, ordering):
        ordering.require_transform()
        a_u, a_v = 1.0 - ordering.s_y, 1.0 - ordering.s_x
        total = sum(c * _dyad_qpd(a, b, np.asarray(x), np.asarray(y), a_u, a_v) for c, a, b in self.dyads())
        return np.real(total)

    def marginal(self, quadrature, q):
        q = np.asarray(q, dtype=float)
        return np.real(sum(c * _dyad_marginal(a, b, quadrature, q) for c, a, b in self.dyads()))

    def density_matrix(self, n_max=None):
        dim = (n_max if n_max is not None else self.default_n_max()) + 1
        vec = self.norm * (fock.coherent_vector(self.alpha, dim) + self.parity * fock.coherent_vector(-self.alpha, dim))
        return np.outer(vec, vec.conj())

    def extent(self):
        return abs(self.alpha)

    def default_n_max(self):
        nbar = abs(self.alpha) ** 2
        return max(DEFAULT_N_MAX, int(math.ceil(nbar + 12.0 * math.sqrt(nbar + 1.0) + 10)))


@dataclass(frozen=True)
class Fock(StateModel):
    n: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidState("Fock number must be non-negative")

    def char0(self, u, v):
        r2 = u ** 2 + v ** 2
        return np.exp(-0.5 * r2) * special.eval_laguerre(self.n, r2)

    def qpd(self, x, y, ordering):
        ordering.require_transform()
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if ordering.is_isotropic:
            return self._isotropic(x ** 2 + y ** 2, ordering.s_x)
        if self.n <= FOCK_HERMITE_SUM_LIMIT:
            return self._hermite_sum(x, y, 1.0 - ordering.s_y, 1.0 - ordering.s_x)
        return Numeric.from_state(self, self.n).qpd(x, y, ordering)

    def _isotropic(self, r2, s):
        n = self.n
        if abs(s + 1.0) < 1e-12:
            return np.exp(-r2 + n * np.log(np.where(r2 > 0, r2, 1.0)) - special.gammaln(n + 1)) / np.pi * (
                (r2 > 0) | (n == 0)
            )
        ratio = ((s + 1.0) / (s - 1.0)) ** n
        return (2.0 / (np.pi * (1.0 - s))) * ratio * np.exp(-2.0 * r2 / (1.0 - s)) * special.eval_laguerre(
            n, 4.0 * r2 / (1.0 - s * s)
        )

    def _hermite_sum(self, x, y, a_u, a_v):
        """Term-wise Fourier transform of e^{-a_u u^2/2 - a_v v^2/2} L_n(u^2 + v^2)."""
        n = self.n
        omega_u, omega_v = 2.0 * y, -2.0 * x
        xi_u, xi_v = omega_u / math.sqrt(2 * a_u), omega_v / math.sqrt(2 * a_v)
        gauss = np.exp(-(xi_u ** 2) - xi_v ** 2) * 2.0 * math.pi / math.sqrt(a_u * a_v)

        def moment(j, xi, a):
            return ((-1) ** j) * (2.0 * a) ** (-j) * special.eval_hermite(2 * j, xi)

        mu = [moment(j, xi_u, a_u) for j in range(n + 1)]
        mv = [moment(j, xi_v, a_v) for j in range(n + 1)]
        total = np.zeros(np.broadcast(x, y).shape)
        for k in range(n + 1):
            inner = np.zeros_like(total)
            for j in range(k + 1):
                inner = inner + special.comb(k, j, exact=False) * mu[j] * mv[k - j]
            total = total + ((-1) ** k) * special.comb(n, k, exact=False) / math.factorial(k) * inner
        return gauss * total / np.pi ** 2

    def marginal(self, quadrature, q):
        return fock.hermite_functions(self.n, np.asarray(q, dtype=float))[self.n] ** 2

    def density_matrix(self, n_max=None):
        dim = max(n_max if n_max is not None else DEFAULT_N_MAX, self.n) + 1
        rho = np.zeros((dim, dim), dtype=complex)
        rho[self.n, self.n] = 1.0
        return rho

    def moments(self):
        var = (2 * self.n + 1) / 4.0
        return 0.0, 0.0, var, var

    def extent(self):
        return math.sqrt(self.n + 1.0)

    def default_n_max(self):
        return max(DEFAULT_N_MAX, self.n)


_NODE_CACHE: LRUCache = LRUCache(maxsize=64)


@dataclass(frozen=True, eq=False)
class Numeric(StateModel):
    """Truncated density matrix on |0>..|n_max>."""
    rho: np.ndarray = field(repr=False, default_factory=lambda: np.eye(1, dtype=complex))
    validate: bool = True

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        rho.setflags(write=False)
        if not self.validate:
            return
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidState("Density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise InvalidState("Density matrix is not Hermitian within 1e-12")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise InvalidState(f"Density matrix trace {np.trace(rho).real:.12f} differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
            raise InvalidState("Density matrix has eigenvalues below -1e-10")

    @classmethod
    def from_state(cls, state: StateModel, n_max: Optional[int] = None) -> "Numeric":
        rho = state.density_matrix(n_max)
        rho = 0.5 * (rho + rho.conj().T)
        return cls(rho=rho / np.real(np.trace(rho)))

    @property
    def n_max(self) -> int:
        return self.rho.shape[0] - 1

    def cache_key(self):
        return ("Numeric", hashlib.sha256(np.ascontiguousarray(self.rho).tobytes()).hexdigest())

    def char0(self, u, v):
        return fock.numeric_char0(self.rho, np.asarray(u) + 1j * np.asarray(v))

    def node_matrix(self, ordering: OrderingParams, n_nodes: int = DEFAULT_NODES) -> NodeMatrix:
        key = self.cache_key() + (ordering.s_x, ordering.s_y, n_nodes)
        cached = _NODE_CACHE.get(key)
        if cached is None:
            cached = NodeMatrix.build(
                lambda U, V: self.char_function(U + 1j * V, ordering),
                1.0 - ordering.s_y,
                1.0 - ordering.s_x,
                n_nodes,
            )
            _NODE_CACHE[key] = cached
        return cached

    def qpd(self, x, y, ordering):
        ordering.require_transform()
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if ordering.is_wigner:
            return fock.numeric_wigner(self.rho, x + 1j * y)
        shape = np.broadcast(x, y).shape
        z = (np.broadcast_to(x, shape) + 1j * np.broadcast_to(y, shape)).ravel()
        return self.node_matrix(ordering).at_points(z).reshape(shape)

    def qpd_grid_values(self, xs, ys, ordering):
        ordering.require_transform()
        if ordering.is_wigner:
            return super().qpd_grid_values(xs, ys, ordering)
        return self.node_matrix(ordering).on_grid(xs, ys)

    def marginal(self, quadrature, q):
        q = np.asarray(q, dtype=float)
        psi = fock.hermite_functions(self.n_max, q)
        if quadrature == "X":
            return np.real(np.einsum("m...,mn,n...->...", psi, self.rho, psi))
        k = np.arange(self.n_max + 1)
        phase = (-1j) ** (k[:, None] - k[None, :])
        return np.real(np.einsum("m...,mn,n...->...", psi, self.rho * phase, psi))

    def density_matrix(self, n_max=None):
        if n_max is None or n_max == self.n_max:
            return np.array(self.rho)
        dim = n_max + 1
        out = np.zeros((dim, dim), dtype=complex)
        keep = min(dim, self.rho.shape[0])
        out[:keep, :keep] = self.rho[:keep, :keep]
        return out

    def default_n_max(self):
        return self.n_max

    def moments(self):
        return fock.fock_moments(self.rho)

    def is_pure(self):
        return abs(float(np.real(np.trace(self.rho @ self.rho))) - 1.0) < 1e-9

    def top_level(self, tol: float = 1e-12) -> int:
        pops = np.real(np.diag(self.rho))
        idx = np.nonzero(pops > tol)[0]
        return int(idx[-1]) if idx.size else 0

    def extent(self):
        return math.sqrt(self.top_level() + 1.0)
