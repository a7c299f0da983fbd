"""Exact and Gaussian-approximated Skellam probabilities."""
import math
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import special, stats

from ..errors import ApproximationDomain, NonFiniteParams

logger = logging.getLogger(__name__)

IntLike = Union[int, np.ndarray]

# m1 + m2 below this makes the continuous density a poor stand-in for the lattice pmf
GAUSSIAN_VALIDITY_FLOOR = 25.0
BRUTEFORCE_TAIL = 1e-18
THETA_SERIES_TOL = 1e-16


@dataclass(frozen=True)
class SkellamParams:
    """Means of the two Poisson processes whose difference is counted."""
    m1: float
    m2: float

    def __post_init__(self):
        for name in ("m1", "m2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NonFiniteParams(f"Skellam mean {name}={value} is not finite")
            if value < 0:
                raise NonFiniteParams(f"Skellam mean {name}={value} is negative")

    @property
    def total(self) -> float:
        return self.m1 + self.m2


def skellam_pmf_exact(dn: IntLike, p: SkellamParams) -> Union[float, np.ndarray]:
    """
    e^{-(m1+m2)} (m1/m2)^{dn/2} I_dn(2 sqrt(m1 m2)).

    The exponentially scaled Bessel function keeps the product finite for means
    up to ~1e6; I_{-n} = I_n for integer order.
    """
    dn_arr = np.asarray(dn)
    scalar = dn_arr.ndim == 0
    dn_arr = np.atleast_1d(dn_arr).astype(np.int64)

    m1, m2 = p.m1, p.m2
    if m1 == 0.0 and m2 == 0.0:
        out = (dn_arr == 0).astype(float)
    elif m2 == 0.0:
        out = np.where(dn_arr >= 0, stats.poisson.pmf(np.abs(dn_arr), m1), 0.0)
    elif m1 == 0.0:
        out = np.where(dn_arr <= 0, stats.poisson.pmf(np.abs(dn_arr), m2), 0.0)
    else:
        x = 2.0 * math.sqrt(m1 * m2)
        log_prefactor = -(math.sqrt(m1) - math.sqrt(m2)) ** 2 + 0.5 * dn_arr * math.log(m1 / m2)
        out = np.exp(log_prefactor) * special.ive(np.abs(dn_arr), x)

    return float(out[0]) if scalar else out


def skellam_pmf_gaussian(dn: IntLike, p: SkellamParams) -> Union[float, np.ndarray]:
    """Normal density with the Skellam mean and variance, evaluated on the lattice."""
    if p.total < GAUSSIAN_VALIDITY_FLOOR:
        raise ApproximationDomain(
            f"Gaussian Skellam approximation needs m1+m2 >= {GAUSSIAN_VALIDITY_FLOOR}, got {p.total:.4g}"
        )
    out = stats.norm.pdf(np.asarray(dn, dtype=float), loc=p.m1 - p.m2, scale=math.sqrt(p.total))
    return float(out) if np.ndim(out) == 0 else out


def skellam_pmf_bruteforce(dn: int, p: SkellamParams) -> float:
    """Poisson-product oracle: sum_n Poisson(n + dn; m1) Poisson(n; m2)."""
    start = max(0, -int(dn))
    total = 0.0
    n = start
    mode = int(max(p.m1, p.m2)) + 1
    while True:
        a = stats.poisson.pmf(n + dn, p.m1)
        b = stats.poisson.pmf(n, p.m2)
        total += a * b
        if n > mode and a < BRUTEFORCE_TAIL and b < BRUTEFORCE_TAIL:
            break
        n += 1
    return float(total)


def skellam_moments(p: SkellamParams) -> Tuple[float, float]:
    return p.m1 - p.m2, p.m1 + p.m2


def theta3_diagnostic(p: SkellamParams, dn: int) -> float:
    """
    |theta_3(z; tau) - 1| for the theta factor left over when the Skellam pmf
    is written as a Gaussian times a Jacobi theta function.

    tau = i pi q with q = 2 m1 m2 / (m1 + m2) and z = (dn - 2 m1) m2 / (m1 + m2),
    so the n-th series term is 2 exp(-pi^2 n^2 q) cos(2 pi n z).
    """
    if p.m1 <= 0 or p.m2 <= 0:
        raise NonFiniteParams("theta diagnostic requires m1, m2 > 0")
    q = 2.0 * p.m1 * p.m2 / p.total
    z = (dn - 2.0 * p.m1) * p.m2 / p.total

    total = 0.0
    first = None
    n = 1
    while True:
        magnitude = 2.0 * math.exp(-(math.pi ** 2) * n * n * q)
        if first is None:
            first = magnitude
        total += magnitude * math.cos(2.0 * math.pi * n * z)
        if magnitude == 0.0 or magnitude < THETA_SERIES_TOL * first:
            break
        n += 1
    return abs(total)


def skellam_pmf_grid(dn: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """
    Elementwise exact pmf with broadcasting over dn and both means.

    Entries with a vanishing mean fall back to the one-sided Poisson pmf.
    """
    dn, m1, m2 = np.broadcast_arrays(np.asarray(dn, dtype=np.int64), np.asarray(m1, float), np.asarray(m2, float))
    if not (np.all(np.isfinite(m1)) and np.all(np.isfinite(m2))):
        raise NonFiniteParams("Skellam means must be finite")
    if np.any(m1 < 0) or np.any(m2 < 0):
        raise NonFiniteParams("Skellam means must be non-negative")

    out = np.zeros(dn.shape)
    both = (m1 > 0) & (m2 > 0)
    if np.any(both):
        a, b, d = m1[both], m2[both], dn[both]
        log_prefactor = -(np.sqrt(a) - np.sqrt(b)) ** 2 + 0.5 * d * np.log(a / b)
        out[both] = np.exp(log_prefactor) * special.ive(np.abs(d), 2.0 * np.sqrt(a * b))
    only1 = (m1 > 0) & (m2 == 0)
    if np.any(only1):
        d = dn[only1]
        out[only1] = np.where(d >= 0, stats.poisson.pmf(np.abs(d), m1[only1]), 0.0)
    only2 = (m1 == 0) & (m2 > 0)
    if np.any(only2):
        d = dn[only2]
        out[only2] = np.where(d <= 0, stats.poisson.pmf(np.abs(d), m2[only2]), 0.0)
    neither = (m1 == 0) & (m2 == 0)
    out[neither] = (dn[neither] == 0).astype(float)
    return out
