"""Measurement channels, waveplate algebra and the balanced-signal solution."""
import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ApproximationDomain, UnsupportedConfiguration

PROBE_FLOOR = 5.0
BALANCE_TOL = 1e-10
ROTATION_TOL = 1e-12
QUADRATURE_TARGET = {"X": 0.0, "Y": math.pi / 2}


def waveplate_matrix(phi: float, theta: float) -> np.ndarray:
    """2x2 W matrix of a phi-retarder rotated by theta, acting on (s, z) amplitudes."""
    c = math.cos(phi / 2) + 1j * math.sin(phi / 2) * math.cos(2 * theta)
    off = 1j * math.sin(phi / 2) * math.sin(2 * theta)
    return np.array([[c, off], [off, np.conj(c)]])


def balanced_rotation(phi: float, k1: int = 0, k2: int = 0) -> float:
    """Rotation angle that balances the ellipsometer signal for retardance phi."""
    if not (math.pi / 2 - 1e-12 <= phi <= 3 * math.pi / 2 + 1e-12):
        raise UnsupportedConfiguration(f"Balanced rotation needs pi/2 <= phi <= 3pi/2, got {phi}")
    cot = math.cos(phi / 2) / math.sin(phi / 2)
    radicand = max(0.0, 0.5 * (1.0 - cot ** 2))
    return ((-1) ** k1) * 0.5 * math.acos(((-1) ** k2) * math.sqrt(radicand))


def interference_phase(phi: float, k1: int, k2: int, zeta: complex, alpha_tilde: complex, beta: complex) -> float:
    """Phase varphi governing the interference at one ellipsometer, reduced mod 2 pi."""
    arg_zeta = cmath.phase(zeta) if zeta != 0 else 0.0
    arg_alpha = cmath.phase(alpha_tilde) if alpha_tilde != 0 else 0.0
    arg_beta = cmath.phase(beta) if beta != 0 else 0.0
    value = (
        (k1 + k2 + 1) * math.pi
        + ((-1) ** k2) * math.asin(max(-1.0, min(1.0, math.sqrt(2.0) * math.cos(phi / 2))))
        + arg_zeta
        - arg_alpha
        - arg_beta
    )
    return value % (2 * math.pi)


@dataclass(frozen=True)
class WaveplateSolution:
    phi: float
    theta: float
    k1: int
    k2: int
    probe_phase: float


def solve_waveplate(
    pump_phase: float,
    probe_amp: float,
    quadrature: str,
    zeta_phase: float = 0.0,
    min_probe: float = PROBE_FLOOR,
) -> WaveplateSolution:
    """
    Canonical balanced branch: phi = pi, k1 = k2 = 0, theta = pi/8, and the phase
    target (0 for X, pi/2 for Y) absorbed into arg beta.
    """
    if quadrature not in QUADRATURE_TARGET:
        raise UnsupportedConfiguration(f"Unknown quadrature {quadrature!r}")
    if probe_amp < min_probe:
        raise ApproximationDomain(f"Probe amplitude {probe_amp} below the floor {min_probe}")
    phi = math.pi
    probe_phase = (math.pi + zeta_phase - pump_phase - QUADRATURE_TARGET[quadrature]) % (2 * math.pi)
    return WaveplateSolution(phi=phi, theta=balanced_rotation(phi), k1=0, k2=0, probe_phase=probe_phase)


@dataclass(frozen=True)
class ChannelSpec:
    """User-facing channel description; missing waveplate data is solved for balance."""
    pump: complex
    probe: complex
    quadrature: str
    phi: Optional[float] = None
    theta: Optional[float] = None
    k1: int = 0
    k2: int = 0


@dataclass(frozen=True)
class Channel:
    index: int
    pump: complex
    probe: complex
    phi: float
    theta: float
    k1: int
    k2: int
    quadrature: str

    @property
    def probe_amp(self) -> float:
        return abs(self.probe)

    def waveplate(self) -> np.ndarray:
        return waveplate_matrix(self.phi, self.theta)
