"""EosSetup: the full measurement configuration and its derived constants."""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..errors import EmptySetup, UnsupportedConfiguration, ZeroPump
from .channels import (
    BALANCE_TOL,
    QUADRATURE_TARGET,
    ROTATION_TOL,
    Channel,
    ChannelSpec,
    balanced_rotation,
    interference_phase,
    solve_waveplate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EosSetup:
    zeta: complex
    channels: Tuple[Channel, ...]
    mu: float
    nu: complex
    alpha_tilde: Tuple[complex, ...]
    A_x: float
    A_y: float
    s_x: float
    s_y: float

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def abs_nu(self) -> float:
        return abs(self.nu)

    def indices(self, quadrature: str) -> List[int]:
        return [i for i, ch in enumerate(self.channels) if ch.quadrature == quadrature]

    def strength(self, quadrature: str) -> float:
        return self.A_x if quadrature == "X" else self.A_y

    def s_tilde(self, quadrature: str) -> float:
        return self.s_x if quadrature == "X" else self.s_y

    def ratios(self) -> np.ndarray:
        """|alpha~_i| / |beta_i| per channel."""
        return np.array([abs(a) / ch.probe_amp for a, ch in zip(self.alpha_tilde, self.channels)])

    def pumped(self, quadrature: str) -> bool:
        return self.strength(quadrature) > 0

    def point_coefficients(self) -> np.ndarray:
        """Complex c_i with z = sum_i c_i dn_i."""
        coeffs = np.zeros(self.n_channels, dtype=complex)
        ratios = self.ratios()
        for i, ch in enumerate(self.channels):
            if ratios[i] == 0 or not self.pumped(ch.quadrature):
                continue
            scale = -self.abs_nu * (1.0 + self.s_tilde(ch.quadrature)) / 2.0 * ratios[i]
            coeffs[i] = scale if ch.quadrature == "X" else 1j * scale
        return coeffs

    def is_symmetric_xy(self, tol: float = 1e-12) -> bool:
        x, y = self.indices("X"), self.indices("Y")
        if len(x) != 1 or len(y) != 1:
            return False
        return abs(abs(self.alpha_tilde[x[0]]) - abs(self.alpha_tilde[y[0]])) < tol

    def grouped_ratio(self, quadrature: str, tol: float = 1e-12) -> float:
        """Common |alpha~|/|beta| of a quadrature group, if the group shares one."""
        idx = self.indices(quadrature)
        ratios = self.ratios()[idx]
        if ratios.size == 0:
            return 0.0
        if np.max(ratios) - np.min(ratios) > tol * max(1.0, np.max(ratios)):
            raise UnsupportedConfiguration(
                f"Channels in the {quadrature} group do not share a common |alpha~|/|beta| ratio"
            )
        return float(ratios[0])


def derive_setup(zeta: complex, specs: Sequence[ChannelSpec], check_balance: bool = True) -> EosSetup:
    """Resolve channel specs into an immutable EosSetup with all derived constants."""
    specs = list(specs)
    if not specs:
        raise EmptySetup("A measurement setup needs at least one channel")
    total = math.sqrt(sum(abs(s.pump) ** 2 for s in specs))
    if total == 0:
        raise ZeroPump("At least one channel must carry a non-zero pump")

    zeta = complex(zeta)
    zeta_phase = cmath.phase(zeta) if zeta != 0 else 0.0
    mu = math.cosh(abs(zeta))
    nu = cmath.exp(1j * zeta_phase) * math.sinh(abs(zeta))
    alpha_tilde = tuple(complex(s.pump) / total for s in specs)

    channels = []
    for i, (spec, a_t) in enumerate(zip(specs, alpha_tilde)):
        if spec.quadrature not in QUADRATURE_TARGET:
            raise UnsupportedConfiguration(f"Channel {i}: unknown quadrature {spec.quadrature!r}")
        if spec.phi is None:
            pump_phase = cmath.phase(spec.pump) if spec.pump != 0 else 0.0
            sol = solve_waveplate(pump_phase, abs(spec.probe), spec.quadrature, zeta_phase, min_probe=0.0)
            probe = abs(spec.probe) * cmath.exp(1j * sol.probe_phase)
            channel = Channel(i, complex(spec.pump), probe, sol.phi, sol.theta, sol.k1, sol.k2, spec.quadrature)
        else:
            theta = spec.theta if spec.theta is not None else balanced_rotation(spec.phi, spec.k1, spec.k2)
            channel = Channel(i, complex(spec.pump), complex(spec.probe), spec.phi, theta, spec.k1, spec.k2, spec.quadrature)
        if check_balance:
            _check_balance(channel, zeta, a_t)
        channels.append(channel)

    A = {"X": 0.0, "Y": 0.0}
    for ch, a_t in zip(channels, alpha_tilde):
        A[ch.quadrature] += 2.0 * abs(nu) ** 2 * abs(a_t) ** 2

    setup = EosSetup(
        zeta=zeta,
        channels=tuple(channels),
        mu=mu,
        nu=nu,
        alpha_tilde=alpha_tilde,
        A_x=A["X"],
        A_y=A["Y"],
        s_x=s_tilde(A["X"]),
        s_y=s_tilde(A["Y"]),
    )
    logger.debug(f"Derived setup: zeta={zeta}, A_X={setup.A_x:.6g}, A_Y={setup.A_y:.6g}, s~=({setup.s_x:.6g}, {setup.s_y:.6g})")
    return setup


def s_tilde(A: float) -> float:
    """1 - 2 / (1 - 1/(1 + A)) = -1 - 2/A; -inf for an unpumped quadrature."""
    if A <= 0:
        return -math.inf
    return -1.0 - 2.0 / A


def _check_balance(channel: Channel, zeta: complex, alpha_tilde: complex):
    if not (math.pi / 2 - 1e-12 <= channel.phi <= 3 * math.pi / 2 + 1e-12):
        raise UnsupportedConfiguration(f"Channel {channel.index}: retardance {channel.phi} outside [pi/2, 3pi/2]")
    expected = balanced_rotation(channel.phi, channel.k1, channel.k2)
    if abs(channel.theta - expected) > ROTATION_TOL:
        raise UnsupportedConfiguration(
            f"Channel {channel.index}: rotation {channel.theta} does not balance the signal (expected {expected})"
        )
    if alpha_tilde == 0:
        return
    varphi = interference_phase(channel.phi, channel.k1, channel.k2, zeta, alpha_tilde, channel.probe)
    target = 1.0 if channel.quadrature == "X" else 1j
    if abs(cmath.exp(1j * varphi) - target) > BALANCE_TOL:
        raise UnsupportedConfiguration(
            f"Channel {channel.index}: interference phase e^(i varphi) = {cmath.exp(1j * varphi):.6f} "
            f"does not select the {channel.quadrature} quadrature"
        )


def symmetric_xy(zeta: complex, beta: float, pump: complex = 1.0) -> EosSetup:
    """One X and one Y channel with equal pumps and probes."""
    return derive_setup(zeta, [ChannelSpec(pump, beta, "X"), ChannelSpec(pump, beta, "Y")])


def symmetric_xyxy(zeta: complex, beta: float, pump: complex = 1.0) -> EosSetup:
    """Two X and two Y channels with equal pumps and probes."""
    return derive_setup(zeta, [ChannelSpec(pump, beta, q) for q in ("X", "Y", "X", "Y")])


def x_only(zeta: complex, beta: float, n_channels: int = 1) -> EosSetup:
    return derive_setup(zeta, [ChannelSpec(1.0, beta, "X") for _ in range(n_channels)])


def detuned(setup: EosSetup, theta_offset: float) -> EosSetup:
    """Copy of a setup with every waveplate rotated off the balanced branch."""
    specs: Iterable[ChannelSpec] = [
        ChannelSpec(ch.pump, ch.probe, ch.quadrature, phi=ch.phi, theta=ch.theta + theta_offset, k1=ch.k1, k2=ch.k2)
        for ch in setup.channels
    ]
    return derive_setup(setup.zeta, list(specs), check_balance=False)
