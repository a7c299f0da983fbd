"""
Full interaction U = prod_i W_i D_{z_i}(beta_i) S(zeta) on a truncated register,
used to cross-check the analytic count statistics for small probes.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..eos_core import CountTable, EosSetup
from ..errors import OracleEnvelopeExceeded, VanishingOutcomeProbability
from ..phase_space import Numeric, StateModel
from .register import (
    TruncatedRegister,
    apply_displacement,
    apply_multimode_squeeze,
    apply_waveplate,
    waveplate_transfer,
)

logger = logging.getLogger(__name__)

# cover |beta| <= 2 and |zeta| <= 0.5 for inputs of a few photons
MIR_CAP = 32
NIR_CAP = 30
MAX_PROBE = 2.0
MAX_SQUEEZE = 0.5
MAX_CHANNELS = 2
VANISHING_PROBABILITY = 1e-12
CUTOFF_TAIL = 1e-10
CUTOFF_SCAN = 80


@dataclass(frozen=True)
class Cutoffs:
    mir: int
    nir: int


def check_envelope(setup: EosSetup):
    """Refuse configurations the dense register cannot hold."""
    if setup.n_channels > MAX_CHANNELS:
        raise OracleEnvelopeExceeded(f"{setup.n_channels} channels exceed the oracle limit of {MAX_CHANNELS}")
    if abs(setup.zeta) > MAX_SQUEEZE + 1e-12:
        raise OracleEnvelopeExceeded(f"|zeta| = {abs(setup.zeta):.3g} exceeds the oracle limit of {MAX_SQUEEZE}")
    for ch in setup.channels:
        if ch.probe_amp > MAX_PROBE + 1e-12:
            raise OracleEnvelopeExceeded(
                f"Channel {ch.index}: |beta| = {ch.probe_amp:.3g} exceeds the oracle limit of {MAX_PROBE}"
            )


def _mean_photons(state: StateModel) -> float:
    rho = state.density_matrix()
    return float(np.real(np.sum(np.arange(rho.shape[0]) * np.diag(rho))))


def _port_amplitudes(setup: EosSetup, index: int) -> np.ndarray:
    """Probe amplitude carried by (s, z) after the retarder, see ``evolve``."""
    ch = setup.channels[index]
    T = waveplate_transfer(ch.phi, ch.theta)
    return T[:, 1] * ch.probe


def tail_cutoff(n_coherent: float, n_thermal: float, limit: float = CUTOFF_TAIL) -> int:
    """
    Smallest cutoff whose top two levels and beyond hold at most ``limit`` for a
    displaced thermal photon distribution (Poisson convolved with geometric).
    """
    k = np.arange(CUTOFF_SCAN)
    p = stats.poisson.pmf(k, n_coherent)
    if n_thermal > 0:
        t = n_thermal / (1.0 + n_thermal)
        p = np.convolve(p, (1.0 - t) * t ** k)[:CUTOFF_SCAN]
    tail = p[::-1].cumsum()[::-1]
    above = np.nonzero(tail <= limit)[0]
    return int(above[0]) + 1 if above.size else CUTOFF_SCAN


def cutoff_policy(setup: EosSetup, state: StateModel) -> Cutoffs:
    """Per-mode cutoffs from the expected photon statistics, capped at MIR_CAP / NIR_CAP."""
    sh2 = math.sinh(abs(setup.zeta)) ** 2
    n_in = _mean_photons(state)
    mir = tail_cutoff(setup.mu ** 2 * n_in, sh2)
    nir = 0
    for i in range(setup.n_channels):
        a_t = abs(setup.alpha_tilde[i])
        b = float(np.max(np.abs(_port_amplitudes(setup, i))))
        coherent = (b + setup.abs_nu * a_t * math.sqrt(n_in)) ** 2
        nir = max(nir, tail_cutoff(coherent, sh2 * a_t ** 2))
    if mir > MIR_CAP or nir > NIR_CAP:
        logger.warning(f"Cutoff policy asked for (mir={mir}, nir={nir}); capping at ({MIR_CAP}, {NIR_CAP})")
    return Cutoffs(min(mir, MIR_CAP), min(nir, NIR_CAP))


def register_from_setup(setup: EosSetup, state: StateModel, cutoffs: Optional[Cutoffs] = None) -> TruncatedRegister:
    """MIR input state with every NIR mode in vacuum."""
    check_envelope(setup)
    cutoffs = cutoffs or cutoff_policy(setup, state)
    vec = state.state_vector(cutoffs.mir)
    return TruncatedRegister.product(vec, setup.n_channels, cutoffs.mir, cutoffs.nir)


def evolve(setup: EosSetup, state: StateModel, cutoffs: Optional[Cutoffs] = None,
           squeeze_route: str = "generator") -> TruncatedRegister:
    """
    Squeeze, then per channel the retarder followed by the displacements
    D(T beta_i) on (s_i, z_i).  Commuting the probe displacement through the
    passive retarder keeps each NIR mode at about half the probe photons.
    """
    reg = register_from_setup(setup, state, cutoffs)
    logger.debug(f"Oracle register {reg.labels} with cutoffs {reg.cutoffs}")
    reg = apply_multimode_squeeze(reg, setup.zeta, setup.alpha_tilde, route=squeeze_route)
    for i, ch in enumerate(setup.channels, start=1):
        reg = apply_waveplate(reg, i, ch.phi, ch.theta)
        b_s, b_z = _port_amplitudes(setup, i - 1)
        reg = apply_displacement(reg, f"s{i}", complex(b_s))
        reg = apply_displacement(reg, f"z{i}", complex(b_z))
    logger.info(f"Oracle evolution done: tail {reg.tail_mass():.2e}, leaked {reg.leaked:.2e}")
    return reg


def _nir_populations(reg: TruncatedRegister) -> np.ndarray:
    return np.sum(np.abs(reg.psi) ** 2, axis=reg.axis("mir"))


def _shell_mask(reg: TruncatedRegister, outcomes: Sequence[int]) -> np.ndarray:
    """Boolean mask over the NIR axes selecting n_s - n_z = dn per channel."""
    shape = reg.psi.shape[1:]
    mask = np.ones(shape, dtype=bool)
    for i, dn in enumerate(outcomes):
        cs, cz = shape[2 * i], shape[2 * i + 1]
        pair = np.subtract.outer(np.arange(cs), np.arange(cz)) == int(dn)
        view = [1] * len(shape)
        view[2 * i], view[2 * i + 1] = cs, cz
        mask = mask & pair.reshape(view)
    return mask


def outcome_probabilities(reg: TruncatedRegister) -> CountTable:
    """Distribution of dn_i = n_{i,s} - n_{i,z}, summed over photon-number shells."""
    pops = _nir_populations(reg)
    axes = []
    for i in range(reg.n_channels):
        cs, cz = pops.shape[0], pops.shape[1]
        shifts = np.arange(-(cz - 1), cs)
        # diagonal offset -dn collects n_s - n_z = dn
        diag = np.stack([np.trace(pops, offset=-int(d), axis1=0, axis2=1) for d in shifts], axis=-1)
        pops = diag
        axes.append(shifts)
    labels = tuple(f"dn_{i + 1}" for i in range(reg.n_channels))
    return CountTable(labels, tuple(axes), np.real(pops))


def post_state(reg: TruncatedRegister, outcomes: Sequence[int]) -> Tuple[Numeric, float]:
    """Normalized MIR density matrix conditioned on the outcomes, and their probability."""
    if len(outcomes) != reg.n_channels:
        raise ValueError(f"Expected {reg.n_channels} outcomes, got {len(outcomes)}")
    masked = reg.psi * _shell_mask(reg, outcomes)[None, ...]
    flat = masked.reshape(masked.shape[0], -1)
    rho = flat @ flat.conj().T
    p = float(np.real(np.trace(rho)))
    if p < VANISHING_PROBABILITY:
        raise VanishingOutcomeProbability(f"Outcome {tuple(outcomes)} has oracle probability {p:.3e}")
    rho = rho / p
    return Numeric(rho=0.5 * (rho + rho.conj().T)), p


def oracle_count_distribution(setup: EosSetup, state: StateModel, cutoffs: Optional[Cutoffs] = None) -> CountTable:
    return outcome_probabilities(evolve(setup, state, cutoffs))
