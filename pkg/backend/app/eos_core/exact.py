"""
Exact count statistics for coherent (and vacuum) signals at any probe strength.

Conditioned on the squeezed-pump amplitude gamma', every ellipsometer sees two
coherent beams, so each dn_i is Skellam distributed.  Averaging over gamma'
(a complex Gaussian of width mu around mu*alpha) is done with a tensor
Gauss-Hermite rule whose order doubles until the table stops moving.
"""
import cmath
import logging
import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..errors import QuadratureNonConvergent, UnsupportedFamily
from ..phase_space import Coherent, StateModel, Vacuum
from ..skellam import skellam_pmf_grid
from .counting import CountTable, _check_table, _outcome_array, clamp_probabilities, outcome_window
from .setup import EosSetup

logger = logging.getLogger(__name__)

START_NODES = 16
MAX_NODES = 256
REL_TOL = 1e-8
ABS_TOL = 1e-15


def skellam_means(setup: EosSetup, gamma_prime) -> Tuple[np.ndarray, np.ndarray]:
    """
    Poisson means (m1, m2) of every channel's two output ports given gamma'.

    eta_i = -(nu/mu) conj(alpha~_i) conj(gamma'), and the ports carry
    e^{-i phi/2} conj(W) (eta_i, beta_i).  Arrays have shape (k,) + shape(gamma').
    """
    g = np.asarray(gamma_prime, dtype=complex)
    m1 = np.empty((setup.n_channels,) + g.shape)
    m2 = np.empty_like(m1)
    for i, (ch, a_t) in enumerate(zip(setup.channels, setup.alpha_tilde)):
        eta = -(setup.nu / setup.mu) * np.conj(a_t) * np.conj(g)
        W = np.conj(ch.waveplate()) * cmath.exp(-0.5j * ch.phi)
        out_s = W[0, 0] * eta + W[0, 1] * ch.probe
        out_z = W[1, 0] * eta + W[1, 1] * ch.probe
        m1[i] = np.abs(out_s) ** 2
        m2[i] = np.abs(out_z) ** 2
    return m1, m2


@lru_cache(maxsize=16)
def _complex_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes t1 + i t2 and weights for (1/pi) int e^{-|t|^2} f(t) d^2t."""
    t, w = special.roots_hermite(n)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    weights = np.outer(w, w).ravel() / math.pi
    return (T1 + 1j * T2).ravel(), weights


def _signal_amplitude(state: StateModel) -> complex:
    if isinstance(state, Vacuum):
        return 0j
    if isinstance(state, Coherent):
        return complex(state.alpha)
    raise UnsupportedFamily(f"The exact Skellam route needs a coherent or vacuum signal, got {type(state).__name__}")


def _table_at(setup: EosSetup, alpha: complex, axes: Sequence[np.ndarray], n_nodes: int) -> np.ndarray:
    t, w = _complex_rule(n_nodes)
    gamma_prime = setup.mu * (alpha + t)
    m1, m2 = skellam_means(setup, gamma_prime)
    factors = [skellam_pmf_grid(ax[:, None], m1[i][None, :], m2[i][None, :]) for i, ax in enumerate(axes)]
    letters = "abcdefghijklm"[: len(axes)]
    spec = ",".join(f"{c}z" for c in letters) + ",z->" + letters
    return np.einsum(spec, *factors, w, optimize=True)


def _adaptive_table(setup: EosSetup, alpha: complex, axes: Sequence[np.ndarray],
                    n_start: int = START_NODES, n_max: int = MAX_NODES) -> np.ndarray:
    n = n_start
    previous = _table_at(setup, alpha, axes, n)
    current, delta = previous, np.full(previous.shape, np.inf)
    while n < n_max:
        n *= 2
        current = _table_at(setup, alpha, axes, n)
        delta = np.abs(current - previous)
        if np.all(delta <= REL_TOL * np.abs(current) + ABS_TOL):
            logger.debug(f"Gauss-Hermite converged with {n} nodes per axis")
            return current
        previous = current
    worst = float(np.max(delta - REL_TOL * np.abs(current)))
    raise QuadratureNonConvergent(f"Gauss-Hermite average did not converge by {n_max} nodes (excess {worst:.3e})")


def exact_count_probability_coherent(setup: EosSetup, alpha: complex, outcomes) -> float:
    """Joint probability of one outcome record for the coherent signal |alpha>."""
    dn = _outcome_array(setup, outcomes).astype(np.int64)
    axes = [np.array([d]) for d in dn]
    p = clamp_probabilities(np.atleast_1d(_adaptive_table(setup, alpha, axes)).ravel())
    return float(p[0])


def exact_count_probability(setup: EosSetup, state: StateModel, outcomes) -> float:
    """Same, for a Vacuum or Coherent state model."""
    return exact_count_probability_coherent(setup, _signal_amplitude(state), outcomes)


def exact_count_distribution(
    setup: EosSetup,
    state: StateModel,
    window: Optional[Sequence[np.ndarray]] = None,
    strict: bool = True,
) -> CountTable:
    """Exact lattice table; the Skellam factors form S_1 diag(w) S_2^T-style contractions."""
    alpha = _signal_amplitude(state)
    axes = tuple(np.asarray(a, dtype=np.int64) for a in (window or outcome_window(setup, state)))
    probs = clamp_probabilities(_adaptive_table(setup, alpha, axes))
    table = CountTable(tuple(f"dn_{i + 1}" for i in range(setup.n_channels)), axes, probs)
    _check_table(table, strict)
    return table
