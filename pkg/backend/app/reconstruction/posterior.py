"""
Bayesian parameter distributions over a state family and the reconstructed
mixture sum_j w_j rho_lambda_j.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import special

from ..eos_core import EosSetup, count_probability, log_envelope, outcome_to_point
from ..errors import NonPureInitial, TruncationOverflow, UnsupportedConfiguration, ZeroEvidence
from ..phase_space import Coherent, Fock, Numeric, OrderingParams, StateModel
from ..phase_space.fock import coherent_vector
from ..post_measurement import post_map, prime_map
from .families import ParameterFamily

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-10
TAIL_LIMIT = 1e-6
RECONSTRUCTION_N_MAX = 120
LIKELIHOOD_MODES = ("factorized", "conditional")


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    family: ParameterFamily
    weights: np.ndarray = field(repr=False)
    history: Tuple[Tuple[int, ...], ...] = ()

    @classmethod
    def uniform(cls, family: ParameterFamily) -> "PosteriorGrid":
        return cls(family, family.prior())

    def mode(self):
        return self.family.parameter(int(np.argmax(self.weights)))

    def entropy(self) -> float:
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log(w)))

    def mean_parameter(self) -> complex:
        params = np.array([self.family.parameter(j) for j in range(self.family.size)])
        return complex(np.sum(self.weights * params))


def _normalized(posterior: PosteriorGrid, log_like: np.ndarray, outcomes) -> PosteriorGrid:
    """Posterior from the prior weights and a log-likelihood, normalized with logsumexp."""
    if np.any(np.isnan(log_like)) or np.any(log_like == np.inf):
        raise ZeroEvidence("Non-finite likelihood on the parameter grid")
    log_w = np.full(posterior.weights.shape, -np.inf)
    alive = posterior.weights > 0
    log_w[alive] = np.log(posterior.weights[alive]) + log_like[alive]
    log_total = special.logsumexp(log_w)
    if not np.isfinite(log_total):
        raise ZeroEvidence(f"Every likelihood underflowed for outcomes {tuple(outcomes)}")
    weights = np.exp(log_w - log_total)
    return PosteriorGrid(posterior.family, weights, posterior.history + (tuple(int(d) for d in outcomes),))


def log_likelihood(family: ParameterFamily, setup: EosSetup, outcomes) -> np.ndarray:
    """
    log p(outcomes | lambda_j) for every node.

    With both quadratures pumped this is log N(dn) + log rho_lambda(z; s~_X, s~_Y),
    so only the family's quasiprobability at one point is needed.
    """
    if setup.pumped("X") and setup.pumped("Y"):
        z = outcome_to_point(setup, outcomes)
        return log_envelope(setup, outcomes) + family.log_qpd_at(z, OrderingParams(setup.s_x, setup.s_y))
    p = np.array([count_probability(setup, family.member(j), outcomes) for j in range(family.size)])
    out = np.full(p.shape, -np.inf)
    out[p > 0] = np.log(p[p > 0])
    return out


def likelihood(family: ParameterFamily, setup: EosSetup, outcomes) -> np.ndarray:
    """p(outcomes | lambda_j) for every node."""
    return np.exp(log_likelihood(family, setup, outcomes))


def bayes_update(posterior: PosteriorGrid, setup: EosSetup, outcomes) -> PosteriorGrid:
    """Multiply by the count-probability likelihood and renormalize."""
    return _normalized(posterior, log_likelihood(posterior.family, setup, outcomes), outcomes)


def point_update(posterior: PosteriorGrid, z: complex, ordering: OrderingParams, label=()) -> PosteriorGrid:
    """Update from an outcome point alone; the envelope does not depend on lambda."""
    return _normalized(posterior, posterior.family.log_qpd_at(z, ordering), label)


def consecutive_update(
    posterior: PosteriorGrid,
    first_setup: EosSetup,
    first_outcomes,
    setup: EosSetup,
    outcomes,
    mode: str = "factorized",
) -> PosteriorGrid:
    """
    Second-stage update after a first measurement with ``first_outcomes``.

    The second record enters through rho_lambda(z'(z_2); s'_X, s'_Y) where the
    map and orderings come from the first stage evaluated at the second
    stage's s~.  ``factorized`` multiplies this factor onto the stage-one
    posterior; ``conditional`` divides out the stage-one likelihood so the
    product is the true joint likelihood of both records.
    """
    if mode not in LIKELIHOOD_MODES:
        raise ValueError(f"Unknown likelihood mode {mode!r}; expected one of {LIKELIHOOD_MODES}")
    if not (setup.pumped("X") and setup.pumped("Y")):
        raise UnsupportedConfiguration("Consecutive updates need both quadratures pumped in the second stage")
    family = posterior.family
    pm = post_map(first_setup, first_outcomes, setup.s_x, setup.s_y)
    z_prime = prime_map(pm, outcome_to_point(setup, outcomes))
    log_factor = family.log_qpd_at(z_prime, pm.prime_ordering)
    if mode == "conditional":
        first = log_likelihood(family, first_setup, first_outcomes)
        log_factor = np.where(np.isfinite(first), log_factor - np.where(np.isfinite(first), first, 0.0), -np.inf)
    return _normalized(posterior, log_factor, outcomes)


def _initial_vector(initial: StateModel, dim: int) -> np.ndarray:
    if not initial.is_pure():
        raise NonPureInitial(f"{type(initial).__name__} is not a pure state")
    if isinstance(initial, Coherent):
        return coherent_vector(initial.alpha, dim)
    if isinstance(initial, Fock):
        vec = np.zeros(dim, dtype=complex)
        if initial.n < dim:
            vec[initial.n] = 1.0
        return vec
    return initial.state_vector(dim - 1)


def _active(posterior: PosteriorGrid, cutoff: float = 1e-14) -> np.ndarray:
    return np.nonzero(posterior.weights > cutoff * np.max(posterior.weights))[0]


def fidelity_vs_initial(initial: StateModel, posterior: PosteriorGrid, n_max: int = RECONSTRUCTION_N_MAX) -> float:
    """<psi| rho_rec |psi> = sum_j w_j |<psi|lambda_j>|^2 in the truncated Fock basis."""
    dim = n_max + 1
    psi = _initial_vector(initial, dim)
    idx = _active(posterior)
    amps = posterior.family.vectors(dim)[idx] @ psi.conj()
    return float(np.sum(posterior.weights[idx] * np.abs(amps) ** 2))


def reconstruct(posterior: PosteriorGrid, n_max: int = RECONSTRUCTION_N_MAX) -> Numeric:
    """Assemble rho_rec = sum_j w_j |lambda_j><lambda_j| as a Numeric state."""
    dim = n_max + 1
    idx = _active(posterior)
    w = posterior.weights[idx]
    vecs = posterior.family.vectors(dim)[idx]
    norms = np.sum(np.abs(vecs) ** 2, axis=1)
    tail = float(np.sum(w * (1.0 - norms)))
    if tail > TAIL_LIMIT:
        raise TruncationOverflow(f"Reconstruction leaks {tail:.3e} of its weight beyond n = {n_max}")
    rho = (vecs.T * w) @ vecs.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return Numeric(rho=rho / np.real(np.trace(rho)))


def single_node(family: ParameterFamily, j: int) -> PosteriorGrid:
    weights = np.zeros(family.size)
    weights[j] = 1.0
    return PosteriorGrid(family, weights)
