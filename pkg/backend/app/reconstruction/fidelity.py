"""
Fidelity between an initial state and its Bayesian reconstruction: Monte-Carlo
averages over sampled measurement records and the closed-form ensemble values
used to check them.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from ..eos_core import (
    EosSetup,
    count_distribution,
    statistic_to_point,
    sufficient_statistic_distribution,
)
from ..errors import UnsupportedConfiguration, UnsupportedFamily
from ..phase_space import (
    HUSIMI,
    Coherent,
    Fock,
    GaussianState,
    OrderingParams,
    StateModel,
    qpd_grid,
    wigner_fidelity,
)
from ..pipeline.parallel import DEFAULT_SEED, ParallelProcessor, spawn_generators
from ..post_measurement import post_grid, post_map, post_state
from .families import ParameterFamily, family_for
from .posterior import (
    LIKELIHOOD_MODES,
    PosteriorGrid,
    bayes_update,
    consecutive_update,
    fidelity_vs_initial,
    point_update,
)

logger = logging.getLogger(__name__)

SCHEMES = ("XY", "XYXY", "XY->XY")
EIGHT_PORT_COHERENT = 1.0 / 3.0


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    stderr: float
    n_samples: int
    scheme: str = "XY"

    @classmethod
    def from_samples(cls, values: List[float], scheme: str) -> "FidelityEstimate":
        arr = np.asarray(values, dtype=float)
        stderr = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        return cls(float(np.mean(arr)), stderr, int(arr.size), scheme)


def analytic_avg_fidelity_single(zeta: float) -> float:
    """[2 coth^2|zeta| + 1]^-1, the ensemble fidelity of one symmetric XY record on a coherent state."""
    r = abs(zeta)
    if r == 0:
        return 0.0
    return 1.0 / (2.0 / math.tanh(r) ** 2 + 1.0)


def analytic_pointwise_fidelity(ordering: OrderingParams, z: complex, alpha: complex) -> float:
    """
    Fidelity of |alpha> with the flat-prior coherent reconstruction for outcome point z.

    With a_Q = 2/(1 - s_Q) the posterior is Gaussian with variance 1/(2 a_Q) per
    axis, which gives sqrt(a_Q/(a_Q+1)) exp(-a_Q (z_Q - alpha_Q)^2/(a_Q + 1)) per axis.
    """
    a_x = 2.0 / (1.0 - ordering.s_x)
    a_y = 2.0 / (1.0 - ordering.s_y)
    d = complex(z) - complex(alpha)
    pref = 2.0 / (math.sqrt((1 - ordering.s_x) * (1 - ordering.s_y)) * math.sqrt((a_x + 1) * (a_y + 1)))
    return pref * math.exp(-a_x * d.real ** 2 / (a_x + 1) - a_y * d.imag ** 2 / (a_y + 1))


def gaussian_overlap(a: GaussianState, b: GaussianState) -> float:
    """Tr(rho_a rho_b) = 1/(2 sqrt(det(S_a + S_b))) exp(-d^T (S_a + S_b)^-1 d / 2); the fidelity if either is pure."""
    s = a.covariance + b.covariance
    d = np.array([a.mean.real - b.mean.real, a.mean.imag - b.mean.imag])
    return float(math.exp(-0.5 * d @ np.linalg.solve(s, d)) / (2.0 * math.sqrt(np.linalg.det(s))))


def printed_consecutive_closed_form(zeta: float) -> float:
    """The published consecutive-scheme expression without its 1/pi prefactor; tends to 1/4."""
    sh2 = math.sinh(abs(zeta)) ** 2
    return sh2 / (2 * math.cosh(abs(zeta)) ** 6) * (1 + sh2 + 0.5 * sh2 ** 2)


def _unit(n: int, i: int) -> tuple:
    out = [0] * n
    out[i] = 1
    return tuple(out)


def _consecutive_continuum(setup1: EosSetup, setup2: EosSetup, alpha: complex, mode: str) -> float:
    """
    Ensemble average for XY -> XY on a coherent state.

    Every quantity (outcome points, post-state mean, mapped point, posterior
    mean) is affine in the Gaussian noises, so the average of the Gaussian
    pointwise fidelity is closed form once the affine coefficients are read
    off the exact maps.
    """
    if not (setup1.is_symmetric_xy() and setup2.is_symmetric_xy()):
        raise UnsupportedConfiguration("The consecutive ensemble value is defined for symmetric XY stages")
    k = setup1.n_channels
    zero = (0,) * k
    mu = setup1.mu
    coeffs = setup1.point_coefficients()
    base = post_state(post_map(setup1, zero), Coherent(0j))[0]
    pm0 = post_map(setup1, zero, setup2.s_x, setup2.s_y)

    total = 1.0
    for q, part, axis, shift in (("X", np.real, 0, 1.0), ("Y", np.imag, 1, 1j)):
        i = setup1.indices(q)[0]
        c = float(part(coeffs[i]))
        mp0 = float(part(base.mean))
        a_alpha = float(part(post_state(post_map(setup1, zero), Coherent(shift))[0].mean)) - mp0
        a_n = float(part(post_state(post_map(setup1, _unit(k, i)), Coherent(0j))[0].mean)) - mp0
        cp = float(base.covariance[axis, axis])
        ax0 = pm0.axis(q)
        ax1 = post_map(setup1, _unit(k, i), setup2.s_x, setup2.s_y).axis(q)
        ell = ax0.slope / mu
        kap0 = ax0.offset(mu)
        kap_n = ax1.offset(mu) - kap0
        var1 = (1 - setup1.s_tilde(q)) / 4
        var2 = (1 - ax0.s_prime) / 4
        tau = 1 / var2 if mode == "conditional" else 1 / var1 + 1 / var2

        def residual(a, e1, e2):
            z1 = a + e1
            n1 = z1 / c
            zp = ell * (mp0 + a_alpha * a + a_n * n1 + e2) + kap0 + kap_n * n1
            estimate = zp if mode == "conditional" else (z1 / var1 + zp / var2) / tau
            return a - estimate

        d0 = residual(0, 0, 0)
        d_a = residual(1, 0, 0) - d0
        d_1 = residual(0, 1, 0) - d0
        d_2 = residual(0, 0, 1) - d0
        mean_d = d0 + d_a * float(part(alpha))
        var_d = d_1 ** 2 * var1 + d_2 ** 2 * (cp - setup2.s_tilde(q) / 4)
        kk = 1 + 2 / tau
        total *= math.exp(-mean_d ** 2 / (kk + 2 * var_d)) / math.sqrt(kk + 2 * var_d)
    return total


def continuum_avg_fidelity(
    setup: EosSetup,
    scheme: str = "XY",
    alpha: complex = 0j,
    second_setup: Optional[EosSetup] = None,
    likelihood: str = "factorized",
) -> float:
    """
    Ensemble fidelity for coherent inputs with the outcome sums replaced by integrals.

    XY and XYXY give [(2 - s~_X)(2 - s~_Y)]^-1/2, i.e. 1/(2 - s~) when symmetric.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"Unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if not (setup.pumped("X") and setup.pumped("Y")):
        raise UnsupportedConfiguration("Ensemble fidelity needs both quadratures pumped")
    if scheme in ("XY", "XYXY"):
        return 1.0 / math.sqrt((2 - setup.s_x) * (2 - setup.s_y))
    value = _consecutive_continuum(setup, second_setup or setup, alpha, likelihood)
    printed = printed_consecutive_closed_form(abs(setup.zeta))
    logger.debug(f"Consecutive ensemble fidelity {value:.6f}; the closed form without 1/pi prefactors gives {printed:.6f}")
    return value


def _run_trials(trial: Callable[[np.random.Generator], float], n_samples: int, seed: int,
                processor: Optional[ParallelProcessor]) -> List[float]:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    processor = processor or ParallelProcessor()
    return processor.map_ordered(trial, spawn_generators(seed, n_samples))


def avg_fidelity_mc(
    initial: StateModel,
    setup: EosSetup,
    scheme: str = "XY",
    n_samples: int = 400,
    seed: int = DEFAULT_SEED,
    family: Optional[ParameterFamily] = None,
    second_setup: Optional[EosSetup] = None,
    likelihood: str = "factorized",
    processor: Optional[ParallelProcessor] = None,
) -> FidelityEstimate:
    """
    Monte-Carlo average of the reconstruction fidelity over records drawn
    exactly (inverse CDF on the outcome table) from the model.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"Unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if likelihood not in LIKELIHOOD_MODES:
        raise ValueError(f"Unknown likelihood mode {likelihood!r}")
    family = family or family_for(initial)
    prior = PosteriorGrid.uniform(family)

    if scheme == "XY":
        table = count_distribution(setup, initial)

        def trial(rng):
            dn = table.sample(rng, 1)[0]
            return fidelity_vs_initial(initial, bayes_update(prior, setup, dn))

    elif scheme == "XYXY":
        table = sufficient_statistic_distribution(setup, initial)
        ordering = OrderingParams(setup.s_x, setup.s_y)

        def trial(rng):
            s_x, s_y = table.sample(rng, 1)[0]
            z = statistic_to_point(setup, s_x, s_y)
            return fidelity_vs_initial(initial, point_update(prior, z, ordering, label=(s_x, s_y)))

    else:
        second = second_setup or setup
        table = count_distribution(setup, initial)

        def trial(rng):
            dn1 = table.sample(rng, 1)[0]
            post, _ = post_state(post_map(setup, dn1), initial)
            dn2 = count_distribution(second, post, strict=False).sample(rng, 1)[0]
            posterior = bayes_update(prior, setup, dn1)
            posterior = consecutive_update(posterior, setup, dn1, second, dn2, mode=likelihood)
            return fidelity_vs_initial(initial, posterior)

    values = _run_trials(trial, n_samples, seed, processor)
    estimate = FidelityEstimate.from_samples(values, scheme)
    logger.info(f"{scheme} fidelity at zeta={setup.zeta}: {estimate.mean:.4f} +- {estimate.stderr:.4f} ({n_samples} records)")
    return estimate


def eight_port_mc(
    initial: StateModel,
    n_samples: int = 400,
    seed: int = DEFAULT_SEED,
    family: Optional[ParameterFamily] = None,
    processor: Optional[ParallelProcessor] = None,
) -> FidelityEstimate:
    """Same Bayesian pipeline fed with ideal eight-port records z ~ Q(z) and a Husimi likelihood."""
    family = family or family_for(initial)
    prior = PosteriorGrid.uniform(family)

    if isinstance(initial, Coherent):
        def draw(rng):
            return complex(initial.alpha) + complex(*rng.normal(0.0, math.sqrt(0.5), 2))
    elif isinstance(initial, Fock):
        def draw(rng):
            radius = math.sqrt(rng.gamma(initial.n + 1, 1.0))
            return radius * np.exp(2j * math.pi * rng.random())
    else:
        raise UnsupportedFamily(f"No eight-port sampler for {type(initial).__name__}")

    def trial(rng):
        return fidelity_vs_initial(initial, point_update(prior, draw(rng), HUSIMI))

    return FidelityEstimate.from_samples(_run_trials(trial, n_samples, seed, processor), "eight-port")


def eight_port_reference(initial: StateModel, n_samples: int = 400, seed: int = DEFAULT_SEED) -> float:
    """Dashed-line benchmark: 1/3 for coherent states, the Husimi pipeline otherwise."""
    if isinstance(initial, Coherent):
        return EIGHT_PORT_COHERENT
    if isinstance(initial, Fock):
        return eight_port_mc(initial, n_samples=n_samples, seed=seed).mean
    raise UnsupportedFamily(f"No eight-port reference for {type(initial).__name__}")


def post_fidelity_mc(
    initial: StateModel,
    setup: EosSetup,
    n_samples: int = 200,
    seed: int = DEFAULT_SEED,
    processor: Optional[ParallelProcessor] = None,
) -> FidelityEstimate:
    """Average F(rho, rho') between the initial state and the post-measurement state."""
    table = count_distribution(setup, initial)

    def trial(rng):
        dn = table.sample(rng, 1)[0]
        pm = post_map(setup, dn)
        if isinstance(initial, GaussianState):
            post, _ = post_state(pm, initial)
            return gaussian_overlap(initial, post)
        grid = post_grid(pm, initial, check_window=False)
        return wigner_fidelity(grid, qpd_grid(initial, grid.window, check_window=False))

    return FidelityEstimate.from_samples(_run_trials(trial, n_samples, seed, processor), "post")
