"""
Post-measurement quasiprobability of the MIR mode after a selective EOS record.

rho'(z; s_X, s_Y) = N'(z) rho(z'(z); s'_X, s'_Y): the initial state's
distribution, evaluated at a rescaled and displaced argument with a broader
ordering, times an outcome-dependent envelope.  Per quadrature Q with
M_Q = mu^2 / (1 + A_Q) and D_Q = M_Q - (1 + s_Q)/2:

    2 / (1 - s'_Q) = 1 - M_Q/mu^2 + M_Q^2 / (mu^2 D_Q)
    z'_Q = (1 - s'_Q) M_Q / (2 mu) [z~_Q (1 - M_Q/D_Q) + z_Q / D_Q]

For A_Q = |nu|^2 (every symmetric split) M_Q = 1 and these reduce to the
familiar s' = 1 - 2 mu^2 [|nu|^2 + 1/D]^-1, z' = (1-s')/(2 mu) (z~ + (z - z~)/D).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special

from ..eos_core import EosSetup, count_probability
from ..eos_core.counting import _outcome_array
from ..errors import OrderingOutOfRange, VanishingOutcomeProbability, WindowTooSmall
from ..phase_space import (
    WIGNER,
    Coherent,
    Gaussian,
    GaussianState,
    Numeric,
    OrderingParams,
    QpdGrid,
    StateModel,
    Window,
    numeric_from_wigner,
)
from ..phase_space.grid import BOUNDARY_RATIO_LIMIT, DEFAULT_GRID_POINTS

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-300
CHARACTERISTIC_NODES = 80
PROJECTION_N_MIN = 40
PROJECTION_N_MAX = 160


@dataclass(frozen=True)
class AxisMap:
    """Affine z -> z' map and envelope constants along one quadrature."""
    M: float
    D: float
    s: float
    s_prime: float
    z_tilde: float

    @property
    def slope(self) -> float:
        return (1 - self.s_prime) * self.M / (2 * self.D)

    def offset(self, mu: float) -> float:
        return (1 - self.s_prime) * self.M / (2 * mu) * self.z_tilde * (1 - self.M / self.D)

    def apply(self, q, mu: float):
        return self.slope / mu * q + self.offset(mu)

    def exponent(self, q, q_prime):
        """Quadrature's contribution to the envelope exponent."""
        return 2 * q_prime ** 2 / (1 - self.s_prime) + self.M * self.z_tilde ** 2 - (self.M * self.z_tilde - q) ** 2 / self.D


@dataclass(frozen=True)
class PostMap:
    setup: EosSetup
    outcomes: Tuple[int, ...]
    s_x: float
    s_y: float
    s_prime_x: float
    s_prime_y: float
    y_tilde: complex
    z_tilde: complex

    @property
    def ordering(self) -> OrderingParams:
        return OrderingParams(self.s_x, self.s_y)

    @property
    def prime_ordering(self) -> OrderingParams:
        return OrderingParams(self.s_prime_x, self.s_prime_y)

    def axis(self, quadrature: str) -> AxisMap:
        A = self.setup.strength(quadrature)
        M = self.setup.mu ** 2 / (1 + A)
        s = self.s_x if quadrature == "X" else self.s_y
        sp = self.s_prime_x if quadrature == "X" else self.s_prime_y
        zt = self.z_tilde.real if quadrature == "X" else self.z_tilde.imag
        return AxisMap(M=M, D=M - (1 + s) / 2, s=s, s_prime=sp, z_tilde=zt)

    def contraction(self) -> Tuple[float, float]:
        """Linear factor of z -> z' along X and Y."""
        mu = self.setup.mu
        return self.axis("X").slope / mu, self.axis("Y").slope / mu


def _axis_prime(setup: EosSetup, quadrature: str, s: float) -> float:
    A = setup.strength(quadrature)
    mu2 = setup.mu ** 2
    M = mu2 / (1 + A)
    if not s < 2 * M - 1:
        raise OrderingOutOfRange(f"s_{quadrature}={s} must stay below 2 mu^2/(1+A_{quadrature}) - 1 = {2 * M - 1:.6g}")
    D = M - (1 + s) / 2
    c = 1 - M / mu2 + M ** 2 / (mu2 * D)
    return 1 - 2 / c


def prime_params(setup: EosSetup, s_x: float = 0.0, s_y: float = 0.0) -> Tuple[float, float]:
    """Ordering (s'_X, s'_Y) at which the initial state enters the post-measurement distribution."""
    return _axis_prime(setup, "X", s_x), _axis_prime(setup, "Y", s_y)


def outcome_displacement(setup: EosSetup, outcomes) -> complex:
    """y~ = sum_X (|a~|/|b|) dn + i sum_Y (|a~|/|b|) dn."""
    dn = _outcome_array(setup, outcomes)
    ratios = setup.ratios()
    y = 0j
    for i, ch in enumerate(setup.channels):
        y += ratios[i] * dn[i] * (1 if ch.quadrature == "X" else 1j)
    return y


def post_map(setup: EosSetup, outcomes, s_x: float = 0.0, s_y: float = 0.0) -> PostMap:
    sp_x, sp_y = prime_params(setup, s_x, s_y)
    y_tilde = outcome_displacement(setup, outcomes)
    dn = tuple(int(d) for d in _outcome_array(setup, outcomes))
    return PostMap(
        setup=setup,
        outcomes=dn,
        s_x=s_x,
        s_y=s_y,
        s_prime_x=sp_x,
        s_prime_y=sp_y,
        y_tilde=y_tilde,
        z_tilde=setup.abs_nu / setup.mu * y_tilde,
    )


def prime_map(pm: PostMap, z):
    """z -> z'(z), vectorized over complex arrays."""
    z = np.asarray(z, dtype=complex)
    mu = pm.setup.mu
    out = pm.axis("X").apply(z.real, mu) + 1j * pm.axis("Y").apply(z.imag, mu)
    return complex(out) if out.ndim == 0 else out


def _log_outcome_gaussians(pm: PostMap) -> float:
    probes = np.array([ch.probe_amp for ch in pm.setup.channels])
    dn = np.asarray(pm.outcomes, dtype=float)
    return float(np.sum(-dn ** 2 / (2 * probes ** 2) - 0.5 * np.log(2 * math.pi * probes ** 2)))


def _resolve_probability(pm: PostMap, state: StateModel, probability: Optional[float]) -> float:
    p = count_probability(pm.setup, state, pm.outcomes) if probability is None else probability
    if not p > PROBABILITY_FLOOR:
        raise VanishingOutcomeProbability(f"Outcome {pm.outcomes} has probability {p:.3e}")
    return p


def _log_prefactor(pm: PostMap, p: float) -> float:
    ax, ay = pm.axis("X"), pm.axis("Y")
    setup = pm.setup
    return (
        0.5 * math.log((1 - ax.s_prime) * (1 - ay.s_prime)) - math.log(2)
        + _log_outcome_gaussians(pm)
        - 0.5 * (math.log1p(setup.A_x) + math.log1p(setup.A_y) + math.log(ax.D * ay.D))
        - math.log(p)
    )


def post_envelope(pm: PostMap, x, y, probability: float) -> np.ndarray:
    """N'(z) on broadcast coordinate arrays; the probe Gaussians and the exponent meet in log space."""
    mu = pm.setup.mu
    ax, ay = pm.axis("X"), pm.axis("Y")
    exponent = ax.exponent(x, ax.apply(x, mu)) + ay.exponent(y, ay.apply(y, mu))
    return np.exp(_log_prefactor(pm, probability) + exponent)


def post_qpd(pm: PostMap, state: StateModel, z, probability: Optional[float] = None):
    """Post-measurement quasiprobability at the PostMap's ordering, vectorized over z."""
    p = _resolve_probability(pm, state, probability)
    z = np.asarray(z, dtype=complex)
    zp = prime_map(pm, z)
    values = post_envelope(pm, z.real, z.imag, p) * state.qpd(np.real(zp), np.imag(zp), pm.prime_ordering)
    return float(values) if np.ndim(values) == 0 else values


def post_qpd_characteristic(pm: PostMap, alpha: complex, z, probability: Optional[float] = None,
                            n_nodes: int = CHARACTERISTIC_NODES):
    """
    Coherent-input post-measurement quasiprobability computed from the
    anti-normally ordered characteristic function chi'(xi; -1), Fourier
    transformed numerically with Gauss-Hermite nodes along Re xi and Im xi.
    """
    p = _resolve_probability(pm, Coherent(alpha), probability)
    setup = pm.setup
    mu = setup.mu
    log_k = _log_outcome_gaussians(pm) - math.log(p) - 0.5 * (math.log1p(setup.A_x) + math.log1p(setup.A_y))
    t, w = special.roots_hermite(n_nodes)
    z = np.atleast_1d(np.asarray(z, dtype=complex))

    def axis_integral(quadrature: str, a: float, q: np.ndarray, sign: float) -> np.ndarray:
        ax = pm.axis(quadrature)
        xi = t / math.sqrt(ax.D)
        # exp[M (a + i sign xi)^2 + (1 + s)/2 xi^2 - 2 i sign q xi]; the -D xi^2 part is the weight
        phase = np.exp(ax.M * (a ** 2 + 2j * sign * a * xi)[None, :] - 2j * sign * q[:, None] * xi[None, :])
        return (phase @ w) / math.sqrt(ax.D)

    a_x = alpha.real / mu + pm.z_tilde.real
    a_y = alpha.imag / mu + pm.z_tilde.imag
    ix = axis_integral("X", a_x, z.real, 1.0)
    iy = axis_integral("Y", a_y, z.imag, -1.0)
    values = np.real(math.exp(log_k - abs(alpha) ** 2) / math.pi ** 2 * ix * iy)
    return float(values[0]) if values.size == 1 else values


def post_window(pm: PostMap, state: StateModel, n: int = DEFAULT_GRID_POINTS) -> Window:
    """Square window around the post-state of a Gaussian with the input's first two moments."""
    mx, my, vx, vy = state.moments()
    proxy = Gaussian.from_arrays(complex(mx, my), np.diag([max(vx, 0.25), max(vy, 0.25)]))
    center = _gaussian_post(pm, proxy)
    half = max(4.0, state.extent() + 4.0)
    return Window.square(half, n, center=center.mean)


def post_grid(
    pm: PostMap,
    state: StateModel,
    window: Optional[Window] = None,
    probability: Optional[float] = None,
    check_window: bool = True,
) -> QpdGrid:
    """Post-measurement distribution on a grid; z -> z' is separable so the state is sampled on mapped axes."""
    p = _resolve_probability(pm, state, probability)
    window = window or post_window(pm, state)
    mu = pm.setup.mu
    xs, ys = window.xs, window.ys
    ax, ay = pm.axis("X"), pm.axis("Y")
    rho = state.qpd_grid_values(ax.apply(xs, mu), ay.apply(ys, mu), pm.prime_ordering)
    X, Y = np.meshgrid(xs, ys)
    grid = QpdGrid.from_window(window, post_envelope(pm, X, Y, p) * rho, pm.ordering)
    if check_window:
        ratio = grid.boundary_ratio()
        if ratio > BOUNDARY_RATIO_LIMIT:
            raise WindowTooSmall(f"Post-state grid boundary maximum is {ratio:.3e} of the peak", boundary_mass=ratio)
    return grid


def _gaussian_post(pm: PostMap, state: GaussianState) -> Gaussian:
    """
    Closed-form post-state of a Gaussian input.

    N'(z) rho(z'; s') is Gaussian in z: with L = diag of the z' slopes, c the
    offsets and Sigma' the s'-smoothed input covariance, the precision is
    P = L Sigma'^-1 L + diag(P_env) and P m = L Sigma'^-1 (m_in - c) + b.
    """
    mu = pm.setup.mu
    axes = [pm.axis("X"), pm.axis("Y")]
    L = np.diag([a.slope / mu for a in axes])
    c = np.array([a.offset(mu) for a in axes])
    m_in = np.array([state.mean.real, state.mean.imag])
    sigma_p = state.covariance + np.diag([-a.s_prime / 4 for a in axes])
    sigma_inv = np.linalg.inv(sigma_p)

    env_quad = np.array([2 / a.D - 4 * (a.slope / mu) ** 2 / (1 - a.s_prime) for a in axes])
    env_lin = np.array([
        4 * (a.slope / mu) * a.offset(mu) / (1 - a.s_prime) + 2 * a.M * a.z_tilde / a.D for a in axes
    ])
    P = L @ sigma_inv @ L + np.diag(env_quad)
    rhs = L @ sigma_inv @ (m_in - c) + env_lin
    mean = np.linalg.solve(P, rhs)
    cov = np.linalg.inv(P) + np.diag([pm.s_x / 4, pm.s_y / 4])
    return Gaussian.from_arrays(complex(mean[0], mean[1]), cov)


def post_state(pm: PostMap, state: StateModel, n_max: Optional[int] = None,
               window: Optional[Window] = None) -> Tuple[StateModel, float]:
    """
    Post-measurement state and the mass lost when it was represented.

    Gaussian inputs stay Gaussian (exact, zero loss); anything else is
    re-gridded as a Wigner function and projected onto the Fock basis.
    """
    if isinstance(state, GaussianState):
        return _gaussian_post(_wigner_map(pm), state), 0.0
    wpm = _wigner_map(pm)
    grid = post_grid(wpm, state, window=window) if window is not None else fitted_post_grid(wpm, state)
    return project_grid(grid, n_max)


def fitted_post_grid(
    pm: PostMap, state: StateModel, n: int = DEFAULT_GRID_POINTS, probability: Optional[float] = None
) -> QpdGrid:
    """Post-state grid on the moment-based window, then again on the window its support actually needs."""
    p = _resolve_probability(pm, state, probability)
    coarse = post_grid(pm, state, window=post_window(pm, state, n), probability=p)
    return post_grid(pm, state, window=coarse.support_window(), probability=p)


def project_grid(grid: QpdGrid, n_max: Optional[int] = None) -> Tuple[Numeric, float]:
    """Fock projection of a post-state Wigner grid; the basis covers the grid's mean photon number plus 8 sd."""
    if n_max is None:
        mx, my, vx, vy = grid.moments()
        n_mean = max(mx ** 2 + my ** 2 + vx + vy - 0.5, 0.0)
        wanted = math.ceil(n_mean + 8 * math.sqrt(n_mean + 1) + 12)
        n_max = int(min(PROJECTION_N_MAX, max(PROJECTION_N_MIN, wanted)))
        if wanted > PROJECTION_N_MAX:
            logger.warning(f"Fock projection capped at n_max={PROJECTION_N_MAX}, mean photon number {n_mean:.1f} asks for {wanted}")
    return numeric_from_wigner(grid, n_max=n_max)


def _wigner_map(pm: PostMap) -> PostMap:
    if pm.ordering == WIGNER:
        return pm
    return post_map(pm.setup, pm.outcomes)
