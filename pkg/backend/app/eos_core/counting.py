"""
Count-probability distribution of the photon-number differences in the
Gaussian (strong-probe) regime: p({dn}) = N({dn}) rho(z({dn}); s~_X, s~_Y).
"""
import logging
import math
import threading
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special

from ..errors import (
    ApproximationDomain,
    NegativeProbability,
    NonFiniteParams,
    PartitionViolation,
    UnsupportedConfiguration,
    WindowTooSmall,
)
from ..phase_space import OrderingParams, StateModel
from ..pipeline.parallel import ParallelProcessor
from .channels import PROBE_FLOOR
from .setup import EosSetup

logger = logging.getLogger(__name__)

NEGATIVE_FLOOR = -1e-12
BOUNDARY_MASS_LIMIT = 1e-4
COMPLETENESS_TOL = 1e-3
WINDOW_SIGMAS = 6.0
MAX_LATTICE = 4_000_000
POINT_BLOCK = 20_000


class ClampCounter:
    """Thread-safe tally of negative probabilities clamped to zero."""

    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def add(self, n: int):
        if n:
            with self._lock:
                self.count += n

    def reset(self):
        with self._lock:
            self.count = 0


NEGATIVE_CLAMPS = ClampCounter()


def clamp_probabilities(p: np.ndarray) -> np.ndarray:
    """Zero out values in [-1e-12, 0); anything more negative signals a quadrature failure."""
    bad = int(np.count_nonzero(~np.isfinite(p)))
    if bad:
        raise NonFiniteParams(f"{bad} count probabilities are not finite")
    worst = float(np.min(p)) if p.size else 0.0
    if worst < NEGATIVE_FLOOR:
        raise NegativeProbability(f"Probability {worst:.3e} below the {NEGATIVE_FLOOR} floor")
    negative = p < 0
    n_neg = int(np.count_nonzero(negative))
    if n_neg:
        NEGATIVE_CLAMPS.add(n_neg)
        logger.debug(f"Clamped {n_neg} tiny negative probabilities")
        p = np.where(negative, 0.0, p)
    return p


@dataclass(frozen=True)
class OutcomeSet:
    """One measurement record: signed photon-number differences in channel order."""
    dn: Tuple[int, ...]

    @classmethod
    def of(cls, *dn: int) -> "OutcomeSet":
        return cls(tuple(int(d) for d in dn))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.dn, dtype=np.int64)


def _outcome_array(setup: EosSetup, outcomes) -> np.ndarray:
    arr = outcomes.as_array() if isinstance(outcomes, OutcomeSet) else np.asarray(outcomes)
    if arr.shape[-1] != setup.n_channels:
        raise UnsupportedConfiguration(
            f"Outcome record has {arr.shape[-1]} entries but the setup has {setup.n_channels} channels"
        )
    return arr.astype(float)


@dataclass(frozen=True, eq=False)
class CountTable:
    """Probabilities on a rectangular outcome lattice; one axis per channel (or statistic)."""
    labels: Tuple[str, ...]
    axes: Tuple[np.ndarray, ...]
    probabilities: np.ndarray

    def total(self) -> float:
        return float(np.sum(self.probabilities))

    def marginal(self, k: int) -> np.ndarray:
        other = tuple(i for i in range(len(self.axes)) if i != k)
        return np.sum(self.probabilities, axis=other)

    def mean(self) -> np.ndarray:
        return np.array([np.sum(ax * self.marginal(k)) / self.total() for k, ax in enumerate(self.axes)])

    def covariance(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        p = self.probabilities / self.total()
        mean = self.mean()
        k = len(self.axes)
        cov = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                cov[i, j] = np.sum((grids[i] - mean[i]) * (grids[j] - mean[j]) * p)
        return cov

    def boundary_mass(self) -> float:
        """Probability on the outer rim of the lattice."""
        p = self.probabilities
        inner = p[tuple(slice(1, -1) for _ in p.shape)] if min(p.shape) > 2 else np.zeros(0)
        return float(np.sum(p) - np.sum(inner))

    def lattice(self) -> np.ndarray:
        """All lattice points as a (P, k) array, row-major like ``probabilities.ravel()``."""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def to_frame(self) -> pd.DataFrame:
        pts = self.lattice()
        data = {label: pts[:, k].astype(np.int64) for k, label in enumerate(self.labels)}
        data["p"] = self.probabilities.ravel()
        return pd.DataFrame(data)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Exact inverse-CDF draws from the (renormalized) table, shape (size, k)."""
        flat = self.probabilities.ravel()
        cdf = np.cumsum(flat)
        cdf /= cdf[-1]
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        idx = np.minimum(idx, flat.size - 1)
        return self.lattice()[idx].astype(np.int64)

    def probability_of(self, point: Sequence[int]) -> float:
        idx = []
        for ax, value in zip(self.axes, point):
            pos = np.nonzero(ax == value)[0]
            if pos.size == 0:
                return 0.0
            idx.append(int(pos[0]))
        return float(self.probabilities[tuple(idx)])


def outcome_to_point(setup: EosSetup, outcomes) -> complex:
    """z = -|nu| [(1+s~_X)/2 sum_X (|a~|/|b|) dn + i (1+s~_Y)/2 sum_Y (|a~|/|b|) dn]."""
    dn = _outcome_array(setup, outcomes)
    return complex(dn @ setup.point_coefficients())


def _log_probe_gaussians(setup: EosSetup, dn: np.ndarray) -> np.ndarray:
    """sum_i log of the lattice Gaussian e^{-dn_i^2/(2|beta_i|^2)} / sqrt(2 pi |beta_i|^2)."""
    probes = np.array([ch.probe_amp for ch in setup.channels])
    return np.sum(-dn ** 2 / (2 * probes ** 2) - 0.5 * np.log(2 * math.pi * probes ** 2), axis=-1)


def _log_envelope(setup: EosSetup, dn: np.ndarray, z: np.ndarray) -> np.ndarray:
    # 1 + s~ < 0, so the z terms grow and cancel the probe Gaussians; combine before exp
    sx, sy = setup.s_x, setup.s_y
    log_pref = math.log(math.pi / 2) + 0.5 * (math.log((1 - sx) * (1 - sy)) - math.log1p(setup.A_x) - math.log1p(setup.A_y))
    return log_pref + _log_probe_gaussians(setup, dn) - 2 * z.real ** 2 / (1 + sx) - 2 * z.imag ** 2 / (1 + sy)


def _envelope_values(setup: EosSetup, dn: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.exp(_log_envelope(setup, dn, z))


def envelope(setup: EosSetup, outcomes) -> float:
    """Renormalization envelope N({dn}); requires both quadratures pumped."""
    _require_both_pumped(setup)
    dn = _outcome_array(setup, outcomes)
    z = np.asarray(dn @ setup.point_coefficients())
    return float(_envelope_values(setup, dn, z))


def log_envelope(setup: EosSetup, outcomes) -> float:
    """log N({dn}); stays finite where N itself would underflow."""
    _require_both_pumped(setup)
    dn = _outcome_array(setup, outcomes)
    z = np.asarray(dn @ setup.point_coefficients())
    return float(_log_envelope(setup, dn, z))


def _require_both_pumped(setup: EosSetup):
    if not (setup.pumped("X") and setup.pumped("Y")):
        raise PartitionViolation("The two-quadrature envelope needs pumped X and Y channels")


def _require_probe_floor(setup: EosSetup):
    low = [ch.index for ch in setup.channels if ch.probe_amp < PROBE_FLOOR]
    if low:
        raise ApproximationDomain(
            f"Channels {low} have |beta| < {PROBE_FLOOR}; use the exact Skellam route for weak probes"
        )


def _smoothed_marginal(state: StateModel, quadrature: str, q: np.ndarray, variance: float, n_nodes: int = 96) -> np.ndarray:
    """int <x|rho|x> N(q - x; variance) dx for every q."""
    t, w = special.roots_hermite(n_nodes)
    x = q[:, None] + math.sqrt(2.0 * variance) * t[None, :]
    vals = state.marginal(quadrature, x)
    return (vals @ w) / math.sqrt(math.pi)


def _marginal_probabilities(setup: EosSetup, state: StateModel, dn: np.ndarray, quadrature: str) -> np.ndarray:
    A = setup.strength(quadrature)
    s = setup.s_tilde(quadrature)
    z = np.atleast_1d(dn @ setup.point_coefficients())
    q = z.real if quadrature == "X" else z.imag
    smoothed = _smoothed_marginal(state, quadrature, q, -s / 4.0)
    log_env = 0.5 * math.log(math.pi / A) + _log_probe_gaussians(setup, dn) + A * q ** 2
    return np.exp(log_env) * smoothed


def marginal_count_probability(setup: EosSetup, state: StateModel, outcomes, quadrature: str = "X") -> float:
    """
    Count probability when only one quadrature group is pumped:
    sqrt(pi/A) prod_i g_i(dn_i) e^{A q^2} int <x|rho|x> N(q - x; -s~/4) dx.
    """
    other = "Y" if quadrature == "X" else "X"
    if any(ch.quadrature == other and setup.alpha_tilde[ch.index] != 0 for ch in setup.channels):
        raise PartitionViolation(f"Marginal count probability needs the {other} group unpumped")
    if abs(setup.zeta.imag) > 1e-15:
        raise UnsupportedConfiguration("Marginal count probability is defined for real zeta only")
    if not setup.pumped(quadrature):
        raise PartitionViolation(f"No pumped {quadrature} channel")
    dn = np.atleast_2d(_outcome_array(setup, outcomes))
    p = clamp_probabilities(_marginal_probabilities(setup, state, dn, quadrature))
    return float(p[0])


def count_probabilities(setup: EosSetup, state: StateModel, dn: np.ndarray) -> np.ndarray:
    """Vectorized count probability for a (P, k) array of outcome records."""
    dn = np.atleast_2d(np.asarray(dn, dtype=float))
    px, py = setup.pumped("X"), setup.pumped("Y")
    if px and py:
        z = dn @ setup.point_coefficients()
        ordering = OrderingParams(setup.s_x, setup.s_y)
        rho = state.qpd(z.real, z.imag, ordering)
        p = _envelope_values(setup, dn, z) * rho
    elif px or py:
        p = _marginal_probabilities(setup, state, dn, "X" if px else "Y")
    else:
        p = np.exp(_log_probe_gaussians(setup, dn))
    return clamp_probabilities(np.asarray(p, dtype=float))


def count_probability(setup: EosSetup, state: StateModel, outcomes) -> float:
    _require_probe_floor(setup)
    dn = _outcome_array(setup, outcomes)
    return float(count_probabilities(setup, state, dn)[0])


@dataclass(frozen=True)
class ChannelMoments:
    mean: float
    variance: float


def window_moments(setup: EosSetup, state: StateModel) -> List[ChannelMoments]:
    """Per-channel moments used to size outcome windows, with a |beta|^2 variance floor."""
    return [
        ChannelMoments(m.mean, max(m.variance, ch.probe_amp ** 2))
        for m, ch in zip(moments(setup, state), setup.channels)
    ]


def outcome_window(setup: EosSetup, state: StateModel, sigmas: float = WINDOW_SIGMAS) -> Tuple[np.ndarray, ...]:
    """Integer dn range per channel: round(mean) +- ceil(sigmas * sd)."""
    axes = []
    for m in window_moments(setup, state):
        half = int(math.ceil(sigmas * math.sqrt(m.variance)))
        center = int(round(m.mean))
        axes.append(np.arange(center - half, center + half + 1))
    return tuple(axes)


def _check_table(table: CountTable, strict: bool):
    if not np.all(np.isfinite(table.probabilities)):
        raise NonFiniteParams("Count table holds non-finite probabilities")
    total = table.total()
    if abs(total - 1.0) > COMPLETENESS_TOL:
        logger.warning(f"Count table sums to {total:.6f}")
    rim = table.boundary_mass()
    if rim > BOUNDARY_MASS_LIMIT:
        message = f"Outcome window boundary carries {rim:.3e} of the probability"
        if strict:
            raise WindowTooSmall(message, boundary_mass=rim)
        logger.warning(message)


def count_distribution(
    setup: EosSetup,
    state: StateModel,
    window: Optional[Sequence[np.ndarray]] = None,
    strict: bool = True,
    processor: Optional[ParallelProcessor] = None,
) -> CountTable:
    """Count probabilities on the full outcome lattice."""
    _require_probe_floor(setup)
    axes = tuple(np.asarray(a, dtype=np.int64) for a in (window or outcome_window(setup, state)))
    size = int(np.prod([a.size for a in axes]))
    if size > MAX_LATTICE:
        raise UnsupportedConfiguration(
            f"Outcome lattice of {size} points is too large; use sufficient_statistic_distribution"
        )

    x_idx, y_idx = setup.indices("X"), setup.indices("Y")
    if setup.n_channels == 2 and len(x_idx) == 1 and len(y_idx) == 1 and setup.pumped("X") and setup.pumped("Y"):
        probs = _separable_table(setup, state, axes, x_idx[0], y_idx[0])
    else:
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
        blocks = [pts[i:i + POINT_BLOCK] for i in range(0, pts.shape[0], POINT_BLOCK)]
        processor = processor or ParallelProcessor()
        parts = processor.map_ordered(lambda b: count_probabilities(setup, state, b), blocks)
        probs = np.concatenate(parts).reshape([a.size for a in axes])

    table = CountTable(tuple(f"dn_{i + 1}" for i in range(setup.n_channels)), axes, probs)
    _check_table(table, strict)
    return table


def _separable_table(setup: EosSetup, state: StateModel, axes, ix: int, iy: int) -> np.ndarray:
    coeffs = setup.point_coefficients()
    xs = coeffs[ix].real * axes[ix]
    ys = coeffs[iy].imag * axes[iy]
    ordering = OrderingParams(setup.s_x, setup.s_y)
    rho = state.qpd_grid_values(xs, ys, ordering)  # (ny, nx)
    DX, DY = np.meshgrid(axes[ix], axes[iy])
    dn = np.zeros(DX.shape + (2,))
    dn[..., ix] = DX
    dn[..., iy] = DY
    z = DX * coeffs[ix] + DY * coeffs[iy]
    p = clamp_probabilities(_envelope_values(setup, dn, z) * rho)
    return p.T if ix == 0 else p


def _log_convolve(log_a: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    """log of the discrete convolution of exp(log_a) and exp(log_b)."""
    n_out = log_a.size + log_b.size - 1
    terms = np.full((log_a.size, n_out), -np.inf)
    rows = np.arange(log_a.size)[:, None]
    terms[rows, rows + np.arange(log_b.size)[None, :]] = log_a[:, None] + log_b[None, :]
    return special.logsumexp(terms, axis=0)


def sufficient_statistic_distribution(
    setup: EosSetup,
    state: StateModel,
    window: Optional[Sequence[np.ndarray]] = None,
    strict: bool = True,
) -> CountTable:
    """
    Exact lattice distribution of S_Q = sum of dn over each quadrature group.

    Valid when the channels inside a group share |alpha~|/|beta|, so z depends on
    the outcomes only through (S_X, S_Y).  The per-group weights are discrete
    convolutions of the lattice Gaussians in the envelope.
    """
    _require_probe_floor(setup)
    _require_both_pumped(setup)
    axes = tuple(np.asarray(a, dtype=np.int64) for a in (window or outcome_window(setup, state)))
    probes = np.array([ch.probe_amp for ch in setup.channels])

    stat_axes, log_weights, coeff = [], [], []
    for q in ("X", "Y"):
        idx = setup.indices(q)
        ratio = setup.grouped_ratio(q)
        scale = -setup.abs_nu * (1 + setup.s_tilde(q)) / 2 * ratio
        coeff.append(scale if q == "X" else 1j * scale)
        start, log_conv = 0, np.array([0.0])
        for i in idx:
            log_g = -axes[i] ** 2 / (2 * probes[i] ** 2) - 0.5 * math.log(2 * math.pi * probes[i] ** 2)
            log_conv = _log_convolve(log_conv, log_g)
            start += int(axes[i][0])
        stat_axes.append(np.arange(start, start + log_conv.size))
        log_weights.append(log_conv)

    SX, SY = np.meshgrid(stat_axes[0], stat_axes[1], indexing="ij")
    z = SX * coeff[0] + SY * coeff[1]
    sx, sy = setup.s_x, setup.s_y
    log_pref = math.log(math.pi / 2) + 0.5 * (math.log((1 - sx) * (1 - sy)) - math.log1p(setup.A_x) - math.log1p(setup.A_y))
    log_w = log_weights[0][:, None] + log_weights[1][None, :]
    env = np.exp(log_pref + log_w - 2 * z.real ** 2 / (1 + sx) - 2 * z.imag ** 2 / (1 + sy))
    rho = state.qpd(z.real, z.imag, OrderingParams(sx, sy))
    table = CountTable(("S_X", "S_Y"), tuple(stat_axes), clamp_probabilities(env * rho))
    _check_table(table, strict)
    return table


def statistic_to_point(setup: EosSetup, s_x: float, s_y: float) -> complex:
    """Outcome point for grouped sums (S_X, S_Y)."""
    out = 0j
    for q, s in (("X", s_x), ("Y", s_y)):
        scale = -setup.abs_nu * (1 + setup.s_tilde(q)) / 2 * setup.grouped_ratio(q)
        out += scale * s if q == "X" else 1j * scale * s
    return out


def moments(setup: EosSetup, state: StateModel) -> List[ChannelMoments]:
    """
    Ensemble moments of every channel, with A_i = 2|nu|^2 |alpha~_i|^2:
    mean_i = sqrt(2 A_i) |beta_i| <Q_i>, var_i = |beta_i|^2 [1 + 2 A_i (Var Q_i + 1/4)].

    For the symmetric XY scheme this is sqrt(2)|nu||beta| <Q> and
    2|nu|^2 |beta|^2 (Var Q - s~/4).  Unpumped channels keep the bare probe noise.
    """
    mx, my, vx, vy = state.moments()
    out = []
    for ch, a_t in zip(setup.channels, setup.alpha_tilde):
        mean_q, var_q = (mx, vx) if ch.quadrature == "X" else (my, vy)
        A_i = 2 * setup.abs_nu ** 2 * abs(a_t) ** 2
        out.append(
            ChannelMoments(
                mean=math.sqrt(2 * A_i) * ch.probe_amp * mean_q,
                variance=ch.probe_amp ** 2 * (1 + 2 * A_i * (var_q + 0.25)),
            )
        )
    return out
