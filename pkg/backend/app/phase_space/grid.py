"""Rectangular phase-space grids, Wigner overlaps and grid-to-Fock projection."""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from ..errors import GridMismatch, WindowTooSmall
from ..pipeline.parallel import ParallelProcessor
from .fock import laguerre_sequence
from .states import WIGNER, Numeric, OrderingParams, StateModel

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 257
BOUNDARY_RATIO_LIMIT = 1e-6
SUPPORT_RATIO = 1e-13
NORMALIZATION_TOL = 1e-4
FIDELITY_CEILING = 1.0 + 1e-6
ROW_BLOCK = 32


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for an odd number of points, trapezoid otherwise."""
    if n >= 3 and n % 2 == 1:
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * h / 3.0
    w = np.ones(n)
    if n > 1:
        w[0] = w[-1] = 0.5
    return w * h


@dataclass(frozen=True)
class Window:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = DEFAULT_GRID_POINTS
    ny: int = DEFAULT_GRID_POINTS

    @classmethod
    def square(cls, half: float, n: int = DEFAULT_GRID_POINTS, center: complex = 0j) -> "Window":
        return cls(center.real - half, center.real + half, center.imag - half, center.imag + half, n, n)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)


def default_window(state: StateModel, ordering: OrderingParams = WIGNER, n: int = DEFAULT_GRID_POINTS) -> Window:
    """Square window of half-width max(4, extent + 4 sqrt(1 - s)), s the most smoothing axis."""
    s_min = min(ordering.s_x, ordering.s_y, 0.0)
    half = max(4.0, state.extent() + 4.0 * math.sqrt(1.0 - s_min))
    return Window.square(half, n)


@dataclass(frozen=True, eq=False)
class QpdGrid:
    origin: complex
    dx: float
    dy: float
    nx: int
    ny: int
    values: np.ndarray = field(repr=False)
    ordering: OrderingParams = WIGNER

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise GridMismatch("Grid cells must have positive area")
        if self.values.shape != (self.ny, self.nx):
            raise GridMismatch(f"Grid values shape {self.values.shape} does not match ({self.ny}, {self.nx})")

    @classmethod
    def from_window(cls, window: Window, values: np.ndarray, ordering: OrderingParams) -> "QpdGrid":
        dx = (window.x_max - window.x_min) / (window.nx - 1)
        dy = (window.y_max - window.y_min) / (window.ny - 1)
        return cls(complex(window.x_min, window.y_min), dx, dy, window.nx, window.ny, values, ordering)

    @property
    def xs(self) -> np.ndarray:
        return self.origin.real + self.dx * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.origin.imag + self.dy * np.arange(self.ny)

    @property
    def window(self) -> Window:
        return Window(self.xs[0], self.xs[-1], self.ys[0], self.ys[-1], self.nx, self.ny)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(simpson_weights(self.ny, self.dy), simpson_weights(self.nx, self.dx))

    def points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys)
        return X + 1j * Y

    def riemann_sum(self) -> float:
        return float(np.sum(self.values) * self.dx * self.dy)

    def integral(self) -> float:
        return float(np.sum(self.values * self.weights))

    def boundary_ratio(self) -> float:
        peak = float(np.max(np.abs(self.values)))
        if peak == 0:
            return 0.0
        v = self.values
        edge = max(np.max(np.abs(v[0])), np.max(np.abs(v[-1])), np.max(np.abs(v[:, 0])), np.max(np.abs(v[:, -1])))
        return float(edge) / peak

    def support_window(self, rel: float = SUPPORT_RATIO, margin: float = 1.0) -> Window:
        """Smallest window, inside this one, holding every |value| above rel * peak plus a margin per side."""
        magnitude = np.abs(self.values)
        mask = magnitude > rel * float(np.max(magnitude))
        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        xs, ys = self.xs, self.ys
        return Window(
            max(xs[0], xs[cols[0]] - margin),
            min(xs[-1], xs[cols[-1]] + margin),
            max(ys[0], ys[rows[0]] - margin),
            min(ys[-1], ys[rows[-1]] + margin),
            self.nx,
            self.ny,
        )

    def same_geometry(self, other: "QpdGrid") -> bool:
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and np.isclose(self.origin, other.origin, atol=1e-12)
            and np.isclose(self.dx, other.dx, rtol=1e-12)
            and np.isclose(self.dy, other.dy, rtol=1e-12)
        )

    def marginal(self, quadrature: str) -> np.ndarray:
        """Integrate out the other axis; returns values on xs (X) or ys (Y)."""
        if quadrature == "X":
            return self.values.T @ simpson_weights(self.ny, self.dy)
        return self.values @ simpson_weights(self.nx, self.dx)

    def moments(self) -> Tuple[float, float, float, float]:
        """(<X>, <Y>, Var X, Var Y) of the distribution on the grid."""
        px = self.marginal("X") * simpson_weights(self.nx, self.dx)
        py = self.marginal("Y") * simpson_weights(self.ny, self.dy)
        mx = float(np.sum(self.xs * px))
        my = float(np.sum(self.ys * py))
        vx = float(np.sum((self.xs - mx) ** 2 * px))
        vy = float(np.sum((self.ys - my) ** 2 * py))
        return mx, my, vx, vy

    def excess_kurtosis(self, quadrature: str) -> float:
        axis = self.xs if quadrature == "X" else self.ys
        h = self.dx if quadrature == "X" else self.dy
        p = self.marginal(quadrature) * simpson_weights(axis.size, h)
        mean = np.sum(axis * p)
        m2 = np.sum((axis - mean) ** 2 * p)
        m4 = np.sum((axis - mean) ** 4 * p)
        return float(m4 / m2 ** 2 - 3.0)

    def to_frame(self) -> pd.DataFrame:
        """Row-major table with columns x, y, value."""
        X, Y = np.meshgrid(self.xs, self.ys)
        return pd.DataFrame({"x": X.ravel(), "y": Y.ravel(), "value": self.values.ravel()})


def qpd_grid(
    state: StateModel,
    window: Optional[Window] = None,
    ordering: OrderingParams = WIGNER,
    check_window: bool = True,
    processor: Optional[ParallelProcessor] = None,
) -> QpdGrid:
    """Fill a grid with quasiprobability values, row blocks in parallel."""
    ordering.require_transform()
    window = window or default_window(state, ordering)
    xs, ys = window.xs, window.ys
    blocks = [ys[i:i + ROW_BLOCK] for i in range(0, ys.size, ROW_BLOCK)]
    processor = processor or ParallelProcessor()
    rows = processor.map_ordered(lambda block: state.qpd_grid_values(xs, block, ordering), blocks)
    grid = QpdGrid.from_window(window, np.vstack(rows), ordering)

    if check_window:
        ratio = grid.boundary_ratio()
        if ratio > BOUNDARY_RATIO_LIMIT:
            raise WindowTooSmall(
                f"Boundary maximum is {ratio:.3e} of the grid maximum (limit {BOUNDARY_RATIO_LIMIT})",
                boundary_mass=ratio,
            )
        total = grid.riemann_sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise WindowTooSmall(
                f"Grid Riemann sum {total:.6f} deviates from 1 by more than {NORMALIZATION_TOL}",
                boundary_mass=abs(total - 1.0),
            )
    return grid


def wigner_fidelity(a: QpdGrid, b: QpdGrid) -> float:
    """pi * sum(W_a W_b) dx dy, valid when at least one of the two states is pure."""
    if not (a.ordering.is_wigner and b.ordering.is_wigner):
        raise GridMismatch("Wigner fidelity needs s_X = s_Y = 0 on both grids")
    if not a.same_geometry(b):
        raise GridMismatch("Wigner fidelity needs identical grid geometry")
    value = math.pi * float(np.sum(a.values * b.values)) * a.dx * a.dy
    return min(max(value, 0.0), FIDELITY_CEILING)


def purity(grid: QpdGrid) -> float:
    if not grid.ordering.is_wigner:
        raise GridMismatch("Purity needs a Wigner grid")
    return math.pi * float(np.sum(grid.values ** 2 * grid.weights))


def numeric_from_wigner(grid: QpdGrid, n_max: int = 40) -> Tuple[Numeric, float]:
    """
    Project a Wigner grid onto |0>..|n_max>: rho_mn = pi int W conj(W_{|m><n|}) d^2z.

    Returns the physical (Hermitian, positive, unit-trace) state and the mass
    that did not land inside the truncated basis.
    """
    if not grid.ordering.is_wigner:
        raise GridMismatch("Fock projection needs a Wigner grid")
    z = grid.points()
    r2 = np.abs(z) ** 2
    # plain Riemann weights: the integrand vanishes at the edges and Simpson's coarse half aliases high Fock levels
    weighted = math.pi * grid.values * grid.dx * grid.dy
    with np.errstate(divide="ignore"):
        log_abs = np.log(2.0 * np.abs(z))
    phase = np.exp(1j * np.angle(z))
    gauss = np.exp(-2.0 * r2)

    dim = n_max + 1
    rho = np.zeros((dim, dim), dtype=complex)
    for d in range(dim):
        mono = gauss if d == 0 else np.exp(d * log_abs - 2.0 * r2) * phase ** d
        for k, lag in enumerate(laguerre_sequence(d, dim - d - 1, 4.0 * r2)):
            c = (2.0 / math.pi) * ((-1) ** k) * math.exp(
                0.5 * (special.gammaln(k + 1) - special.gammaln(k + d + 1))
            )
            # conj of the |k+d><k| basis function is c * (2z)^d e^{-2|z|^2} L
            value = np.sum(weighted * c * mono * lag)
            rho[k + d, k] = value
            if d:
                rho[k, k + d] = np.conj(value)

    rho = 0.5 * (rho + rho.conj().T)
    lost = 1.0 - float(np.real(np.trace(rho)))
    w, vecs = np.linalg.eigh(rho)
    if w[0] < 0:
        logger.debug(f"Clipping negative eigenvalue {w[0]:.3e} from projected density matrix")
    w = np.clip(w, 0.0, None)
    rho = (vecs * w) @ vecs.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    return Numeric(rho=rho), lost
