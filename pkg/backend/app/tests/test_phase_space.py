"""Tests for single-mode states, quasiprobabilities and phase-space grids."""
import math

import numpy as np
import pytest
from scipy import integrate

from app.errors import GridMismatch, InvalidState, NonFiniteParams, OrderingOutOfRange, WindowTooSmall
from app.phase_space import (
    HUSIMI,
    WIGNER,
    Cat,
    Coherent,
    Fock,
    Gaussian,
    Numeric,
    OrderingParams,
    Window,
    char_function,
    numeric_from_wigner,
    purity,
    qpd_eval,
    qpd_grid,
    quadrature_moments,
    wigner_fidelity,
)
from app.phase_space.grid import NORMALIZATION_TOL
from app.phase_space.quadrature import _real_part


def test_vacuum_origin_values(vacuum):
    """Wigner 2/pi and Husimi 1/pi at the origin."""
    assert qpd_eval(vacuum, 0j, WIGNER) == pytest.approx(2 / math.pi, rel=1e-12)
    assert qpd_eval(vacuum, 0j, HUSIMI) == pytest.approx(1 / math.pi, rel=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_fock_wigner_parity_at_origin(n):
    assert qpd_eval(Fock(n), 0j, WIGNER) == pytest.approx((-1) ** n * 2 / math.pi, rel=1e-10)


def test_ordering_at_or_above_one_is_rejected(vacuum):
    with pytest.raises(OrderingOutOfRange):
        qpd_eval(vacuum, 0j, OrderingParams(1.0, 0.0))


def test_coherent_grid_moments(coherent_state):
    """Grid moments reproduce <X>, <Y> and the vacuum variance 1/4."""
    grid = qpd_grid(coherent_state)
    mx, my, vx, vy = grid.moments()
    assert grid.riemann_sum() == pytest.approx(1.0, abs=1e-6)
    assert mx == pytest.approx(1.0, abs=1e-6)
    assert my == pytest.approx(0.5, abs=1e-6)
    assert vx == pytest.approx(0.25, abs=1e-5)
    assert vy == pytest.approx(0.25, abs=1e-5)


def test_smoothed_ordering_adds_variance(coherent_state):
    """s-ordered variance is Var_W - s/4."""
    grid = qpd_grid(coherent_state, ordering=OrderingParams(-1.0, -0.5))
    _, _, vx, vy = grid.moments()
    assert vx == pytest.approx(0.5, abs=1e-5)
    assert vy == pytest.approx(0.375, abs=1e-5)


def test_pure_states_have_unit_purity(fock3, cat_state):
    assert purity(qpd_grid(fock3)) == pytest.approx(1.0, abs=1e-4)
    assert purity(qpd_grid(cat_state)) == pytest.approx(1.0, abs=1e-4)


def test_cat_is_negative_somewhere(cat_state):
    grid = qpd_grid(cat_state)
    assert grid.values.min() < -0.1
    assert grid.excess_kurtosis("X") < -1.0


def test_squeezed_state_saturates_uncertainty(squeezed_state):
    _, _, vx, vy = squeezed_state.moments()
    assert vx * vy == pytest.approx(1 / 16, rel=1e-6)
    assert vx != pytest.approx(vy)


def test_wigner_fidelity_of_identical_grids(coherent_state):
    grid = qpd_grid(coherent_state)
    assert wigner_fidelity(grid, grid) == pytest.approx(1.0, abs=1e-5)


def test_wigner_fidelity_needs_wigner_grids(coherent_state):
    window = Window.square(6.0, 65)
    a = qpd_grid(coherent_state, window, WIGNER)
    b = qpd_grid(coherent_state, window, HUSIMI)
    with pytest.raises(GridMismatch):
        wigner_fidelity(a, b)


def test_wigner_fidelity_needs_same_geometry(coherent_state):
    a = qpd_grid(coherent_state, Window.square(6.0, 65))
    b = qpd_grid(coherent_state, Window.square(6.0, 129))
    with pytest.raises(GridMismatch):
        wigner_fidelity(a, b)


def test_small_window_is_reported(cat_state):
    with pytest.raises(WindowTooSmall) as info:
        qpd_grid(cat_state, Window.square(2.0, 65))
    assert info.value.boundary_mass > 1e-6


def test_coarse_grid_fails_normalization(vacuum):
    with pytest.raises(WindowTooSmall) as info:
        qpd_grid(vacuum, Window.square(4.0, 5))
    assert info.value.boundary_mass > NORMALIZATION_TOL


def test_fourier_residue_is_an_error():
    with pytest.raises(NonFiniteParams):
        _real_part(np.array([0.5 + 0j, 1.0 + 1e-3j]))
    with pytest.raises(NonFiniteParams):
        _real_part(np.array([np.nan + 0j]))
    np.testing.assert_array_equal(_real_part(np.array([0.5 + 1e-14j])), [0.5])


def test_numeric_matches_fock_state():
    numeric = Numeric.from_state(Fock(2), n_max=6)
    z = np.array([0.0, 0.3 + 0.2j, -0.7j, 1.1])
    expected = Fock(2).qpd(z.real, z.imag, WIGNER)
    np.testing.assert_allclose(numeric.qpd(z.real, z.imag, WIGNER), expected, atol=1e-12)


def test_numeric_husimi_matches_closed_form(coherent_state):
    numeric = Numeric.from_state(coherent_state, n_max=25)
    z = np.array([0.5 + 0.5j, 1.0 + 0.5j, -0.5j])
    expected = coherent_state.qpd(z.real, z.imag, HUSIMI)
    np.testing.assert_allclose(numeric.qpd(z.real, z.imag, HUSIMI), expected, atol=1e-7)


def test_numeric_validation():
    with pytest.raises(InvalidState):
        Numeric(rho=np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(InvalidState):
        Numeric(rho=np.diag([0.5, 0.4]))
    with pytest.raises(InvalidState):
        Numeric(rho=np.diag([1.2, -0.2]))


def test_gaussian_covariance_must_be_physical():
    with pytest.raises(InvalidState):
        Gaussian.from_arrays(0j, np.diag([0.1, 0.1]))


def test_projection_recovers_density_matrix(coherent_state):
    grid = qpd_grid(coherent_state, Window.square(6.0, 201))
    numeric, lost = numeric_from_wigner(grid, n_max=12)
    expected = coherent_state.density_matrix(12)
    assert abs(lost) < 1e-4
    np.testing.assert_allclose(numeric.rho, expected, atol=1e-4)


def test_cat_marginals_are_normalized(cat_state):
    q = np.linspace(-8, 8, 4001)
    for quadrature in ("X", "Y"):
        assert integrate.trapezoid(cat_state.marginal(quadrature, q), q) == pytest.approx(1.0, abs=1e-8)


def test_state_vector_needs_pure_state():
    mixed = Numeric(rho=np.diag([0.5, 0.5]))
    with pytest.raises(InvalidState):
        mixed.state_vector()


def test_coherent_mean_photon_number():
    assert Coherent(2.0).mean_photon_number() == pytest.approx(4.0, rel=1e-12)


def test_characteristic_function_closed_forms(vacuum):
    assert char_function(vacuum, 0j) == pytest.approx(1.0)
    alpha, gamma = 1.0 + 0.5j, 0.3 - 0.7j
    expected = np.exp(-abs(gamma) ** 2 / 2 + gamma * np.conj(alpha) - np.conj(gamma) * alpha)
    assert char_function(Coherent(alpha), gamma) == pytest.approx(expected, rel=1e-12)


def test_characteristic_function_of_fock_matches_numeric(fock3):
    gamma = 0.7 + 0.2j
    numeric = Numeric(rho=fock3.density_matrix(20))
    ordering = OrderingParams(-1.0, 0.0)
    assert char_function(numeric, gamma, ordering) == pytest.approx(char_function(fock3, gamma, ordering), abs=1e-10)


def test_quadrature_moments(fock3, squeezed_state):
    assert quadrature_moments(fock3) == pytest.approx((0.0, 0.0, 1.75, 1.75))
    _, _, vx, vy = quadrature_moments(squeezed_state)
    assert vx * vy == pytest.approx(1 / 16)
    assert vx != pytest.approx(vy)
