"""Tests for measurement setups, count-probability tables and the exact Skellam route."""
import math

import numpy as np
import pytest

from app.errors import (
    ApproximationDomain,
    EmptySetup,
    NonFiniteParams,
    PartitionViolation,
    UnsupportedConfiguration,
    UnsupportedFamily,
    WindowTooSmall,
    ZeroPump,
)
from app.eos_core import (
    ChannelSpec,
    balanced_rotation,
    count_distribution,
    count_probability,
    derive_setup,
    detuned,
    envelope,
    exact_count_distribution,
    exact_count_probability,
    exact_count_probability_coherent,
    interference_phase,
    marginal_count_probability,
    moments,
    outcome_to_point,
    outcome_window,
    skellam_means,
    solve_waveplate,
    statistic_to_point,
    sufficient_statistic_distribution,
    symmetric_xy,
    symmetric_xyxy,
    waveplate_matrix,
    x_only,
)
from app.eos_core.counting import clamp_probabilities
from app.phase_space import Cat, Coherent, Fock, Vacuum
from app.skellam import SkellamParams, skellam_pmf_exact


def test_symmetric_setup_constants(setup_zeta1):
    """A_Q = sinh^2(zeta) for two equally pumped channels; s~(1) = -2.4481."""
    assert setup_zeta1.A_x == pytest.approx(math.sinh(1.0) ** 2, rel=1e-12)
    assert setup_zeta1.A_y == pytest.approx(setup_zeta1.A_x)
    assert setup_zeta1.s_x == pytest.approx(-2.4481, abs=1e-4)
    assert setup_zeta1.mu ** 2 - abs(setup_zeta1.nu) ** 2 == pytest.approx(1.0)
    assert sum(abs(a) ** 2 for a in setup_zeta1.alpha_tilde) == pytest.approx(1.0)


def test_weak_squeezing_pushes_ordering_down(weak_setup, setup_zeta1):
    assert weak_setup.s_x < -100
    assert weak_setup.s_x < setup_zeta1.s_x < -1


def test_setup_validation():
    with pytest.raises(EmptySetup):
        derive_setup(1.0, [])
    with pytest.raises(ZeroPump):
        derive_setup(1.0, [ChannelSpec(0.0, 10.0, "X")])
    with pytest.raises(UnsupportedConfiguration):
        derive_setup(1.0, [ChannelSpec(1.0, 10.0, "Z")])


def test_unbalanced_rotation_is_rejected():
    with pytest.raises(UnsupportedConfiguration):
        derive_setup(1.0, [ChannelSpec(1.0, 10.0, "X", phi=math.pi, theta=0.1)])


def test_balanced_branch_for_half_wave_plate():
    assert balanced_rotation(math.pi) == pytest.approx(math.pi / 8)
    W = waveplate_matrix(math.pi, math.pi / 8)
    np.testing.assert_allclose(W @ W.conj().T, np.eye(2), atol=1e-14)


def test_detuned_copy_rotates_every_waveplate(setup_zeta1):
    control = detuned(setup_zeta1, 0.05)
    for a, b in zip(setup_zeta1.channels, control.channels):
        assert b.theta == pytest.approx(a.theta + 0.05)


def test_probe_floor_is_enforced(vacuum):
    weak = symmetric_xy(0.3, 2.0)
    with pytest.raises(ApproximationDomain):
        count_probability(weak, vacuum, (0, 0))
    with pytest.raises(ApproximationDomain):
        count_distribution(weak, vacuum)


def test_count_table_matches_ensemble_moments(setup_zeta1):
    """Coherent alpha = 3 at zeta = 1, beta = 10: table moments within 2% of the closed form."""
    state = Coherent(3.0)
    table = count_distribution(setup_zeta1, state)
    expected = moments(setup_zeta1, state)
    assert table.total() == pytest.approx(1.0, abs=1e-3)
    cov = table.covariance()
    assert table.mean()[0] == pytest.approx(expected[0].mean, rel=0.02)
    assert abs(table.mean()[1]) < 0.02 * expected[0].mean
    assert cov[0, 0] == pytest.approx(expected[0].variance, rel=0.02)
    assert cov[1, 1] == pytest.approx(expected[1].variance, rel=0.02)


def test_fock_table_is_normalized(weak_setup, fock3):
    table = count_distribution(weak_setup, fock3)
    assert table.total() == pytest.approx(1.0, abs=1e-3)
    assert np.all(table.probabilities >= 0)
    assert table.boundary_mass() < 1e-4
    assert list(table.to_frame().columns) == ["dn_1", "dn_2", "p"]


def test_narrow_window_raises(setup_zeta1, vacuum):
    window = (np.arange(-3, 4), np.arange(-3, 4))
    with pytest.raises(WindowTooSmall):
        count_distribution(setup_zeta1, vacuum, window=window)
    table = count_distribution(setup_zeta1, vacuum, window=window, strict=False)
    assert table.boundary_mass() > 1e-4


def test_single_probability_agrees_with_table(setup_zeta1, cat_state):
    table = count_distribution(setup_zeta1, cat_state)
    point = (int(table.axes[0][40]), int(table.axes[1][55]))
    assert count_probability(setup_zeta1, cat_state, point) == pytest.approx(table.probability_of(point), rel=1e-10)


def test_outcome_point_is_linear(setup_zeta1):
    z1 = outcome_to_point(setup_zeta1, (4, 0))
    z2 = outcome_to_point(setup_zeta1, (0, -6))
    assert outcome_to_point(setup_zeta1, (4, -6)) == pytest.approx(z1 + z2)
    assert z1.imag == pytest.approx(0.0)
    assert z2.real == pytest.approx(0.0)


def test_envelope_needs_both_quadratures():
    with pytest.raises(PartitionViolation):
        envelope(x_only(0.5, 10.0), (0,))


def test_single_quadrature_route_is_normalized(coherent_state):
    setup = x_only(0.5, 10.0)
    table = count_distribution(setup, coherent_state)
    assert table.labels == ("dn_1",)
    assert table.total() == pytest.approx(1.0, abs=1e-3)


def test_unpumped_setup_is_pure_probe_noise(vacuum):
    """A zero pump on one of two channels leaves that channel with Gaussian probe noise only."""
    setup = derive_setup(0.5, [ChannelSpec(1.0, 10.0, "X"), ChannelSpec(0.0, 10.0, "Y")])
    table = count_distribution(setup, vacuum)
    assert table.covariance()[1, 1] == pytest.approx(100.0, rel=0.02)


def test_sufficient_statistic_for_four_channels():
    setup = symmetric_xyxy(1.0, 10.0)
    state = Coherent(2.0)
    table = sufficient_statistic_distribution(setup, state)
    assert table.labels == ("S_X", "S_Y")
    assert table.total() == pytest.approx(1.0, abs=1e-3)
    # two channels of |alpha~| = 1/2 each add up to 2 |nu| beta <X>
    expected = 2 * abs(setup.nu) * 10.0 * 2.0
    assert table.mean()[0] == pytest.approx(expected, rel=0.02)


def test_statistic_point_matches_channel_point():
    setup = symmetric_xyxy(1.0, 10.0)
    assert statistic_to_point(setup, 7, -3) == pytest.approx(outcome_to_point(setup, (4, -1, 3, -2)))


def test_skellam_means_for_vacuum_pump_are_half_the_probe(weak_setup):
    """Balanced ports split the probe photons evenly when gamma' = 0."""
    m1, m2 = skellam_means(weak_setup, 0j)
    np.testing.assert_allclose(m1, 50.0, rtol=1e-12)
    np.testing.assert_allclose(m2, 50.0, rtol=1e-12)


def test_exact_route_at_zero_signal_is_skellam():
    """With no pump the dn are Skellam(|beta|^2/2, |beta|^2/2) for any probe strength."""
    setup = derive_setup(0.3, [ChannelSpec(1.0, 2.0, "X"), ChannelSpec(0.0, 2.0, "Y")])
    p = exact_count_probability(setup, Vacuum(), (1, -2))
    m1, m2 = skellam_means(setup, 0j)
    expected_y = skellam_pmf_exact(-2, SkellamParams(float(m1[1]), float(m2[1])))
    assert expected_y == pytest.approx(skellam_pmf_exact(-2, SkellamParams(2.0, 2.0)), rel=1e-12)
    table = exact_count_distribution(setup, Vacuum(), strict=False)
    assert table.probability_of((1, -2)) == pytest.approx(p, rel=1e-7)
    assert table.marginal(1) @ (table.axes[1] == -2) == pytest.approx(expected_y, rel=1e-6)


def test_exact_route_is_normalized_at_weak_probes(coherent_state):
    setup = symmetric_xy(0.3, 2.0)
    table = exact_count_distribution(setup, coherent_state)
    assert table.total() == pytest.approx(1.0, abs=1e-6)
    p = exact_count_probability_coherent(setup, coherent_state.alpha, (1, -1))
    assert p == pytest.approx(exact_count_probability(setup, coherent_state, (1, -1)), rel=1e-12)
    assert p == pytest.approx(table.probability_of((1, -1)), rel=1e-7)


def test_exact_route_needs_coherent_signal(setup_zeta1, cat_state):
    with pytest.raises(UnsupportedFamily):
        exact_count_distribution(setup_zeta1, cat_state)


def test_gaussian_formula_tracks_exact_route(setup_zeta1, vacuum):
    """For |beta| >= 10 the closed form misses only the lattice correction, which shrinks like 1/beta^2."""
    gaps = []
    for beta in (10.0, 20.0):
        setup = symmetric_xy(1.0, beta)
        exact = exact_count_probability(setup, vacuum, (0, 0))
        gaps.append(abs(count_probability(setup, vacuum, (0, 0)) / exact - 1))
    assert gaps[0] < 5e-3
    assert gaps[1] < 1.5e-3
    assert gaps[0] / gaps[1] > 2.5
    state = Coherent(1.0)
    gaussian = count_distribution(setup_zeta1, state)
    exact = exact_count_distribution(setup_zeta1, state, window=gaussian.axes)
    deviation = np.max(np.abs(gaussian.probabilities - exact.probabilities))
    assert deviation < 5e-3 * exact.probabilities.max()


def test_outcome_window_is_centered_on_mean(setup_zeta1):
    axes = outcome_window(setup_zeta1, Coherent(3.0))
    mean = moments(setup_zeta1, Coherent(3.0))[0].mean
    assert abs(axes[0].mean() - mean) <= 1.0


def test_sampling_is_reproducible(setup_zeta1, coherent_state):
    table = count_distribution(setup_zeta1, coherent_state)
    a = table.sample(np.random.default_rng(7), 50)
    b = table.sample(np.random.default_rng(7), 50)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (50, 2)
    assert np.all(np.isin(a[:, 0], table.axes[0]))


def test_cat_interference_survives_weak_smoothing(setup_zeta1):
    """A cat signal gives a two-peaked dn_1 marginal at zeta = 1."""
    table = count_distribution(setup_zeta1, Cat(3.0, 1))
    marginal = table.marginal(0)
    center = marginal[table.axes[0].size // 2]
    assert marginal.max() > 2 * center


def test_solved_waveplates_select_the_quadrature(setup_zeta1):
    """The interference phase is 0 on X channels and pi/2 on Y channels."""
    for ch, a_t in zip(setup_zeta1.channels, setup_zeta1.alpha_tilde):
        varphi = interference_phase(ch.phi, ch.k1, ch.k2, setup_zeta1.zeta, a_t, ch.probe)
        target = 1.0 if ch.quadrature == "X" else 1j
        assert np.exp(1j * varphi) == pytest.approx(target, abs=1e-12)


def test_solve_waveplate():
    sol = solve_waveplate(0.0, 10.0, "Y")
    assert sol.phi == pytest.approx(math.pi)
    assert sol.theta == pytest.approx(math.pi / 8)
    assert sol.probe_phase == pytest.approx(math.pi / 2)
    assert solve_waveplate(0.0, 10.0, "X").probe_phase == pytest.approx(math.pi)
    with pytest.raises(ApproximationDomain):
        solve_waveplate(0.0, 1.0, "X")
    with pytest.raises(UnsupportedConfiguration):
        solve_waveplate(0.0, 10.0, "Z")


def test_marginal_route(coherent_state, setup_zeta1):
    setup = x_only(0.5, 10.0)
    assert marginal_count_probability(setup, coherent_state, (7,)) == pytest.approx(
        count_probability(setup, coherent_state, (7,)), rel=1e-12
    )
    table = count_distribution(setup, Coherent(2.0))
    expected = moments(setup, Coherent(2.0))[0]
    assert table.mean()[0] == pytest.approx(expected.mean, rel=0.02)
    assert table.covariance()[0, 0] == pytest.approx(expected.variance, rel=0.02)
    with pytest.raises(PartitionViolation):
        marginal_count_probability(setup_zeta1, coherent_state, (0, 0))
    with pytest.raises(UnsupportedConfiguration):
        marginal_count_probability(x_only(0.5j, 10.0), coherent_state, (0,))


def test_moments_of_an_asymmetric_split():
    setup = derive_setup(0.5, [ChannelSpec(1.0, 10.0, "X"), ChannelSpec(0.5, 10.0, "Y")])
    state = Coherent(1.0 + 0.5j)
    table = count_distribution(setup, state)
    predicted = moments(setup, state)
    np.testing.assert_allclose(table.mean(), [m.mean for m in predicted], rtol=0.02)
    np.testing.assert_allclose(np.diag(table.covariance()), [m.variance for m in predicted], rtol=0.02)


def test_envelope_is_flat_for_symmetric_setups():
    """1/(2 |nu|^2 beta^2) everywhere, even where the probe Gaussians underflow."""
    setup = symmetric_xy(4.0, 10.0)
    expected = 1 / (2 * setup.abs_nu ** 2 * 100.0)
    assert envelope(setup, (386, 386)) == pytest.approx(expected, rel=1e-9)
    assert envelope(setup, (0, 0)) == pytest.approx(expected, rel=1e-9)


def test_far_outcomes_at_strong_squeezing_are_finite():
    setup = symmetric_xy(4.0, 10.0)
    assert math.isfinite(count_probability(setup, Vacuum(), (386, 0)))
    assert math.isfinite(count_probability(setup, Fock(1), (386, 386)))
    table = count_distribution(symmetric_xy(3.0, 10.0), Vacuum(), strict=False)
    assert np.all(np.isfinite(table.probabilities))
    assert table.total() == pytest.approx(1.0, abs=1e-3)


def test_non_finite_probabilities_are_rejected():
    with pytest.raises(NonFiniteParams):
        clamp_probabilities(np.array([0.2, np.nan, 0.1]))
