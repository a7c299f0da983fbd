"""Tests for Bayesian reconstruction and the fidelity comparison between schemes."""
import math

import numpy as np
import pytest

from app.eos_core import count_distribution, symmetric_xy, symmetric_xyxy
from app.errors import NonPureInitial, UnsupportedFamily, ZeroEvidence
from app.phase_space import HUSIMI, WIGNER, Cat, Coherent, Fock, Numeric
from app.reconstruction import (
    CoherentFamily,
    FidelityEstimate,
    FockFamily,
    PosteriorGrid,
    analytic_avg_fidelity_single,
    analytic_pointwise_fidelity,
    avg_fidelity_mc,
    bayes_update,
    consecutive_update,
    continuum_avg_fidelity,
    eight_port_mc,
    eight_port_reference,
    family_for,
    fidelity_vs_initial,
    gaussian_overlap,
    log_likelihood,
    point_update,
    post_fidelity_mc,
    printed_consecutive_closed_form,
    reconstruct,
    single_node,
)


def test_single_record_closed_form():
    assert analytic_avg_fidelity_single(1.0) == pytest.approx(0.2248, abs=1e-4)
    assert analytic_avg_fidelity_single(0.0) == 0.0
    assert analytic_avg_fidelity_single(20.0) == pytest.approx(1 / 3, abs=1e-9)


def test_continuum_single_record_matches_closed_form(setup_zeta1):
    """1/(2 - s~) for a symmetric XY record."""
    assert continuum_avg_fidelity(setup_zeta1, "XY") == pytest.approx(analytic_avg_fidelity_single(1.0), rel=1e-12)


def test_printed_consecutive_form_tends_to_quarter():
    assert printed_consecutive_closed_form(12.0) == pytest.approx(0.25, abs=1e-6)


def test_pointwise_fidelity_at_perfect_husimi_match():
    assert analytic_pointwise_fidelity(HUSIMI, 1 + 1j, 1 + 1j) == pytest.approx(0.5)


def test_gaussian_overlap_of_coherent_states():
    a, b = Coherent(0.5 + 0.5j), Coherent(1.5 - 0.5j)
    assert gaussian_overlap(a, a) == pytest.approx(1.0)
    assert gaussian_overlap(a, b) == pytest.approx(math.exp(-2.0))


def test_family_selection():
    assert isinstance(family_for(Coherent(1.0)), CoherentFamily)
    assert isinstance(family_for(Fock(2)), FockFamily)
    with pytest.raises(UnsupportedFamily):
        family_for(Cat(2.0))


def test_bayes_update_normalizes_and_records(setup_zeta1):
    prior = PosteriorGrid.uniform(CoherentFamily())
    posterior = bayes_update(prior, setup_zeta1, (12, 6))
    assert posterior.weights.sum() == pytest.approx(1.0)
    assert posterior.history == ((12, 6),)
    assert posterior.entropy() < prior.entropy()


def test_repeated_records_concentrate_on_truth(setup_zeta1, rng):
    truth = Coherent(1.0 + 0.5j)
    table = count_distribution(setup_zeta1, truth)
    posterior = PosteriorGrid.uniform(CoherentFamily())
    for dn in table.sample(rng, 100):
        posterior = bayes_update(posterior, setup_zeta1, dn)
    assert abs(posterior.mean_parameter() - truth.alpha) < 0.35


def test_far_outcome_settles_on_the_edge_node():
    family = CoherentFamily()
    posterior = point_update(PosteriorGrid.uniform(family), 300.0 + 0j, HUSIMI)
    assert np.all(np.isfinite(posterior.weights))
    assert posterior.mode() == pytest.approx(family.alpha_max)


def test_vanishing_likelihood_is_zero_evidence():
    posterior = single_node(FockFamily(n_max=4), 1)
    with pytest.raises(ZeroEvidence):
        point_update(posterior, 0j, WIGNER)


def test_likelihood_stays_finite_at_strong_squeezing():
    setup = symmetric_xy(3.0, 10.0)
    family = CoherentFamily()
    dn = (round(math.sqrt(2) * setup.abs_nu * 10.0 * 3.0), 0)
    log_like = log_likelihood(family, setup, dn)
    assert np.all(np.isfinite(log_like))
    assert family.parameter(int(np.argmax(log_like))).real == pytest.approx(3.0, abs=0.2)
    assert np.all(np.isfinite(family.vectors(30)))


def test_single_node_reconstruction_is_the_node():
    family = CoherentFamily()
    j = family.nearest(1.2 - 0.6j)
    posterior = single_node(family, j)
    member = family.member(j)
    assert fidelity_vs_initial(member, posterior) == pytest.approx(1.0, abs=1e-10)
    rho = reconstruct(posterior, n_max=40)
    np.testing.assert_allclose(rho.rho, member.density_matrix(40), atol=1e-10)


def test_fock_family_fidelity():
    family = FockFamily(n_max=10)
    assert fidelity_vs_initial(Fock(3), single_node(family, 3)) == 1.0
    assert fidelity_vs_initial(Fock(3), single_node(family, 4)) == 0.0


def test_mixed_initial_state_is_refused():
    posterior = PosteriorGrid.uniform(FockFamily(n_max=4))
    with pytest.raises(NonPureInitial):
        fidelity_vs_initial(Numeric(rho=np.diag([0.5, 0.5])), posterior)


def test_consecutive_update_modes(setup_zeta1):
    prior = PosteriorGrid.uniform(CoherentFamily())
    first = bayes_update(prior, setup_zeta1, (12, 6))
    factorized = consecutive_update(first, setup_zeta1, (12, 6), setup_zeta1, (8, 3), mode="factorized")
    conditional = consecutive_update(first, setup_zeta1, (12, 6), setup_zeta1, (8, 3), mode="conditional")
    assert factorized.weights.sum() == pytest.approx(1.0)
    assert conditional.weights.sum() == pytest.approx(1.0)
    assert conditional.history[-1] == (8, 3)
    with pytest.raises(ValueError):
        consecutive_update(first, setup_zeta1, (12, 6), setup_zeta1, (8, 3), mode="joint")


def test_estimate_from_samples():
    estimate = FidelityEstimate.from_samples([0.2, 0.4, 0.6], "XY")
    assert estimate.mean == pytest.approx(0.4)
    assert estimate.stderr == pytest.approx(0.2 / math.sqrt(3))
    assert estimate.n_samples == 3


def test_monte_carlo_matches_continuum_single_record(setup_zeta1):
    initial = Coherent(1.0 + 0.5j)
    estimate = avg_fidelity_mc(initial, setup_zeta1, "XY", n_samples=200, seed=11)
    expected = continuum_avg_fidelity(setup_zeta1, "XY")
    assert abs(estimate.mean - expected) < 4 * estimate.stderr + 0.005


def test_monte_carlo_above_unit_squeezing():
    estimate = avg_fidelity_mc(Coherent(3.0), symmetric_xy(2.0, 10.0), "XY", n_samples=30, seed=7)
    assert abs(estimate.mean - analytic_avg_fidelity_single(2.0)) < 0.1


@pytest.mark.slow
@pytest.mark.parametrize("zeta", [2.0, 3.0])
def test_monte_carlo_matches_closed_form_at_strong_squeezing(zeta):
    estimate = avg_fidelity_mc(Coherent(3.0), symmetric_xy(zeta, 10.0), "XY", n_samples=300, seed=29)
    assert abs(estimate.mean - analytic_avg_fidelity_single(zeta)) < 3 * estimate.stderr + 1e-3


@pytest.mark.slow
def test_consecutive_records_beat_one_record_at_strong_squeezing():
    setup = symmetric_xy(3.0, 10.0)
    single = avg_fidelity_mc(Coherent(3.0), setup, "XY", n_samples=300, seed=31)
    consecutive = avg_fidelity_mc(Coherent(3.0), setup, "XY->XY", n_samples=300, seed=31)
    spread = math.hypot(single.stderr, consecutive.stderr)
    assert consecutive.mean - single.mean > 3 * spread
    assert consecutive.mean > 1 / 3


def test_monte_carlo_is_seeded(setup_zeta1):
    initial = Coherent(1.0)
    a = avg_fidelity_mc(initial, setup_zeta1, "XY", n_samples=20, seed=5)
    b = avg_fidelity_mc(initial, setup_zeta1, "XY", n_samples=20, seed=5)
    assert a.mean == b.mean


def test_unknown_scheme_is_rejected(setup_zeta1):
    with pytest.raises(ValueError):
        avg_fidelity_mc(Coherent(1.0), setup_zeta1, "XZ", n_samples=2)
    with pytest.raises(ValueError):
        continuum_avg_fidelity(setup_zeta1, "XZ")


@pytest.mark.slow
def test_monte_carlo_matches_continuum_consecutive(setup_zeta1):
    initial = Coherent(1.0)
    estimate = avg_fidelity_mc(initial, setup_zeta1, "XY->XY", n_samples=150, seed=13, likelihood="conditional")
    expected = continuum_avg_fidelity(setup_zeta1, "XY->XY", alpha=1.0, likelihood="conditional")
    assert 0.0 < expected < 1.0
    assert abs(estimate.mean - expected) < 4 * estimate.stderr + 0.01


@pytest.mark.slow
def test_four_channel_scheme_matches_continuum():
    setup = symmetric_xy(1.0, 10.0)
    xyxy = symmetric_xyxy(1.0, 10.0)
    estimate = avg_fidelity_mc(Coherent(1.0), xyxy, "XYXY", n_samples=200, seed=17)
    assert continuum_avg_fidelity(xyxy, "XYXY") == pytest.approx(continuum_avg_fidelity(setup, "XY"))
    assert abs(estimate.mean - continuum_avg_fidelity(xyxy, "XYXY")) < 4 * estimate.stderr + 0.005


def test_eight_port_reference():
    assert eight_port_reference(Coherent(1.0)) == pytest.approx(1 / 3)
    with pytest.raises(UnsupportedFamily):
        eight_port_reference(Cat(2.0))


@pytest.mark.slow
def test_eight_port_monte_carlo_for_coherent_states():
    estimate = eight_port_mc(Coherent(0.5), n_samples=300, seed=19)
    assert abs(estimate.mean - 1 / 3) < 4 * estimate.stderr + 0.005


def test_post_measurement_fidelity_is_a_fidelity(setup_zeta1):
    estimate = post_fidelity_mc(Coherent(1.0), setup_zeta1, n_samples=20, seed=23)
    assert 0.0 < estimate.mean < 1.0


def test_post_measurement_fidelity_decays_with_squeezing():
    """Coherent inputs average exp(-|alpha|^2 (1 - 1/mu)^2) / mu^2 for any beta."""
    alpha = 1.0
    means = []
    for zeta in (0.5, 1.0, 2.0):
        setup = symmetric_xy(zeta, 10.0)
        estimate = post_fidelity_mc(Coherent(alpha), setup, n_samples=40, seed=37)
        expected = math.exp(-alpha ** 2 * (1 - 1 / setup.mu) ** 2) / setup.mu ** 2
        assert abs(estimate.mean - expected) < 4 * estimate.stderr + 0.02
        means.append(estimate.mean)
    assert means[0] > means[1] > means[2]


def test_evidence_sharpens_with_squeezing():
    entropies = []
    for zeta in (0.5, 1.0, 3.0):
        posterior = bayes_update(PosteriorGrid.uniform(CoherentFamily()), symmetric_xy(zeta, 10.0), (0, 0))
        assert abs(posterior.mean_parameter()) < 1e-6
        entropies.append(posterior.entropy())
    assert entropies[0] > entropies[1] > entropies[2]


@pytest.mark.slow
def test_four_channel_scheme_matches_two_channels_at_strong_squeezing():
    zeta = 3.0
    xyxy = symmetric_xyxy(zeta, 10.0)
    estimate = avg_fidelity_mc(Coherent(3.0), xyxy, "XYXY", n_samples=300, seed=41)
    assert continuum_avg_fidelity(xyxy, "XYXY") == pytest.approx(continuum_avg_fidelity(symmetric_xy(zeta, 10.0), "XY"))
    assert abs(estimate.mean - analytic_avg_fidelity_single(zeta)) < 3 * estimate.stderr + 1e-3
