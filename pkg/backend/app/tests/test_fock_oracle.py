"""Tests for the truncated-Fock simulation of the full EOS interaction."""
import logging
import math

import numpy as np
import pytest

from app.eos_core import balanced_rotation, exact_count_distribution, symmetric_xy, symmetric_xyxy, x_only
from app.errors import OracleEnvelopeExceeded, TruncationBreach, VanishingOutcomeProbability
from app.fock_oracle import (
    MIR_CAP,
    NIR_CAP,
    TAIL_LIMIT,
    TruncatedRegister,
    apply_displacement,
    apply_multimode_squeeze,
    apply_waveplate,
    collective_basis,
    cutoff_policy,
    displacement_matrix,
    evolve,
    oracle_count_distribution,
    outcome_probabilities,
    post_state,
    register_from_setup,
    waveplate_heisenberg_residual,
    waveplate_transfer,
)
from app.phase_space import Coherent, Numeric, Vacuum
from app.fock_oracle.simulate import tail_cutoff
from app.phase_space.fock import coherent_vector


@pytest.mark.parametrize("phi", [math.pi, 2.0, 4.0])
def test_waveplate_heisenberg_residual(phi):
    assert waveplate_heisenberg_residual(phi, balanced_rotation(phi)) < 1e-10


def test_displacement_of_vacuum_is_coherent():
    beta = 1.3 - 0.4j
    D = displacement_matrix(beta, 30)
    np.testing.assert_allclose(D[:, 0], coherent_vector(beta, 31), atol=1e-12)


def test_collective_basis_is_unitary():
    alpha_tilde = symmetric_xy(0.3, 2.0).alpha_tilde
    T = collective_basis(alpha_tilde)
    np.testing.assert_allclose(T @ T.conj().T, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(T[:, 0], np.conj(alpha_tilde), atol=1e-14)
    with pytest.raises(OracleEnvelopeExceeded):
        collective_basis([0.5, 0.5, 0.5, 0.5])


def test_product_register_starts_in_nir_vacuum():
    reg = TruncatedRegister.product(coherent_vector(0.5, 21), 2, 20, 6)
    assert reg.labels == ("mir", "s1", "z1", "s2", "z2")
    assert reg.psi.shape == (21, 7, 7, 7, 7)
    assert reg.norm() == pytest.approx(1.0, abs=1e-12)
    assert reg.populations("s1")[0] == pytest.approx(1.0)


def test_waveplate_maps_coherent_amplitudes():
    """A coherent state in s ends up as the coherent pair T[:, 0] b on (s, z)."""
    b = 0.5 + 0.25j
    phi, theta = math.pi, balanced_rotation(math.pi)
    T = waveplate_transfer(phi, theta)
    base = TruncatedRegister.product(np.eye(3)[0], 1, 2, 18)
    rotated = apply_waveplate(apply_displacement(base, "s1", b), 1, phi, theta)
    expected = apply_displacement(apply_displacement(base, "s1", T[0, 0] * b), "z1", T[1, 0] * b)
    np.testing.assert_allclose(rotated.psi, expected.psi, atol=1e-10)


def test_single_channel_squeeze_is_thermal_on_mir():
    """exp(zeta* a b - h.c.) on vacuum leaves each mode thermal with tanh^2 ratio."""
    zeta = 0.3
    reg = TruncatedRegister.product(np.eye(21)[0], 1, 20, 20)
    squeezed = apply_multimode_squeeze(reg, zeta, [1.0])
    n = np.arange(21)
    expected = math.tanh(zeta) ** (2 * n) / math.cosh(zeta) ** 2
    np.testing.assert_allclose(squeezed.populations("mir"), expected, atol=1e-10)
    np.testing.assert_allclose(squeezed.populations("s1"), expected, atol=1e-10)


@pytest.mark.parametrize("state", [Vacuum(), Coherent(1.0)])
def test_squeeze_routes_agree(state):
    setup = symmetric_xy(0.3, 2.0)
    reg = register_from_setup(setup, state)
    direct = apply_multimode_squeeze(reg, setup.zeta, setup.alpha_tilde, route="generator")
    collective = apply_multimode_squeeze(reg, setup.zeta, setup.alpha_tilde, route="collective")
    assert np.max(np.abs(direct.psi - collective.psi)) < 1e-9


def test_unknown_squeeze_route():
    setup = symmetric_xy(0.3, 2.0)
    reg = register_from_setup(setup, Vacuum())
    with pytest.raises(ValueError):
        apply_multimode_squeeze(reg, setup.zeta, setup.alpha_tilde, route="dense")


def test_tail_cutoff_grows_with_photons():
    assert tail_cutoff(0.0, 0.0) <= 2
    assert tail_cutoff(0.5, 0.0) < tail_cutoff(2.0, 0.0) < tail_cutoff(2.0, 1.0)


def test_cutoff_policy_respects_caps(caplog):
    with caplog.at_level(logging.WARNING, logger="app.fock_oracle.simulate"):
        cutoffs = cutoff_policy(symmetric_xy(0.5, 2.0), Coherent(1.0))
    assert cutoffs.mir < MIR_CAP
    assert cutoffs.nir < NIR_CAP
    assert not caplog.records
    assert cutoffs.nir >= cutoff_policy(symmetric_xy(0.3, 1.0), Vacuum()).nir


def test_cutoffs_hold_the_displaced_nir_tail():
    """beta = 2 at the squeezing edge, coherent input: the chosen cutoffs keep the top two levels under the breach limit."""
    setup = x_only(0.5, 2.0)
    reg = evolve(setup, Coherent(1.0))
    assert reg.cutoffs[1] == cutoff_policy(setup, Coherent(1.0)).nir
    assert reg.tail_mass() < TAIL_LIMIT


def test_binding_cap_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="app.fock_oracle.simulate"):
        cutoffs = cutoff_policy(symmetric_xy(0.5, 2.0), Coherent(4.0))
    assert cutoffs.mir == MIR_CAP
    assert any("capping" in r.getMessage() for r in caplog.records)


def test_envelope_refusals():
    with pytest.raises(OracleEnvelopeExceeded):
        register_from_setup(symmetric_xy(0.6, 2.0), Vacuum())
    with pytest.raises(OracleEnvelopeExceeded):
        register_from_setup(symmetric_xy(0.3, 3.0), Vacuum())
    with pytest.raises(OracleEnvelopeExceeded):
        register_from_setup(symmetric_xyxy(0.3, 2.0), Vacuum())


def test_small_cutoff_is_a_truncation_breach():
    reg = TruncatedRegister.product(np.eye(3)[0], 1, 2, 5)
    with pytest.raises(TruncationBreach):
        apply_displacement(reg, "s1", 2.0)


def test_single_channel_outcomes_are_normalized():
    setup = x_only(0.3, 1.5)
    table = oracle_count_distribution(setup, Vacuum())
    assert table.labels == ("dn_1",)
    assert table.total() == pytest.approx(1.0, abs=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize("state", [Vacuum(), Coherent(1.0)])
def test_oracle_matches_exact_route(state):
    """beta = 2, zeta = 0.3: the truncated simulation and the Skellam route agree to 1e-6."""
    setup = symmetric_xy(0.3, 2.0)
    oracle = oracle_count_distribution(setup, state)
    exact = exact_count_distribution(setup, state, window=oracle.axes, strict=False)
    assert oracle.labels == exact.labels
    assert oracle.total() == pytest.approx(1.0, abs=1e-7)
    assert np.max(np.abs(oracle.probabilities - exact.probabilities)) <= 1e-6


@pytest.mark.slow
def test_oracle_post_state_is_conditioned_state():
    setup = symmetric_xy(0.3, 2.0)
    reg = evolve(setup, Coherent(1.0))
    table = outcome_probabilities(reg)
    state, p = post_state(reg, (1, -1))
    assert isinstance(state, Numeric)
    assert p == pytest.approx(table.probability_of((1, -1)), rel=1e-10)
    assert np.trace(state.rho).real == pytest.approx(1.0)
    with pytest.raises(VanishingOutcomeProbability):
        post_state(reg, (reg.cutoffs[1], -reg.cutoffs[2]))
