"""Shared fixtures: states, measurement setups and random generators."""
import numpy as np
import pytest

from app.eos_core import symmetric_xy
from app.phase_space import Cat, Coherent, Fock, Squeezed, Vacuum
from app.pipeline.parallel import DEFAULT_SEED


@pytest.fixture
def vacuum():
    return Vacuum()


@pytest.fixture
def coherent_state():
    """Coherent state well inside the strong-probe window."""
    return Coherent(1.0 + 0.5j)


@pytest.fixture
def fock3():
    return Fock(3)


@pytest.fixture
def cat_state():
    """Even cat with alpha = 3, the chain example input."""
    return Cat(3.0, 1)


@pytest.fixture
def squeezed_state():
    return Squeezed(0.4, 0.0)


@pytest.fixture
def weak_setup():
    """Symmetric XY at zeta = 0.1, beta = 10: s~ far below -1."""
    return symmetric_xy(0.1, 10.0)


@pytest.fixture
def setup_zeta1():
    """Symmetric XY at zeta = 1, beta = 10."""
    return symmetric_xy(1.0, 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def config_file(tmp_path):
    """Write YAML text to a temporary config and return its path."""

    def write(text: str, name: str = "run.yaml"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
