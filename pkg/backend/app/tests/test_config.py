"""Tests for YAML run configurations."""
from pathlib import Path

import numpy as np
import pytest

from app.errors import ConfigError
from app.phase_space import Cat, Coherent
from app.pipeline.config import RunConfig, load_config, parse_complex, parse_config, resolved
from app.pipeline.parallel import DEFAULT_SEED

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


@pytest.mark.parametrize(
    "value,expected",
    [("1+i", 1 + 1j), ("1-0.5i", 1 - 0.5j), ("2i", 2j), ("i", 1j), ("-i", -1j), ([1, 2], 1 + 2j), (3, 3 + 0j)],
)
def test_parse_complex(value, expected):
    assert parse_complex(value) == expected


@pytest.mark.parametrize("value", [True, "abc", [1, 2, 3], None])
def test_parse_complex_rejects(value):
    with pytest.raises(ValueError):
        parse_complex(value)


def test_yaml_syntax_error_reports_position():
    with pytest.raises(ConfigError) as info:
        parse_config("state:\n  kind: [coherent\n", "broken.yaml")
    assert info.value.line is not None
    assert "broken.yaml" in str(info.value)


def test_validation_errors_become_config_errors():
    with pytest.raises(ConfigError, match="state.kind"):
        parse_config("state:\n  kind: qubit\n")
    with pytest.raises(ConfigError):
        parse_config("unknown_section: 1\n")
    with pytest.raises(ConfigError):
        parse_config("- just\n- a list\n")


def test_setup_takes_preset_or_channels():
    both = """
setup:
  preset: symmetric_xy
  beta: 10
  channels:
    - {probe: 10, quadrature: X}
"""
    with pytest.raises(ConfigError):
        parse_config(both)
    with pytest.raises(ConfigError):
        parse_config("setup:\n  preset: symmetric_xy\n")
    with pytest.raises(ConfigError):
        parse_config("setup:\n  zeta: 1\n")


def test_explicit_channels_build_a_setup():
    config = parse_config(
        """
setup:
  zeta: 0.8
  channels:
    - {pump: 1, probe: 10, quadrature: X}
    - {pump: 1i, probe: 10, quadrature: Y}
"""
    )
    setup = config.require_setup().build()
    assert setup.n_channels == 2
    assert abs(setup.zeta) == pytest.approx(0.8)
    assert abs(config.require_setup().build(zeta=0.4).zeta) == pytest.approx(0.4)


def test_states_are_built_from_config():
    config = parse_config("state:\n  kind: cat\n  alpha: 2i\n  parity: -1\n")
    state = config.state.build()
    assert isinstance(state, Cat)
    assert parse_config("state: {kind: coherent, alpha: [1, 0.5]}").state.build() == Coherent(1 + 0.5j)


def test_defaults_without_a_file():
    config = load_config(None)
    assert isinstance(config, RunConfig)
    assert config.seed == DEFAULT_SEED
    assert config.setup is None
    with pytest.raises(ConfigError):
        config.require_setup()


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")


def test_sweep_points(config_file):
    config = load_config(config_file("zetas: {start: 0.5, stop: 2.0, num: 4}\n"))
    np.testing.assert_allclose(config.zeta_values(), [0.5, 1.0, 1.5, 2.0])
    config = parse_config("zetas: {values: [0.1, 3]}\n")
    np.testing.assert_allclose(config.zeta_values(), [0.1, 3.0])


def test_resolved_config_is_json_friendly():
    config = parse_config("state:\n  kind: coherent\n  alpha: 1+0.5i\n")
    dumped = resolved(config)
    assert dumped["state"]["alpha"] == [1.0, 0.5]
    assert dumped["seed"] == DEFAULT_SEED


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_are_valid(path):
    assert isinstance(load_config(path), RunConfig)
