"""
YAML run configurations validated with pydantic.

Complex quantities are written ``a+bi`` (``1-0.5i``, ``2i``), as plain numbers
or as ``[re, im]`` pairs.
"""
import logging
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, model_validator

from ..eos_core import ChannelSpec, EosSetup, derive_setup, detuned, symmetric_xy, symmetric_xyxy, x_only
from ..errors import ConfigError
from ..phase_space import Cat, Coherent, Fock, Squeezed, StateModel, Vacuum
from ..phase_space.grid import DEFAULT_GRID_POINTS, Window
from .parallel import DEFAULT_SEED

logger = logging.getLogger(__name__)


def parse_complex(value: Any) -> complex:
    """Accept numbers, ``[re, im]`` pairs and ``a+bi`` strings."""
    if isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must have two entries, got {len(value)}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        if text.endswith("i"):
            text = text[:-1] + "j"
            if text == "j" or text[-2] in "+-":
                text = text[:-1] + "1j"
        try:
            return complex(text)
        except ValueError:
            raise ValueError(f"cannot parse complex literal {value!r}") from None
    raise ValueError(f"unsupported complex value {value!r}")


ComplexValue = Annotated[complex, BeforeValidator(parse_complex)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ChannelConfig(_Strict):
    pump: ComplexValue = 1.0
    probe: ComplexValue
    quadrature: Literal["X", "Y"]
    phi: Optional[float] = None
    theta: Optional[float] = None
    k1: int = 0
    k2: int = 0

    def spec(self) -> ChannelSpec:
        return ChannelSpec(self.pump, self.probe, self.quadrature, self.phi, self.theta, self.k1, self.k2)


class SetupConfig(_Strict):
    """Either a named preset with ``beta`` or an explicit channel list."""

    zeta: ComplexValue = 1.0
    preset: Optional[Literal["symmetric_xy", "symmetric_xyxy", "x_only"]] = None
    beta: Optional[float] = None
    channels: List[ChannelConfig] = Field(default_factory=list)
    theta_offset: float = 0.0

    @model_validator(mode="after")
    def _one_source(self):
        if self.preset is None and not self.channels:
            raise ValueError("setup needs either a preset or a channel list")
        if self.preset is not None and self.channels:
            raise ValueError("setup takes a preset or channels, not both")
        if self.preset is not None and (self.beta is None or self.beta <= 0):
            raise ValueError("preset setups need a positive beta")
        return self

    def build(self, zeta: Optional[complex] = None) -> EosSetup:
        zeta = self.zeta if zeta is None else zeta
        if self.preset == "symmetric_xy":
            setup = symmetric_xy(zeta, self.beta)
        elif self.preset == "symmetric_xyxy":
            setup = symmetric_xyxy(zeta, self.beta)
        elif self.preset == "x_only":
            setup = x_only(zeta, self.beta)
        else:
            setup = derive_setup(zeta, [ch.spec() for ch in self.channels])
        if self.theta_offset:
            setup = detuned(setup, self.theta_offset)
        return setup


class StateConfig(_Strict):
    kind: Literal["vacuum", "coherent", "fock", "cat", "squeezed"] = "vacuum"
    alpha: ComplexValue = 0.0
    n: int = Field(default=0, ge=0)
    parity: Literal[1, -1] = 1
    r: float = 0.0
    phase: float = 0.0

    def build(self) -> StateModel:
        if self.kind == "coherent":
            return Coherent(self.alpha)
        if self.kind == "fock":
            return Fock(self.n)
        if self.kind == "cat":
            return Cat(self.alpha, self.parity)
        if self.kind == "squeezed":
            return Squeezed(self.r, self.phase)
        return Vacuum()


class GridConfig(_Strict):
    points: int = Field(default=DEFAULT_GRID_POINTS, ge=9)
    half_width: Optional[float] = Field(default=None, gt=0)
    n_max: int = Field(default=40, ge=1)

    def window(self, center: complex = 0j) -> Optional[Window]:
        if self.half_width is None:
            return None
        return Window.square(self.half_width, self.points, center)


class SweepConfig(_Strict):
    """Either explicit ``values`` or a linear ``start``/``stop``/``num`` range."""

    values: Optional[List[float]] = None
    start: float = 0.05
    stop: float = 4.0
    num: int = Field(default=80, ge=1)

    def points(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return np.linspace(self.start, self.stop, self.num)


class StageConfig(_Strict):
    setup: SetupConfig
    outcomes: Optional[List[int]] = None


class OracleConfig(_Strict):
    beta: float = 2.0
    zeta: float = 0.3
    states: List[StateConfig] = Field(
        default_factory=lambda: [StateConfig(kind="vacuum"), StateConfig(kind="coherent", alpha=1.0)]
    )
    strong_beta: float = 10.0
    strong_zeta: float = 1.0
    strong_state: StateConfig = Field(default_factory=lambda: StateConfig(kind="coherent", alpha=1.0))
    oracle_tol: float = 1e-6
    gaussian_tol: float = 2e-3
    detuning: float = 0.05


class RunConfig(_Strict):
    """Everything one CLI command needs; unused sections are ignored by other commands."""

    state: StateConfig = Field(default_factory=StateConfig)
    setup: Optional[SetupConfig] = None
    zetas: Optional[SweepConfig] = None
    orderings: List[float] = Field(default_factory=lambda: [0.5, 0.0, -0.5, -1.0, -2.0])
    stages: List[StageConfig] = Field(default_factory=list)
    schemes: List[Literal["XY", "XYXY", "XY->XY"]] = Field(default_factory=lambda: ["XY", "XY->XY"])
    likelihood: Literal["factorized", "conditional"] = "factorized"
    samples: int = Field(default=400, ge=1)
    seed: int = DEFAULT_SEED
    grid: GridConfig = Field(default_factory=GridConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)

    def require_setup(self) -> SetupConfig:
        if self.setup is None:
            raise ConfigError("This command needs a 'setup' section")
        return self.setup

    def zeta_values(self, default: Optional[SweepConfig] = None) -> np.ndarray:
        sweep = self.zetas or default
        if sweep is None:
            return np.array([abs(self.require_setup().zeta)])
        return sweep.points()


def _format_validation(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{loc}: {item['msg']}")
    return "; ".join(parts)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is not None:
            raise ConfigError(f"{source}: {getattr(e, 'problem', 'YAML syntax error')}", mark.line + 1, mark.column + 1) from e
        raise ConfigError(f"{source}: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping, got {type(data).__name__}")
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_format_validation(e)}") from e
    logger.debug(f"Loaded configuration from {source}")
    return config


def load_config(path: Union[str, Path, None]) -> RunConfig:
    """Read a YAML run configuration; a missing path gives the defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    return parse_config(text, str(path))


def resolved(config: RunConfig) -> dict:
    """JSON-friendly dump for run manifests, complex values as [re, im]."""

    def convert(value):
        if isinstance(value, complex):
            return [value.real, value.imag]
        if isinstance(value, dict):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, list):
            return [convert(v) for v in value]
        return value

    return convert(config.model_dump())
