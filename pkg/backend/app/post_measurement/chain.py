"""Consecutive EOS measurements on the same MIR mode."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..eos_core import CountTable, EosSetup, count_distribution, count_probability
from ..errors import ChainMassLoss
from ..phase_space.grid import DEFAULT_GRID_POINTS
from ..phase_space import GaussianState, QpdGrid, StateModel, purity, qpd_grid
from .postmap import fitted_post_grid, post_map, post_state, post_window, project_grid

logger = logging.getLogger(__name__)

MASS_LOSS_LIMIT = 1e-6


@dataclass(frozen=True)
class StageSpec:
    setup: EosSetup
    outcomes: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True, eq=False)
class ChainStage:
    index: int
    setup: EosSetup
    outcomes: Tuple[int, ...]
    probability: float
    distribution: Optional[CountTable]
    state: StateModel
    grid: QpdGrid
    purity: float
    kurtosis_x: float
    kurtosis_y: float
    lost_mass: float

    def summary(self) -> dict:
        return {
            "stage": self.index,
            "zeta": [self.setup.zeta.real, self.setup.zeta.imag],
            "outcomes": list(self.outcomes),
            "probability": self.probability,
            "purity": self.purity,
            "excess_kurtosis_x": self.kurtosis_x,
            "excess_kurtosis_y": self.kurtosis_y,
            "lost_mass": self.lost_mass,
        }


def run_stage(
    index: int,
    spec: StageSpec,
    state: StateModel,
    rng: Optional[np.random.Generator] = None,
    keep_distribution: bool = False,
    n_points: int = DEFAULT_GRID_POINTS,
) -> ChainStage:
    table = None
    outcomes = spec.outcomes
    if outcomes is None or keep_distribution:
        table = count_distribution(spec.setup, state)
    if outcomes is None:
        if rng is None:
            raise ValueError("Sampling stage outcomes needs a random generator")
        outcomes = tuple(int(d) for d in table.sample(rng, 1)[0])
        logger.info(f"Stage {index}: sampled outcomes {outcomes}")

    probability = count_probability(spec.setup, state, outcomes)
    pm = post_map(spec.setup, outcomes)
    if isinstance(state, GaussianState):
        new_state, lost = post_state(pm, state)
        grid = qpd_grid(new_state, post_window(pm, state, n_points))
    else:
        grid = fitted_post_grid(pm, state, n_points, probability=probability)
        new_state, lost = project_grid(grid)
        if abs(lost) > MASS_LOSS_LIMIT:
            raise ChainMassLoss(f"Stage {index}: re-gridding lost {lost:.3e} of the state's mass")

    stage = ChainStage(
        index=index,
        setup=spec.setup,
        outcomes=tuple(outcomes),
        probability=probability,
        distribution=table,
        state=new_state,
        grid=grid,
        purity=purity(grid),
        kurtosis_x=grid.excess_kurtosis("X"),
        kurtosis_y=grid.excess_kurtosis("Y"),
        lost_mass=lost,
    )
    logger.info(
        f"Stage {index}: outcomes {stage.outcomes}, p={probability:.3e}, purity={stage.purity:.4f}, lost={lost:.2e}"
    )
    return stage


def chain(
    stages: Sequence[StageSpec],
    state: StateModel,
    rng: Optional[np.random.Generator] = None,
    keep_distributions: bool = False,
    n_points: int = DEFAULT_GRID_POINTS,
) -> List[ChainStage]:
    """Run stages strictly in order; stage t+1 measures the post-state of stage t."""
    results = []
    current = state
    for index, spec in enumerate(stages, start=1):
        stage = run_stage(index, spec, current, rng=rng, keep_distribution=keep_distributions, n_points=n_points)
        results.append(stage)
        current = stage.state
    return results
