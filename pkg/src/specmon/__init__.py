"""Batched adversarial bandit algorithms for spectrum monitoring with switching costs."""

from .algorithms import (
    AlgoParams,
    AlgoState,
    BatchSchedule,
    CoveringSet,
    build_covering_set,
    channel_probabilities,
    init_state,
    make_schedule,
    params_I,
    params_II,
    params_III,
    params_IV,
    run_episode,
    sample_strategy,
    strategy_probabilities,
    update_weights,
)
from .adversary import AdversaryModel, AttackOutcome, draw_attacks, init_adversary, notify_capture
from .core import (
    BetaOutOfRangeError,
    ConfigError,
    HorizonTooSmallError,
    SimConfig,
    SpecMonError,
    Strategy,
    StrategySpace,
    enumerate_strategies,
    first_slot_cost,
    switching_cost,
)
from .environment import Environment, IncompleteRunError, StepOrderError
from .metrics import RegretReport, RunTrace, Summary, aggregate, best_fixed, regret_report
from .runner import child_seed, run_trial, streams

__version__ = "0.1.0"
