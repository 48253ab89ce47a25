"""Seeded trial execution.

Each trial gets a child seed derived from ``(master seed, cell, trial)`` with
``numpy.random.SeedSequence`` spawn keys, so any trial can be reproduced on
its own and sweeps can run in any order or in parallel. The child seed is
split again into one stream per concern:

    covering   covering-set construction
    adversary  adversary initialization (fixed channels)
    attack     per-slot / per-batch attack draws
    detect     one detection uniform per channel per slot
    monitor    one sampling uniform per monitor batch

Keeping detection and attack draws off the monitor's stream means that an
oblivious adversary produces the same reward matrix whatever the monitor does.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .adversary import KIND_CODES, attack_schedule, init_adversary
from .algorithms import (
    AlgoParams,
    build_covering_set,
    params_I,
    params_II,
    params_III,
    params_IV,
    run_episode,
    validate_params,
    variant_name,
)
from .core import ConfigError, HorizonTooSmallError, enumerate_strategies, first_slot_cost
from .environment import Environment
from .metrics import RunTrace, regret_report

STREAMS = ("covering", "adversary", "attack", "detect", "monitor")
_NEEDED = {"I": ("gamma",), "II": ("eta",), "III": ("gamma", "eta", "beta"),
           "IV": ("gamma", "eta", "beta")}


class Streams(NamedTuple):
    covering: np.random.Generator
    adversary: np.random.Generator
    attack: np.random.Generator
    detect: np.random.Generator
    monitor: np.random.Generator


def child_seed(master, cell, trial):
    ss = np.random.SeedSequence(int(master), spawn_key=(int(cell), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


def streams(seed):
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return Streams(*(np.random.Generator(np.random.PCG64(c)) for c in children))


def default_params(variant, space, covering, config):
    variant = variant_name(variant)
    if variant == "I":
        return params_I(space, config.T)
    if variant == "II":
        return params_II(space, config.T)
    if variant == "III":
        return params_III(space, covering, config.K, config.l, config.delta, config.T)
    return params_IV(space, covering, config.K, config.l, config.r, config.delta, config.T)


def resolve_params(variant, space, covering, config, overrides=None):
    """Default schedule with any of tau/gamma/eta/beta replaced by hand.

    When the horizon is too short for the schedule, fully specified overrides
    are still accepted.
    """
    variant = variant_name(variant)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    try:
        params = default_params(variant, space, covering, config)
    except HorizonTooSmallError:
        missing = [k for k in ("tau",) + _NEEDED[variant] if k not in overrides]
        if missing:
            raise
        params = AlgoParams(variant, 1)
    if overrides:
        if "tau" in overrides:
            overrides["tau_real"] = None
        params = replace(params, **overrides)
        if not 1 <= params.tau <= config.T:
            raise ConfigError(f"tau must lie in [1, T={config.T}], got {params.tau}")
        validate_params(params, config.K, config.l, config.r, covering.C)
    return params


@dataclass(frozen=True, eq=False)
class TrialResult:
    params: AlgoParams
    trace: RunTrace
    report: object
    seed: int


def setup(config, variant, adversary, seed, overrides=None):
    rng = streams(seed)
    space = enumerate_strategies(config.K, config.l)
    covering = build_covering_set(space, rng.covering)
    params = resolve_params(variant, space, covering, config, overrides)
    model = init_adversary(adversary, config, rng.adversary)
    return rng, space, covering, params, model


def run_trial(config, variant, adversary, seed, overrides=None, reference=False):
    """Run one episode and score it.

    ``reference=True`` steps the pure-Python environment slot by slot; the
    default path draws every random number up front and runs the compiled
    loop. Both consume the streams identically and return the same trace.
    """
    rng, space, covering, params, model = setup(config, variant, adversary, seed, overrides)
    c0 = first_slot_cost(config)
    if reference:
        env = Environment(config, model, rng.attack, rng.detect)
        trace = run_episode(params, space, covering, env, rng.monitor)
    else:
        trace = _fast_episode(config, params, space, covering, model, rng)
    return TrialResult(params, trace, regret_report(trace, space, c0), seed)


def _fast_episode(config, params, space, covering, model, rng):
    T, K, M = config.T, config.K, config.M
    if model.oblivious:
        attacks = attack_schedule(model, T, rng.attack)
        u_adv = np.zeros((0, M))
    else:
        attacks = np.zeros((T, M), dtype=np.int32)
        u_adv = rng.attack.random((-(-T // model.tau), M))
    det = rng.detect.random((T, K)) < config.p_d
    J = -(-T // params.tau)
    u_monitor = rng.monitor.random(J)

    chosen, costs, slot_reward, matrix, log_h = _kernels.episode(
        params.code, params.gamma or 0.0, params.eta or 0.0, params.beta or 0.0,
        params.tau, space.members, covering.mask(space.S), covering.C, np.zeros(K),
        first_slot_cost(config), config.unit_switch_cost, u_monitor, det, config.r,
        KIND_CODES[model.kind], attacks, model.gamma, model.tau, u_adv,
    )
    return RunTrace(chosen, costs, slot_reward, matrix, params.tau, final_log_h=log_h)
