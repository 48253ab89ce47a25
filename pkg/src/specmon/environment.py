"""Counterfactual reward process and misuse detection."""

from __future__ import annotations

import numpy as np

from .adversary import draw_attacks, notify_capture
from .core import SpecMonError


class StepOrderError(SpecMonError, RuntimeError):
    pass


class IncompleteRunError(SpecMonError, RuntimeError):
    pass


class Environment:
    """Generates f[t, k] for every channel, monitored or not.

    Each slot, every attacked channel gets one detection draw with success
    probability ``p_d`` shared by all users on it; the reward is ``r`` on
    success. Monitoring only decides which entries the learner sees and which
    users count as captured. Detection uses one uniform per channel per slot
    whether or not the channel is attacked, so the detection stream does not
    depend on anyone's choices.
    """

    def __init__(self, config, adversary, attack_rng, detect_rng):
        self.config = config
        self.adversary = adversary
        self.attack_rng = attack_rng
        self.detect_rng = detect_rng
        self.matrix = np.zeros((config.T, config.K))
        self.captures = np.zeros((config.T, config.M), dtype=bool)
        self.next_slot = 1

    def step(self, t, monitored):
        """Advance slot ``t`` (1-based) and return ``{channel: reward}`` for
        the monitored channels."""
        if t != self.next_slot:
            raise StepOrderError(f"expected slot {self.next_slot}, got {t}")
        channels = tuple(getattr(monitored, "channels", monitored))
        cfg = self.config
        outcome = draw_attacks(self.adversary, t, self.attack_rng)
        detected = self.detect_rng.random(cfg.K) < cfg.p_d
        row = self.matrix[t - 1]
        row[(outcome.counts > 0) & detected] = cfg.r

        watched = np.zeros(cfg.K, dtype=bool)
        watched[list(channels)] = True
        attacked = outcome.channels
        hit = attacked >= 0
        captured = np.zeros(cfg.M, dtype=bool)
        captured[hit] = watched[attacked[hit]] & detected[attacked[hit]]
        self.captures[t - 1] = captured
        notify_capture(self.adversary, t, captured, attacked)

        self.next_slot += 1
        return {k: row[k] for k in channels}

    def reward_matrix(self):
        if self.next_slot <= self.config.T:
            raise IncompleteRunError(
                f"only {self.next_slot - 1} of {self.config.T} slots have been generated"
            )
        return self.matrix
