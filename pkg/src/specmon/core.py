"""Strategy-space combinatorics, simulation configuration and switching costs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

# Strategy ids are stored as int32 throughout traces and kernels.
MAX_STRATEGIES = int(np.iinfo(np.int32).max)
_TOL = 1e-12


class SpecMonError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SpecMonError, ValueError):
    """A configuration or parameter violates a documented invariant."""


class HorizonTooSmallError(ConfigError):
    """The horizon is below the threshold required by a parameter schedule."""


class BetaOutOfRangeError(ConfigError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Immutable simulation configuration.

    Defaults reproduce the reference desk-scale setup: 10 channels, a two-radio
    monitor, unit reward 0.3, per-radio retuning cost 0.03 and detection
    probability 0.9 over 50000 slots with two malicious users.
    """

    K: int = 10
    l: int = 2
    r: float = 0.3
    unit_switch_cost: float = 0.03
    p_d: float = 0.9
    T: int = 50000
    M: int = 2
    delta: float = 0.5
    seed: int = 0
    trials: int = 100

    def __post_init__(self):
        for name in ("K", "l", "T", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 0:
            raise ConfigError(f"M must be a non-negative integer, got {self.M!r}")
        if self.l > self.K:
            raise ConfigError(f"l must satisfy 1 <= l <= K, got l={self.l}, K={self.K}")
        if not 0 < self.r <= 1:
            raise ConfigError(f"r must lie in (0, 1], got {self.r}")
        if self.r * self.l > 1 + _TOL:
            raise ConfigError(f"r * l must be <= 1, got {self.r} * {self.l}")
        if self.unit_switch_cost < 0:
            raise ConfigError(f"unit_switch_cost must be >= 0, got {self.unit_switch_cost}")
        if self.unit_switch_cost * self.l > 1 + _TOL:
            raise ConfigError(
                f"unit_switch_cost * l must be <= 1, got {self.unit_switch_cost} * {self.l}"
            )
        if not 0 <= self.p_d <= 1:
            raise ConfigError(f"p_d must lie in [0, 1], got {self.p_d}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class Strategy:
    channels: tuple[int, ...]
    id: int

    def __contains__(self, k):
        return k in self.channels


@dataclass(frozen=True, eq=False)
class StrategySpace:
    """All l-subsets of K channels in lexicographic order.

    ``members`` is an (S, l) int array of channel indices, row ``s`` holding
    strategy ``s``; ``incidence[k]`` lists the ids of strategies containing
    channel ``k``.
    """

    K: int
    l: int
    strategies: tuple[Strategy, ...]
    members: np.ndarray = field(repr=False)
    incidence: tuple[np.ndarray, ...] = field(repr=False)
    index: dict = field(repr=False)

    @property
    def S(self):
        return len(self.strategies)

    def id_of(self, channels):
        """Return the id of the strategy made of ``channels`` (any order)."""
        try:
            return self.index[tuple(sorted(channels))]
        except KeyError:
            raise KeyError(f"{tuple(channels)} is not a strategy of this space") from None

    def mask(self):
        """Boolean (S, K) incidence matrix."""
        out = np.zeros((self.S, self.K), dtype=bool)
        np.put_along_axis(out, self.members, True, axis=1)
        return out


def enumerate_strategies(K, l):
    """Build the strategy space of all ``l``-subsets of ``K`` channels."""
    if l < 1 or K < 1 or l > K:
        raise ConfigError(f"invalid dimensions: need 1 <= l <= K, got K={K}, l={l}")
    n = math.comb(K, l)
    if n > MAX_STRATEGIES:
        raise OverflowError(f"C({K}, {l}) = {n} strategies exceeds the int32 index range")

    combos = list(itertools.combinations(range(K), l))
    members = np.array(combos, dtype=np.int32).reshape(n, l)
    strategies = tuple(Strategy(c, i) for i, c in enumerate(combos))
    incidence = tuple(
        np.flatnonzero((members == k).any(axis=1)).astype(np.int32) for k in range(K)
    )
    index = {c: i for i, c in enumerate(combos)}
    return StrategySpace(K, l, strategies, members, incidence, index)


def switching_cost(prev, next, unit_switch_cost):
    """Cost of moving from ``prev`` to ``next``: one unit per retuned radio."""
    overlap = len(set(prev.channels) & set(next.channels))
    return unit_switch_cost * (len(next.channels) - overlap)


def first_slot_cost(config):
    """Cost c0 of tuning every radio from idle, charged at the first slot."""
    return config.unit_switch_cost * config.l
