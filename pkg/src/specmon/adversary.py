"""Malicious-user threat models: fixed, uniform, normal and adaptive.

The first three are oblivious: each user's attack distribution never changes,
so a whole horizon of attacks can be drawn up front with ``attack_schedule``.
Adaptive users each run a single-radio exponential-weights learner (variant I
over K single-channel arms) rewarded with ``r`` for every slot they attack
without being captured.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import ConfigError, enumerate_strategies

KIND_CODES = {
    "fixed": _kernels.FIXED,
    "uniform": _kernels.UNIFORM,
    "normal": _kernels.NORMAL,
    "adaptive": _kernels.ADAPTIVE,
}
KINDS = tuple(KIND_CODES)


@dataclass(frozen=True)
class AttackOutcome:
    channels: np.ndarray  # per-MU attacked channel, -1 for no attack
    counts: np.ndarray  # M_k, attackers per channel


@dataclass(eq=False)
class AdversaryModel:
    kind: str
    K: int
    M: int
    r: float
    T: int
    probs: Optional[np.ndarray] = None  # uniform / normal
    fixed: Optional[np.ndarray] = None  # fixed: per-MU channel
    # adaptive learner state, one row per MU
    gamma: float = 0.0
    tau: int = 1
    log_h: Optional[np.ndarray] = field(default=None, repr=False)
    p: Optional[np.ndarray] = field(default=None, repr=False)
    current: Optional[np.ndarray] = None
    acc: Optional[np.ndarray] = field(default=None, repr=False)
    batch_start: int = 1

    @property
    def oblivious(self):
        return self.kind != "adaptive"


def normal_probs(K):
    """Gaussian density at channel indices, mean (K-1)/2, std K/4, normalized."""
    k = np.arange(K)
    mu, sigma = (K - 1) / 2, K / 4
    dens = np.exp(-0.5 * ((k - mu) / sigma) ** 2)
    return dens / dens.sum()


def init_adversary(kind, config, rng):
    kind = kind.lower()
    if kind not in KIND_CODES:
        raise ConfigError(f"unknown adversary {kind!r}; expected one of {', '.join(KINDS)}")
    K, M = config.K, config.M
    model = AdversaryModel(kind, K, M, config.r, config.T)
    if kind == "fixed":
        model.fixed = np.minimum((rng.random(M) * K).astype(np.int32), K - 1)
    elif kind == "uniform":
        model.probs = np.full(K, 1.0 / K)
    elif kind == "normal":
        model.probs = normal_probs(K)
    else:
        if K < 2:
            raise ConfigError("the adaptive adversary needs K >= 2 channels")
        from .algorithms import params_I

        params = params_I(enumerate_strategies(K, 1), config.T)
        model.gamma, model.tau = params.gamma, params.tau
        model.log_h = np.zeros((M, K))
        model.p = np.full((M, K), 1.0 / K)
        model.current = np.full(M, -1, dtype=np.int32)
        model.acc = np.zeros(M)
    return model


def attack_distribution(model, t):
    """Per-MU attack probabilities at slot ``t``, shape (M, K)."""
    out = np.zeros((model.M, model.K))
    if model.kind == "fixed":
        out[np.arange(model.M), model.fixed] = 1.0
    elif model.oblivious:
        out[:] = model.probs
    else:
        out[:] = model.p
    return out


def _inverse_cdf(probs, u):
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u, side="right")
    if cdf[-1] >= 1 - 1e-12:
        idx = np.minimum(idx, len(probs) - 1)
    return np.where(idx < len(probs), idx, -1).astype(np.int32)


def _outcome(channels, K):
    counts = np.bincount(channels[channels >= 0], minlength=K)
    return AttackOutcome(channels, counts)


def draw_attacks(model, t, rng):
    if model.kind == "fixed":
        return _outcome(model.fixed.copy(), model.K)
    if model.oblivious:
        return _outcome(_inverse_cdf(model.probs, rng.random(model.M)), model.K)
    if t == model.batch_start:
        u = rng.random(model.M)
        members = np.arange(model.K, dtype=np.int32).reshape(model.K, 1)
        for m in range(model.M):
            c, p = _kernels.mu_select(model.log_h[m], members, model.gamma, u[m])
            model.current[m] = c
            model.p[m] = p
        model.acc[:] = 0.0
    return _outcome(model.current.copy(), model.K)


def attack_schedule(model, T, rng):
    """All attacks of an oblivious adversary over ``T`` slots, shape (T, M).

    Consumes the random stream exactly as ``T`` successive ``draw_attacks``
    calls would.
    """
    if not model.oblivious:
        raise ValueError("an adaptive adversary cannot be scheduled in advance")
    if model.kind == "fixed":
        return np.tile(model.fixed, (T, 1)).astype(np.int32)
    if model.M == 0:
        return np.zeros((T, 0), dtype=np.int32)
    return _inverse_cdf(model.probs, rng.random((T, model.M)))


def notify_capture(model, t, captured, attacked):
    """Feed one slot's capture flags back to adaptive users."""
    if model.oblivious:
        return model
    for m in range(model.M):
        if attacked[m] >= 0 and not captured[m]:
            model.acc[m] += model.r
    end = min(model.batch_start + model.tau - 1, model.T)
    if t == end:
        n = end - model.batch_start + 1
        for m in range(model.M):
            model.log_h[m] = _kernels.mu_update(
                model.log_h[m], model.p[m], model.current[m], model.acc[m] / n, model.gamma
            )
        model.batch_start = end + 1
    return model
