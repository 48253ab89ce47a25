"""Batched exponential-weights monitoring algorithms (variants I-IV).

Every variant follows the same episode loop: split the horizon into batches
of ``tau`` slots, draw one strategy per batch from the current probability
vector, hold it for the whole batch, then update per-channel weights from
importance-weighted batch averages. The variants differ only in how
probabilities are mixed and in the per-channel score:

====  =============================  =========================================
var   probabilities                  log-weight increment per channel
====  =============================  =========================================
I     (1-g) w/W + g/S                 g * (f/q) / S          monitored only
II    w/W                            -eta * (1/l - f) / q   monitored only
III   (1-g) w/W + (g/C) 1[s in cov]   eta * (f + beta) / q   all channels
IV    as III                         -eta * (1/l - f - beta) / q  all channels
====  =============================  =========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .core import (
    BetaOutOfRangeError,
    ConfigError,
    HorizonTooSmallError,
    first_slot_cost,
    switching_cost,
)
from .metrics import RunTrace

VARIANTS = ("I", "II", "III", "IV")
_CODES = {v: i + 1 for i, v in enumerate(VARIANTS)}


def variant_name(v):
    """Normalize ``1``, ``"2"``, ``"iii"`` etc. to a roman numeral."""
    if isinstance(v, str) and v.upper() in _CODES:
        return v.upper()
    try:
        return VARIANTS[int(v) - 1]
    except (ValueError, IndexError):
        raise ConfigError(f"unknown variant {v!r}; expected one of 1-4 or I-IV") from None


@dataclass(frozen=True)
class BatchSchedule:
    T: int
    tau: int

    @property
    def J(self):
        return -(-self.T // self.tau)

    def bounds(self, j):
        """1-based slot range ``(first, last)`` of 1-based batch ``j``."""
        start = (j - 1) * self.tau
        return start + 1, min(start + self.tau, self.T)

    def __iter__(self):
        for j in range(1, self.J + 1):
            yield self.bounds(j)


def make_schedule(T, tau):
    if not 1 <= tau <= T:
        raise ConfigError(f"batch size tau must lie in [1, T={T}], got {tau}")
    return BatchSchedule(int(T), int(tau))


@dataclass(frozen=True)
class AlgoParams:
    variant: str
    tau: int
    gamma: Optional[float] = None
    eta: Optional[float] = None
    beta: Optional[float] = None
    tau_real: Optional[float] = field(default=None, compare=False)

    @property
    def code(self):
        return _CODES[self.variant]


def validate_params(params, K, l, r, C=None):
    """Check the type invariants of ``params``; raise ConfigError on violation."""
    v, g, eta, beta = params.variant, params.gamma, params.eta, params.beta
    if params.tau < 1:
        raise ConfigError(f"tau must be >= 1, got {params.tau}")
    if v == "I":
        if g is None or not 0 < g < 1:
            raise ConfigError(f"variant I needs gamma in (0, 1), got {g}")
    elif v == "II":
        if eta is None or not eta > 0:
            raise ConfigError(f"variant II needs eta > 0, got {eta}")
    elif v == "III":
        if g is None or not 0 < g < 0.5:
            raise ConfigError(f"variant III needs gamma in (0, 1/2), got {g}")
        if beta is None or not 0 < beta < 1:
            raise ConfigError(f"variant III needs beta in (0, 1), got {beta}")
        if eta is None or not eta > 0:
            raise ConfigError(f"variant III needs eta > 0, got {eta}")
        if C is not None and 2 * eta * l * C > g * (1 + 1e-12):
            raise ConfigError(f"variant III needs 2*eta*l*C <= gamma, got {2 * eta * l * C} > {g}")
    else:
        if g is None or not 0 < g < 1:
            raise ConfigError(f"variant IV needs gamma in (0, 1), got {g}")
        if beta is None or not 0 < beta < 1 / l - r:
            raise BetaOutOfRangeError(
                f"variant IV needs beta in (0, 1/l - r) = (0, {1 / l - r:.6g}), got {beta}"
            )
        if C is not None:
            hi = 2 / (2 * l * C + K - l)
            if eta is None or not 0 < eta < hi:
                raise ConfigError(f"variant IV needs eta in (0, {hi:.6g}), got {eta}")
    return params


def _round_tau(x, T):
    return min(max(int(math.floor(x + 0.5)), 1), T)


def params_I(space, T):
    S = space.S
    lnS = math.log(S)
    threshold = (math.e - 1) * S * lnS
    if T < threshold:
        raise HorizonTooSmallError(
            f"variant I schedule needs T >= (e-1) S ln S = {threshold:.4g}, got T={T}"
        )
    gamma = (S * lnS / ((math.e - 1) ** 2 * T)) ** (1 / 3)
    tau = (T / ((math.e - 1) * S * lnS)) ** (1 / 3)
    return AlgoParams("I", _round_tau(tau, T), gamma=gamma, tau_real=tau)


def params_II(space, T):
    S = space.S
    lnS = math.log(S)
    threshold = 0.5 * S * lnS
    if T < threshold:
        raise HorizonTooSmallError(
            f"variant II schedule needs T >= S ln S / 2 = {threshold:.4g}, got T={T}"
        )
    eta = (4 * lnS / (S**2 * T)) ** (1 / 3)
    tau = (2 * T / (S * lnS)) ** (1 / 3)
    return AlgoParams("II", _round_tau(tau, T), eta=eta, tau_real=tau)


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")


def params_III(space, covering, K, l, delta, T):
    _check_delta(delta)
    S, C = space.S, covering.C
    lnS = math.log(S)
    a = math.sqrt(l * C * lnS)
    b = (l / K) * math.log(K / delta)
    B = 4 * a + 2 * math.sqrt(l * K * math.log(K / delta))
    threshold = max(B**2, 8 * (l * C * lnS) ** 1.5 / B, b**1.5 / B)
    if T < threshold:
        raise HorizonTooSmallError(
            f"variant III schedule needs T >= {threshold:.4g}, got T={T}"
        )
    scale = B ** (-1 / 3) * T ** (-1 / 3)
    tau = B ** (-2 / 3) * T ** (1 / 3)
    params = AlgoParams(
        "III",
        _round_tau(tau, T),
        gamma=a * scale,
        eta=math.sqrt(lnS / (4 * l * C)) * scale,
        beta=math.sqrt(b) * scale,
        tau_real=tau,
    )
    return validate_params(params, K, l, 0.0, C)


def params_IV(space, covering, K, l, r, delta, T):
    _check_delta(delta)
    S, C = space.S, covering.C
    lnS = math.log(S)
    B = 2 * l * K * math.log(K / delta)
    n = 2 * l * C + K - l
    threshold = max(B, n**3 * lnS**3 / B**2)
    if T < threshold:
        raise HorizonTooSmallError(
            f"variant IV schedule needs T >= {threshold:.4g}, got T={T}"
        )
    tau = B ** (-1 / 3) * T ** (1 / 3)
    params = AlgoParams(
        "IV",
        _round_tau(tau, T),
        gamma=2 * l * C / n,
        eta=2 * lnS * B ** (-2 / 3) * T ** (-1 / 3),
        beta=(1 / K) * B ** (1 / 3) * T ** (-1 / 3),
        tau_real=tau,
    )
    return validate_params(params, K, l, r, C)


@dataclass(frozen=True, eq=False)
class CoveringSet:
    members: tuple[int, ...]
    C_k: np.ndarray = field(repr=False)

    @property
    def C(self):
        return len(self.members)

    def mask(self, S):
        out = np.zeros(S, dtype=bool)
        out[list(self.members)] = True
        return out


def build_covering_set(space, rng):
    """Random minimal covering set of ceil(K/l) strategies.

    Channels are shuffled and cut into consecutive blocks of ``l``; a short
    final block is topped up with channels drawn without replacement from
    those already covered.
    """
    K, l = space.K, space.l
    perm = [int(k) for k in rng.permutation(K)]
    blocks = [perm[i : i + l] for i in range(0, K, l)]
    last = blocks[-1]
    if len(last) < l:
        pool = sorted(set(perm) - set(last))
        last.extend(int(k) for k in rng.choice(pool, size=l - len(last), replace=False))
    members = tuple(space.id_of(b) for b in blocks)
    C_k = np.zeros(K, dtype=np.int64)
    for b in blocks:
        C_k[b] += 1
    return CoveringSet(members, C_k)


@dataclass(frozen=True, eq=False)
class AlgoState:
    """Learner state at a batch boundary.

    Channel weights are kept as ``log_h`` with ``max(log_h) == 0``; strategy
    weights are implied as products of channel weights and never stored.
    """

    log_h: np.ndarray
    schedule: BatchSchedule
    params: AlgoParams
    covering: Optional[CoveringSet] = None
    j: int = 1
    last_strategy: Optional[int] = None

    @property
    def h(self):
        return np.exp(self.log_h)


def init_state(params, space, T, covering=None):
    if params.variant in ("III", "IV") and covering is None:
        raise ConfigError(f"variant {params.variant} needs a covering set")
    return AlgoState(np.zeros(space.K), make_schedule(T, params.tau), params, covering)


def _kernel_args(state, space):
    p = state.params
    cov = state.covering
    cover = cov.mask(space.S) if cov is not None else np.zeros(space.S, dtype=bool)
    C = cov.C if cov is not None else 1
    return p.code, p.gamma or 0.0, cover, C


def strategy_probabilities(state, space):
    if not np.all(np.isfinite(state.log_h)):
        raise FloatingPointError("non-finite channel weight")
    code, gamma, cover, C = _kernel_args(state, space)
    return _kernels.strategy_probs(state.log_h, space.members, code, gamma, cover, C)


def channel_probabilities(p, space):
    return _kernels.channel_probs(np.asarray(p, dtype=float), space.members, space.K)


def sample_strategy(p, rng):
    return int(_kernels.sample(np.asarray(p, dtype=float), rng.random()))


def score_increments(state, space, chosen, fbar, q):
    """Signed log-weight increment of every channel, before renormalization."""
    par = state.params
    monitored = np.zeros(space.K, dtype=bool)
    monitored[space.members[chosen]] = True
    fbar = np.where(monitored, np.asarray(fbar, dtype=float), 0.0)
    return _kernels.exponents(
        par.code, fbar, monitored, np.asarray(q, dtype=float), space.l,
        par.gamma or 0.0, par.eta or 0.0, par.beta or 0.0, space.S,
    )


def update_weights(state, space, chosen, fbar, q):
    """Apply one batch update and renormalize so the largest weight is 1.

    ``fbar`` is the length-K vector of batch-average rewards; entries for
    channels outside ``chosen`` are ignored.
    """
    e = score_increments(state, space, chosen, fbar, q)
    if not np.all(np.isfinite(e)):
        raise FloatingPointError("non-finite weight exponent")
    return replace(
        state,
        log_h=_kernels.apply_update(state.log_h, e),
        j=state.j + 1,
        last_strategy=int(chosen),
    )


def run_episode(params, space, covering, env, rng):
    """Play one episode against ``env`` slot by slot.

    This is the readable reference loop; ``runner.run_trial`` produces the
    same trace from a compiled loop.
    """
    T = env.config.T
    state = init_state(params, space, T, covering)
    K = space.K
    chosen, costs = [], []
    slot_reward = np.zeros(T)
    for first, last in state.schedule:
        p = strategy_probabilities(state, space)
        z = sample_strategy(p, rng)
        strat = space.strategies[z]
        if state.last_strategy is None:
            costs.append(first_slot_cost(env.config))
        else:
            costs.append(switching_cost(space.strategies[state.last_strategy], strat,
                                        env.config.unit_switch_cost))
        chosen.append(z)
        sums = np.zeros(K)
        for t in range(first, last + 1):
            observed = env.step(t, strat)
            for k, f in observed.items():
                sums[k] += f
            slot_reward[t - 1] = sum(observed.values())
        q = channel_probabilities(p, space)
        state = update_weights(state, space, z, sums / (last - first + 1), q)
    return RunTrace(
        chosen=np.array(chosen, dtype=np.int32),
        costs=np.array(costs),
        slot_reward=slot_reward,
        matrix=env.reward_matrix(),
        tau=params.tau,
        final_log_h=state.log_h,
    )
