"""Hindsight evaluation: best fixed strategy, utility, weak regret, aggregation."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Everything one episode produced.

    chosen:       strategy id per batch, shape (J,)
    costs:        switching cost charged at the start of each batch, shape (J,)
    slot_reward:  strategy reward actually collected in each slot, shape (T,)
    matrix:       counterfactual channel rewards f[t, k], shape (T, K)
    """

    chosen: np.ndarray
    costs: np.ndarray
    slot_reward: np.ndarray
    matrix: np.ndarray
    tau: int
    final_log_h: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def T(self):
        return self.slot_reward.shape[0]

    @property
    def G(self):
        return math.fsum(self.slot_reward)

    @property
    def L(self):
        return math.fsum(self.costs)

    @property
    def first_detection_slot(self):
        hits = np.flatnonzero(self.slot_reward > 0)
        return int(hits[0]) + 1 if hits.size else None

    def monitored_per_slot(self):
        """Strategy id held in every slot, shape (T,)."""
        return np.repeat(self.chosen, self.tau)[: self.T]


@dataclass(frozen=True)
class RegretReport:
    G_alg: float
    L_alg: float
    U_alg: float
    best_strategy: int
    G_best: float
    U_best: float
    weak_regret: float
    normalized_regret: float
    first_detection_slot: Optional[int]


def best_fixed(matrix, space, c0):
    """Best single strategy in hindsight and its utility.

    Because every l-subset is a strategy, the maximizer is the top-l channels
    by cumulative reward; ties go to the lowest channel index. Sums use
    ``math.fsum`` so equal multisets of rewards compare equal regardless of
    where in time they fall.
    """
    matrix = np.asarray(matrix, dtype=float)
    F = np.array([math.fsum(matrix[:, k]) for k in range(space.K)])
    top = np.sort(np.argsort(-F, kind="stable")[: space.l])
    s = space.id_of(top)
    G_best = math.fsum(matrix[:, top].ravel())
    return s, G_best - c0


def regret_report(trace, space, c0):
    s, U_best = best_fixed(trace.matrix, space, c0)
    G, L = trace.G, trace.L
    U = G - L
    R = U_best - U
    return RegretReport(
        G_alg=G,
        L_alg=L,
        U_alg=U,
        best_strategy=s,
        G_best=U_best + c0,
        U_best=U_best,
        weak_regret=R,
        normalized_regret=R / trace.T,
        first_detection_slot=trace.first_detection_slot,
    )


@dataclass(frozen=True)
class Summary:
    n: int
    mean: dict
    std: dict
    cdf: list
    never_detected: float

    def quantile(self, q):
        """Smallest first-detection slot whose CDF reaches ``q``; None if never."""
        for slot, frac in self.cdf:
            if frac >= q - 1e-12:
                return slot
        return None


SUMMARY_FIELDS = ("G_alg", "L_alg", "U_alg", "G_best", "U_best", "weak_regret", "normalized_regret")


def aggregate(reports):
    """Means, sample standard deviations and the first-detection CDF.

    CDF fractions are over all runs, so runs that never detected anything
    keep the curve below 1; their share is reported as ``never_detected``.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")
    n = len(reports)
    mean, std = {}, {}
    for name in SUMMARY_FIELDS:
        x = [getattr(rep, name) for rep in reports]
        mean[name] = statistics.fmean(x)
        std[name] = statistics.stdev(x) if n > 1 else 0.0

    slots = sorted(rep.first_detection_slot for rep in reports
                   if rep.first_detection_slot is not None)
    cdf = []
    for i, slot in enumerate(slots):
        if i + 1 < len(slots) and slots[i + 1] == slot:
            continue
        cdf.append((slot, (i + 1) / n))
    return Summary(n, mean, std, cdf, (n - len(slots)) / n)
