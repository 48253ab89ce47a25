import math

import numpy as np
import pytest

from specmon.core import enumerate_strategies, switching_cost
from specmon.metrics import RegretReport, RunTrace, aggregate, best_fixed, regret_report


def exhaustive_best(matrix, space, c0):
    """Brute force over every strategy; first maximizer in enumeration order."""
    best, best_val = None, -math.inf
    for s in space.strategies:
        val = math.fsum(matrix[:, list(s.channels)].ravel())
        if val > best_val:
            best, best_val = s.id, val
    return best, best_val - c0


def test_zero_matrix_tie_break():
    space = enumerate_strategies(5, 3)
    s, u = best_fixed(np.zeros((7, 5)), space, 0.09)
    assert space.strategies[s].channels == (0, 1, 2)
    assert u == -0.09


def test_worked_example_k3():
    space = enumerate_strategies(3, 2)
    matrix = np.array([[0.3, 0.3, 0.0], [0.0, 0.3, 0.3]])
    s, u = best_fixed(matrix, space, 0.0)
    assert space.strategies[s].channels == (0, 1)
    assert u == pytest.approx(0.9)
    assert (s, u) == exhaustive_best(matrix, space, 0.0)


def test_matches_exhaustive_search():
    rng = np.random.default_rng(11)
    for _ in range(200):
        K = int(rng.integers(1, 7))
        l = int(rng.integers(1, min(K, 3) + 1))
        T = int(rng.integers(1, 51))
        r = float(rng.uniform(0.01, 1 / l))
        density = rng.uniform(0, 1)
        matrix = np.where(rng.random((T, K)) < density, r, 0.0)
        space = enumerate_strategies(K, l)
        assert best_fixed(matrix, space, 0.06) == exhaustive_best(matrix, space, 0.06)


def make_trace(space, chosen, tau, matrix, unit):
    T = matrix.shape[0]
    held = np.repeat(chosen, tau)[:T]
    reward = np.array([matrix[t, list(space.strategies[s].channels)].sum() for t, s in enumerate(held)])
    costs = [unit * space.l]
    for a, b in zip(chosen, chosen[1:]):
        costs.append(switching_cost(space.strategies[a], space.strategies[b], unit))
    return RunTrace(np.array(chosen), np.array(costs), reward, matrix, tau)


def test_regret_zero_when_playing_best():
    space = enumerate_strategies(3, 2)
    matrix = np.array([[0.3, 0.3, 0.0], [0.0, 0.3, 0.3]])
    best = space.id_of((0, 1))
    rep = regret_report(make_trace(space, [best, best], 1, matrix, 0.03), space, 0.06)
    assert rep.weak_regret == pytest.approx(0.0, abs=1e-12)


def test_regret_zero_rewards_switching():
    space = enumerate_strategies(4, 2)
    matrix = np.zeros((6, 4))
    rep = regret_report(make_trace(space, [0, 5, 0], 2, matrix, 0.03), space, 0.06)
    assert rep.weak_regret == pytest.approx(rep.L_alg - 0.06)
    assert rep.L_alg == pytest.approx(0.06 + 0.06 + 0.06)
    assert rep.first_detection_slot is None


def test_regret_worked_example():
    space = enumerate_strategies(3, 2)
    matrix = np.array([[0.3, 0.3, 0.0], [0.0, 0.3, 0.3]])
    s = space.id_of((0, 2))
    c0 = 0.06
    rep = regret_report(make_trace(space, [s, s], 1, matrix, 0.03), space, c0)
    assert rep.G_alg == pytest.approx(0.6)
    assert rep.weak_regret == pytest.approx((0.9 - c0) - (0.6 - c0))
    assert rep.weak_regret == rep.U_best - rep.U_alg
    assert rep.U_best == rep.G_best - c0
    assert rep.first_detection_slot == 1
    assert rep.normalized_regret == rep.weak_regret / 2


def test_accounting_identity_recomputed():
    rng = np.random.default_rng(3)
    space = enumerate_strategies(5, 2)
    matrix = np.where(rng.random((40, 5)) < 0.3, 0.3, 0.0)
    chosen = list(rng.integers(0, space.S, size=10))
    trace = make_trace(space, chosen, 4, matrix, 0.03)
    rep = regret_report(trace, space, 0.06)
    held = np.repeat(chosen, 4)
    g = sum(matrix[t, list(space.strategies[s].channels)].sum() for t, s in enumerate(held))
    L = 0.06 + sum(0.03 * (2 - len(set(space.strategies[a].channels) & set(space.strategies[b].channels)))
                   for a, b in zip(chosen, chosen[1:]))
    assert rep.U_alg == pytest.approx(g - L, abs=1e-12)


def _report(R=1.0, U=2.0, fd=None):
    return RegretReport(3.0, 1.0, U, 0, 4.0, 3.9, R, R / 10, fd)


def test_aggregate_singleton():
    s = aggregate([_report(fd=5)])
    assert s.mean["weak_regret"] == 1.0
    assert all(v == 0 for v in s.std.values())


def test_aggregate_cdf():
    s = aggregate([_report(fd=f) for f in (1, 1, 3, 7)])
    assert s.cdf == [(1, 0.5), (3, 0.75), (7, 1.0)]
    assert s.never_detected == 0
    assert s.quantile(0.5) == 1
    assert s.quantile(0.6) == 3


def test_aggregate_never_detected():
    s = aggregate([_report(fd=2), _report(fd=None)])
    assert s.cdf == [(2, 0.5)]
    assert s.never_detected == 0.5
    assert s.quantile(0.9) is None


def test_aggregate_identical_reports():
    s = aggregate([_report(R=0.1 * 3, U=1 / 3, fd=4)] * 100)
    assert all(v == 0 for v in s.std.values())


def test_aggregate_empty():
    with pytest.raises(ValueError):
        aggregate([])
