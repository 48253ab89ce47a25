import itertools

import pytest
from hypothesis import given, strategies as st

from specmon.core import (
    ConfigError,
    SimConfig,
    enumerate_strategies,
    first_slot_cost,
    switching_cost,
)


def pascal(n, k):
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row[k]


def test_enumerate_k4_l2():
    space = enumerate_strategies(4, 2)
    assert space.S == 6
    assert [s.channels for s in space.strategies] == [
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert [s.id for s in space.strategies] == list(range(6))


def test_enumerate_sizes():
    assert enumerate_strategies(10, 2).S == 45
    full = enumerate_strategies(5, 5)
    assert full.S == 1
    assert full.strategies[0].channels == (0, 1, 2, 3, 4)


@pytest.mark.parametrize("K,l", [(3, 4), (3, 0), (0, 0)])
def test_enumerate_rejects_bad_dimensions(K, l):
    with pytest.raises(ConfigError):
        enumerate_strategies(K, l)


def test_enumerate_overflow():
    with pytest.raises(OverflowError):
        enumerate_strategies(40, 20)


@pytest.mark.parametrize("K", range(1, 13))
def test_sizes_and_incidence_match_pascal(K):
    for l in range(1, K + 1):
        space = enumerate_strategies(K, l)
        assert space.S == pascal(K, l)
        total = 0
        for k in range(K):
            ids = space.incidence[k]
            assert len(ids) == pascal(K - 1, l - 1)
            assert all(k in space.strategies[s] for s in ids)
            total += len(ids)
        assert total == space.S * l


def test_id_of_roundtrip():
    space = enumerate_strategies(6, 3)
    for s in space.strategies:
        assert space.id_of(reversed(s.channels)) == s.id


def _strategy(space, *channels):
    return space.strategies[space.id_of(channels)]


def test_switching_cost_examples():
    space = enumerate_strategies(10, 2)
    a = _strategy(space, 1, 3)
    assert switching_cost(a, a, 0.03) == 0
    assert switching_cost(a, _strategy(space, 1, 6), 0.03) == pytest.approx(0.03)
    assert switching_cost(a, _strategy(space, 6, 8), 0.03) == pytest.approx(0.06)


@given(st.data())
def test_switching_cost_symmetric_and_triangle(data):
    K = data.draw(st.integers(2, 8))
    l = data.draw(st.integers(1, K))
    space = enumerate_strategies(K, l)
    a, b, c = (space.strategies[data.draw(st.integers(0, space.S - 1))] for _ in range(3))
    unit = data.draw(st.floats(0, 1 / l))
    assert switching_cost(a, b, unit) == switching_cost(b, a, unit)
    assert switching_cost(a, c, unit) <= switching_cost(a, b, unit) + switching_cost(b, c, unit) + 1e-12
    assert 0 <= switching_cost(a, b, unit) <= unit * l + 1e-12


@pytest.mark.parametrize("unit,l,expected", [(0.03, 2, 0.06), (0, 2, 0), (0.05, 4, 0.20)])
def test_first_slot_cost(unit, l, expected):
    cfg = SimConfig(K=10, l=l, r=0.2, unit_switch_cost=unit)
    assert first_slot_cost(cfg) == pytest.approx(expected)


@pytest.mark.parametrize("kwargs", [
    dict(l=4, r=0.3),                 # r*l > 1
    dict(l=2, unit_switch_cost=0.6),  # cost*l > 1
    dict(l=11),
    dict(T=0),
    dict(delta=1.0),
    dict(p_d=1.5),
    dict(M=-1),
    dict(r=0),
])
def test_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs)


def test_config_defaults_are_reference_setup():
    cfg = SimConfig()
    assert (cfg.K, cfg.l, cfg.r, cfg.unit_switch_cost, cfg.p_d, cfg.T, cfg.M, cfg.delta) == (
        10, 2, 0.3, 0.03, 0.9, 50000, 2, 0.5)


def test_space_mask_matches_members():
    space = enumerate_strategies(5, 2)
    mask = space.mask()
    for s, chans in enumerate(itertools.combinations(range(5), 2)):
        assert set(mask[s].nonzero()[0]) == set(chans)
