import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorafair.metrics import aggregate_energy, bin_by_distance, build_report, der, jain_index


def test_der():
    assert der(3, 4) == 0.75
    assert der(0, 0) == 0.0
    with pytest.raises(AssertionError):
        der(5, 4)


def test_jain_examples():
    assert jain_index([1, 1, 1]) == pytest.approx(1.0)
    assert jain_index([1, 0, 0, 0]) == pytest.approx(0.25)
    with pytest.warns(RuntimeWarning):
        assert jain_index([0, 0]) == 1.0


@given(st.lists(st.floats(0, 1), min_size=1, max_size=100).filter(lambda x: sum(v * v for v in x) > 0))
def test_jain_bounds(x):
    j = jain_index(x)
    assert 1 / len(x) - 1e-9 <= j <= 1 + 1e-9


@given(st.lists(st.floats(0.01, 1), min_size=1, max_size=50), st.floats(0.1, 10))
def test_jain_scale_invariant(x, k):
    assert jain_index([k * v for v in x]) == pytest.approx(jain_index(x))


def make_report():
    return build_report(
        sent=[10, 10, 0, 4],
        delivered=[10, 5, 0, 1],
        sf=[7, 8, 9, 12],
        distance=[50.0, 150.0, 160.0, 420.0],
        node_energy=[1.0, 2.0, 0.0, 3.5],
        outcome_counts={"delivered": 16, "lost_same_sf": 8},
        bin_width=100.0,
    )


def test_report_metrics():
    rep = make_report()
    assert rep.overall_der == pytest.approx(16 / 24)
    assert rep.mean_node_der == pytest.approx((1 + 0.5 + 0.25) / 3)
    assert rep.jain == pytest.approx(jain_index([1, 0.5, 0.25]))
    assert rep.jain_without_sf7 == pytest.approx(jain_index([0.5, 0.25]))
    per_sf = rep.per_sf_der
    assert per_sf[7] == 1.0 and per_sf[12] == 0.25 and math.isnan(per_sf[10])
    assert math.isnan(per_sf[9])


def test_distance_bins_and_energy():
    rep = make_report()
    assert bin_by_distance(rep, 100.0) == {0.0: 1.0, 100.0: 0.5, 400.0: 0.25}
    assert rep.distance_bins() == bin_by_distance(rep, 100.0)
    total, per_node = aggregate_energy(rep)
    assert total == pytest.approx(6.5)
    per_node[0] = 99.0
    assert rep.node_energy[0] == 1.0
    with pytest.raises(ValueError):
        bin_by_distance(rep, 0.0)


def test_report_rejects_impossible_counts():
    with pytest.raises(AssertionError):
        build_report([1], [2], [7], [1.0], [0.0], {}, 10.0)
