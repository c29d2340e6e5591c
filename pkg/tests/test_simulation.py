import math
from dataclasses import replace

import numpy as np
import pytest

from lorafair.channel import Position
from lorafair.phy import CirMatrix, SensitivityModel, TxParams
from lorafair.simulation import ConfigError, Outcome, Scenario, Transmission, generate_traffic, resolve_receptions, run


def tx(node, start, sf=7, power=-100.0, dur=1.0, bw=125_000, cf=868_000_000):
    return Transmission(node, start, start + dur, TxParams(sf, bw, cf=cf), power)


def outcomes(txs, **kw):
    resolve_receptions(txs, **kw)
    return [t.outcome for t in txs]


def test_traffic_rate():
    starts = generate_traffic(5.0, 7200.0, np.random.default_rng(0), airtime_s=0.1)
    assert abs(len(starts) - 1440) <= 3 * math.sqrt(1440)
    assert np.all(np.diff(starts) >= 0.1 - 1e-9)
    assert starts.max() < 7200.0


def test_no_overlap_no_loss():
    assert outcomes([tx(0, 0.0), tx(1, 2.0)]) == [Outcome.DELIVERED] * 2


def test_same_sf_capture():
    assert outcomes([tx(0, 0.0, power=-90), tx(1, 0.5, power=-100)]) == [Outcome.DELIVERED, Outcome.LOST_SAME_SF]
    assert outcomes([tx(0, 0.0, power=-96), tx(1, 0.5, power=-100)]) == [Outcome.LOST_SAME_SF] * 2
    no_capture = outcomes([tx(0, 0.0, power=-90), tx(1, 0.5, power=-100)], capture_enabled=False)
    assert no_capture == [Outcome.LOST_SAME_SF] * 2


def test_cross_sf_interference():
    txs = [tx(0, 0.0, sf=7, power=-110), tx(1, 0.2, sf=9, power=-100)]
    assert outcomes(txs) == [Outcome.LOST_CROSS_SF, Outcome.DELIVERED]
    assert outcomes(txs, perfect_orthogonality=True) == [Outcome.DELIVERED] * 2
    close = [tx(0, 0.0, sf=7, power=-104), tx(1, 0.2, sf=9, power=-100)]
    assert outcomes(close) == [Outcome.DELIVERED] * 2


def test_channel_and_bandwidth_separate():
    txs = [tx(0, 0.0, power=-100), tx(1, 0.1, power=-100, cf=868_300_000), tx(2, 0.2, power=-100, bw=250_000)]
    assert outcomes(txs) == [Outcome.DELIVERED] * 3


def test_demodulator_limit():
    txs = [tx(i, 0.1 * i, sf=7 + i % 6, power=-100) for i in range(4)]
    got = outcomes(txs, max_recv=2, perfect_orthogonality=True)
    assert got == [Outcome.DELIVERED] * 2 + [Outcome.LOST_DEMOD_LIMIT] * 2


def test_below_sensitivity():
    table = SensitivityModel(mode="table")
    assert outcomes([tx(0, 0.0, power=-130)], sensitivity=table) == [Outcome.LOST_SENSITIVITY]


def test_touching_packets_do_not_collide():
    assert outcomes([tx(0, 0.0), tx(1, 1.0)]) == [Outcome.DELIVERED] * 2


SMALL = Scenario(n_nodes=150, sim_time=900.0, seeds=(1,))


@pytest.mark.parametrize("strategy", ["fadr-one-region", "fadr-region:50", "equal-sf", "adelantado", "reynders", "sn5"])
def test_outcomes_partition_packets(strategy):
    res = run(replace(SMALL, strategy=strategy), 1)
    counts = res.report.outcome_counts
    assert sum(counts.values()) == len(res.packet_outcome) == res.sent.sum()
    assert counts["delivered"] == res.delivered.sum()
    assert np.all(res.delivered <= res.sent)


def test_single_node_always_delivers():
    sc = Scenario(n_nodes=1, sim_time=3600.0, mean_interval=10.0)
    res = run(sc, 4)
    assert res.sent[0] > 100
    assert res.report.overall_der == 1.0


def test_forced_collision_below_cir():
    sc = Scenario(n_nodes=2, sim_time=100.0, strategy="equal-sf")
    pos = [Position(100.0, 0.0), Position(0.0, 102.0)]
    same = {0: TxParams(9, tp=14), 1: TxParams(9, tp=14)}
    res = run(sc, 1, positions=pos, assignment=same, schedule={0: [10.0], 1: [10.05]})
    assert list(res.delivered) == [0, 0]
    assert res.report.outcome_counts["lost_same_sf"] == 2
    with pytest.warns(RuntimeWarning):
        assert res.report.jain == 1.0


def test_removing_other_sfs_does_not_matter_when_orthogonal():
    sc = Scenario(n_nodes=300, sim_time=1200.0, perfect_orthogonality=True, max_recv=10_000, strategy="equal-sf")
    full = run(sc, 2)
    keep = [i for i, p in enumerate(full.params) if p.sf == 9]
    pos = [full.positions[i] for i in keep]
    assign = {k: full.params[i] for k, i in enumerate(keep)}
    sched = {k: full.packet_start[full.packet_node == i] for k, i in enumerate(keep)}
    alone = run(replace(sc, n_nodes=len(keep)), 2, positions=pos, assignment=assign, schedule=sched)
    assert list(alone.delivered) == [int(full.delivered[i]) for i in keep]


def test_run_is_deterministic():
    a, b = run(SMALL, 7), run(SMALL, 7)
    assert list(a.event_log()) == list(b.event_log())
    assert list(a.event_log()) != list(run(SMALL, 8).event_log())


def test_event_log_format():
    lines = list(run(Scenario(n_nodes=3, sim_time=120.0), 1).event_log())
    assert lines[0] == "time,node,sf,bw,tp,rx_power,outcome"
    assert all(len(line.split(",")) == 7 for line in lines)


def test_energy_counts_lost_packets():
    res = run(SMALL, 3)
    assert res.report.energy_total > 0
    assert np.all((res.node_energy > 0) == (res.sent > 0))


@pytest.mark.parametrize(
    "kw",
    [dict(n_nodes=0), dict(radius=-1.0), dict(strategy="aloha"), dict(max_recv=0), dict(seeds=()), dict(distribution="ring")],
)
def test_scenario_validation(kw):
    with pytest.raises(ConfigError):
        Scenario(**kw)


def test_multi_channel_spreads_nodes():
    sc = Scenario(n_nodes=30, sim_time=60.0, channels=(868_100_000, 868_300_000, 868_500_000))
    res = run(sc, 1)
    assert {p.cf for p in res.params} == set(sc.channels)


def test_cir_matrix_rejects_bad_shape():
    with pytest.raises(ValueError):
        CirMatrix(np.ones((5, 5)))
