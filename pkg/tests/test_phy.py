import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorafair.phy import (
    DEFAULT_ENERGY_PROFILE,
    CirMatrix,
    EnergyProfile,
    SensitivityModel,
    TxParams,
    airtime,
    bit_rate,
    tx_energy,
)

SF = st.integers(7, 12)
BW = st.sampled_from([125_000, 250_000, 500_000])
CR = st.integers(1, 4)


def semtech_airtime(sf, bw, cr, pl, preamble=8, header=True, crc=True):
    # written out long-hand from the SX127x datasheet, kept apart from the package code
    t_sym = (2**sf) / bw
    de = 1 if (bw == 125_000 and sf >= 11) else 0
    ih = 0 if header else 1
    num = 8 * pl - 4 * sf + 28 + (16 if crc else 0) - 20 * ih
    n_payload = 8 + max(math.ceil(num / (4 * (sf - 2 * de))) * (cr + 4), 0)
    return (preamble + 4.25) * t_sym + n_payload * t_sym


def test_bit_rate_values():
    assert bit_rate(TxParams(7)) == pytest.approx(5468.75)
    assert bit_rate(TxParams(12)) == pytest.approx(292.96875)
    assert bit_rate(TxParams(12, cr=4)) == pytest.approx(183.10546875)
    assert bit_rate(TxParams(8, 500_000)) == pytest.approx(4 * bit_rate(TxParams(8)))


def test_airtime_reference_points():
    assert airtime(TxParams(7), 80) == pytest.approx(0.143616, abs=1e-9)
    assert airtime(TxParams(7, 500_000), 80) == pytest.approx(0.035904, abs=1e-9)
    assert airtime(TxParams(12), 80) == pytest.approx(semtech_airtime(12, 125_000, 1, 80))


@given(SF, BW, CR, st.integers(1, 255))
def test_airtime_matches_oracle(sf, bw, cr, pl):
    assert airtime(TxParams(sf, bw, cr), pl) == pytest.approx(semtech_airtime(sf, bw, cr, pl), rel=1e-12)


@given(SF, BW, CR, st.integers(1, 254))
def test_airtime_non_decreasing_in_payload(sf, bw, cr, pl):
    p = TxParams(sf, bw, cr)
    assert airtime(p, pl + 1) >= airtime(p, pl)


@given(st.integers(7, 11), BW, st.integers(1, 255))
def test_airtime_grows_with_sf(sf, bw, pl):
    assert airtime(TxParams(sf + 1, bw), pl) > airtime(TxParams(sf, bw), pl)


def test_airtime_rejects_bad_payload():
    for pl in (0, 256):
        with pytest.raises(ValueError):
            airtime(TxParams(), pl)


@pytest.mark.parametrize("kw", [dict(sf=6), dict(sf=13), dict(bw=200_000), dict(cr=0), dict(tp=1), dict(tp=15)])
def test_txparams_validation(kw):
    with pytest.raises(ValueError):
        TxParams(**kw)


def test_energy_increases_with_power_and_time():
    a = airtime(TxParams(9), 80)
    es = [tx_energy(a, tp) for tp in range(2, 15)]
    assert all(x < y for x, y in zip(es, es[1:]))
    assert tx_energy(2 * a, 14) == pytest.approx(2 * tx_energy(a, 14))


def test_energy_unknown_level():
    with pytest.raises(ValueError):
        tx_energy(0.1, 20)


def test_energy_profile_must_be_monotone():
    draw = dict(DEFAULT_ENERGY_PROFILE.tx_draw)
    draw[8], draw[9] = draw[9], draw[8]
    with pytest.raises(ValueError):
        EnergyProfile(draw)


def test_sensitivity_modes():
    assert SensitivityModel()(12, 125_000) == -155.0
    table = SensitivityModel(mode="table")
    assert table(7, 125_000) == -123.0
    assert table(12, 125_000) < table(7, 125_000)
    assert table(7, 500_000) > table(7, 125_000)
    assert table.decodable(-123.0, 7, 125_000)
    assert not table.decodable(-123.1, 7, 125_000)


def test_cir_matrix():
    m = CirMatrix.uniform(6.0)
    assert m(7, 12) == 6.0 and m.min == 6.0
    with pytest.raises(ValueError):
        CirMatrix.uniform(0.0)
    with pytest.raises(ValueError):
        m.thresholds[0, 0] = 1.0
