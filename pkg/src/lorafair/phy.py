"""LoRa physical-layer quantities: bit rate, airtime, energy, sensitivity, CIR."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

SPREADING_FACTORS = (7, 8, 9, 10, 11, 12)
BANDWIDTHS = (125_000, 250_000, 500_000)
CODING_RATES = (1, 2, 3, 4)
MIN_TP, MAX_TP = 2, 14
MAX_PAYLOAD = 255
DEFAULT_CF = 868_000_000

# SX1276 datasheet receiver sensitivity (dBm), rows SF7..SF12, cols 125/250/500 kHz
SX1276_SENSITIVITY = {
    7: (-123.0, -120.0, -116.0),
    8: (-126.0, -123.0, -119.0),
    9: (-129.0, -125.0, -122.0),
    10: (-132.0, -128.0, -125.0),
    11: (-134.5, -130.0, -128.0),
    12: (-137.0, -133.0, -130.0),
}
SENSITIVITY_FLOOR = -155.0


@dataclass(frozen=True, order=True)
class TxParams:
    """One LoRa transmission parameter combination.

    ``cr`` is the coding-rate index n, i.e. the code rate is 4/(4+n).
    """

    sf: int = 7
    bw: int = 125_000
    cr: int = 1
    tp: int = MAX_TP
    cf: int = DEFAULT_CF

    def __post_init__(self):
        if self.sf not in SPREADING_FACTORS:
            raise ValueError(f"sf must be in 7..12, got {self.sf}")
        if self.bw not in BANDWIDTHS:
            raise ValueError(f"bw must be one of {BANDWIDTHS}, got {self.bw}")
        if self.cr not in CODING_RATES:
            raise ValueError(f"cr index must be in 1..4, got {self.cr}")
        if not (MIN_TP <= self.tp <= MAX_TP) or int(self.tp) != self.tp:
            raise ValueError(f"tp must be an integer in [2, 14], got {self.tp}")

    @property
    def code_rate(self) -> float:
        return 4.0 / (4 + self.cr)

    @property
    def ldro(self) -> bool:
        return low_data_rate_optimize(self.sf, self.bw)


@dataclass(frozen=True)
class CirMatrix:
    """Co-channel rejection thresholds, indexed ``[sf_signal - 7, sf_interferer - 7]``."""

    thresholds: np.ndarray = field(default_factory=lambda: np.full((6, 6), 6.0))

    def __post_init__(self):
        t = np.array(self.thresholds, dtype=float)
        if t.shape != (6, 6):
            raise ValueError(f"CIR matrix must be 6x6, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("CIR thresholds must be finite")
        if np.any(np.diag(t) <= 0):
            raise ValueError("same-SF capture thresholds must be positive")
        t.setflags(write=False)
        object.__setattr__(self, "thresholds", t)

    @classmethod
    def uniform(cls, value: float = 6.0) -> "CirMatrix":
        return cls(np.full((6, 6), float(value)))

    def __call__(self, sf_signal: int, sf_interferer: int) -> float:
        return float(self.thresholds[sf_signal - 7, sf_interferer - 7])

    @property
    def min(self) -> float:
        return float(self.thresholds.min())


# Supply draw in mA at 3.3 V for tp = 2..14 dBm, shaped after SX127x RFO figures.
_TX_CURRENT_MA = (22.0, 22.6, 23.3, 24.0, 24.8, 25.7, 26.8, 28.0, 29.5, 31.2, 33.2, 35.6, 38.5)
SUPPLY_VOLTAGE = 3.3


@dataclass(frozen=True)
class EnergyProfile:
    """Electrical power draw (mW) while transmitting, per output power (dBm)."""

    tx_draw: Mapping[int, float] = field(
        default_factory=lambda: {
            tp: SUPPLY_VOLTAGE * ma for tp, ma in zip(range(MIN_TP, MAX_TP + 1), _TX_CURRENT_MA)
        }
    )

    def __post_init__(self):
        missing = [tp for tp in range(MIN_TP, MAX_TP + 1) if tp not in self.tx_draw]
        if missing:
            raise ValueError(f"energy profile lacks tx power levels {missing}")
        values = [self.tx_draw[tp] for tp in range(MIN_TP, MAX_TP + 1)]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("tx draw must strictly increase with tp")


DEFAULT_ENERGY_PROFILE = EnergyProfile()


def bit_rate(p: TxParams) -> float:
    """Raw LoRa bit rate in b/s: sf * bw / 2**sf * code_rate."""
    return p.sf * (p.bw / 2**p.sf) * p.code_rate


def low_data_rate_optimize(sf: int, bw: int) -> bool:
    return sf >= 11 and bw == 125_000


def symbol_time(sf: int, bw: int) -> float:
    return 2**sf / bw


def payload_symbols(
    sf: int, cr: int, payload_len: int, explicit_header: bool = True, crc: bool = True, ldro: bool = False
) -> int:
    implicit = 0 if explicit_header else 1
    num = 8 * payload_len - 4 * sf + 28 + 16 * int(crc) - 20 * implicit
    den = 4 * (sf - 2 * int(ldro))
    return 8 + max(math.ceil(num / den) * (cr + 4), 0)


def airtime(
    p: TxParams,
    payload_len: int,
    preamble_syms: int = 8,
    explicit_header: bool = True,
    crc: bool = True,
    ldro: bool | None = None,
) -> float:
    """Time on air (s) of one frame, Semtech calculator formula.

    ``ldro=None`` enables low-data-rate optimisation for SF11/SF12 at 125 kHz.
    """
    if payload_len < 1:
        raise ValueError("payload_len must be >= 1")
    if payload_len > MAX_PAYLOAD:
        raise ValueError(f"payload_len exceeds the LoRa maximum of {MAX_PAYLOAD} bytes")
    if preamble_syms < 6:
        raise ValueError("preamble_syms must be >= 6")
    if ldro is None:
        ldro = p.ldro
    t_sym = symbol_time(p.sf, p.bw)
    n_payload = payload_symbols(p.sf, p.cr, payload_len, explicit_header, crc, ldro)
    return (preamble_syms + 4.25) * t_sym + n_payload * t_sym


def tx_energy(airtime_s: float, tp: int, profile: EnergyProfile = DEFAULT_ENERGY_PROFILE) -> float:
    """Energy in joules spent transmitting for ``airtime_s`` at ``tp`` dBm."""
    try:
        draw = profile.tx_draw[tp]
    except KeyError:
        raise ValueError(f"no power draw configured for tp={tp} dBm") from None
    return airtime_s * draw / 1000.0


@dataclass(frozen=True)
class SensitivityModel:
    """Receiver sensitivity lookup.

    ``mode="floor"`` returns ``floor`` for every combination; ``mode="table"``
    uses the SX1276 datasheet table.
    """

    mode: str = "floor"
    floor: float = SENSITIVITY_FLOOR

    def __post_init__(self):
        if self.mode not in ("floor", "table"):
            raise ValueError(f"unknown sensitivity mode {self.mode!r}")

    def __call__(self, sf: int, bw: int) -> float:
        if self.mode == "floor":
            return self.floor
        return SX1276_SENSITIVITY[sf][BANDWIDTHS.index(bw)]

    def decodable(self, rx_power: float, sf: int, bw: int) -> bool:
        return rx_power >= self(sf, bw)


def sensitivity(sf: int, bw: int, model: SensitivityModel = SensitivityModel()) -> float:
    return model(sf, bw)
