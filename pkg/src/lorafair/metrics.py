"""Data extraction rate, Jain fairness and energy aggregation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np


def der(delivered: int, sent: int) -> float:
    """Delivered over sent packets; 0.0 for a node that sent nothing."""
    if sent < 0 or delivered < 0:
        raise ValueError("packet counts must be non-negative")
    if delivered > sent:
        raise AssertionError(f"delivered ({delivered}) exceeds sent ({sent})")
    return delivered / sent if sent else 0.0


def jain_index(ders) -> float:
    """Jain's fairness index of per-node DERs.

    An all-zero vector is treated as perfectly (if uselessly) fair and yields 1
    with a warning.
    """
    x = np.asarray(ders, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one value")
    sq = float(np.sum(x * x))
    if sq == 0.0:
        warnings.warn("all DERs are zero; fairness index set to 1", RuntimeWarning, stacklevel=2)
        return 1.0
    return float(np.sum(x)) ** 2 / (x.size * sq)


@dataclass
class MetricsReport:
    sent: np.ndarray
    delivered: np.ndarray
    sf: np.ndarray
    distance: np.ndarray
    node_energy: np.ndarray
    outcome_counts: dict[str, int]
    bin_width: float
    node_der: np.ndarray = field(init=False)
    active: np.ndarray = field(init=False)

    def __post_init__(self):
        if np.any(self.delivered > self.sent):
            raise AssertionError("a node delivered more packets than it sent")
        self.active = self.sent > 0
        self.node_der = np.divide(
            self.delivered, self.sent, out=np.zeros(len(self.sent)), where=self.active
        )

    @property
    def overall_der(self) -> float:
        """Packet ratio over the whole cell."""
        total = int(self.sent.sum())
        return float(self.delivered.sum()) / total if total else 0.0

    @property
    def mean_node_der(self) -> float:
        return float(self.node_der[self.active].mean()) if self.active.any() else 0.0

    @property
    def jain(self) -> float:
        """Fairness over nodes that sent at least one packet."""
        return jain_index(self.node_der[self.active]) if self.active.any() else 1.0

    @property
    def jain_without_sf7(self) -> float:
        keep = self.active & (self.sf != 7)
        return jain_index(self.node_der[keep]) if keep.any() else 1.0

    @property
    def per_sf_der(self) -> dict[int, float]:
        out = {}
        for sf in range(7, 13):
            mask = self.sf == sf
            sent = int(self.sent[mask].sum())
            out[sf] = float(self.delivered[mask].sum()) / sent if sent else math.nan
        return out

    @property
    def energy_total(self) -> float:
        return float(self.node_energy.sum())

    def distance_bins(self, bin_width: float | None = None) -> dict[float, float]:
        return bin_by_distance(self, bin_width or self.bin_width)


def build_report(sent, delivered, sf, distance, node_energy, outcome_counts, bin_width) -> MetricsReport:
    return MetricsReport(
        sent=np.asarray(sent, dtype=int),
        delivered=np.asarray(delivered, dtype=int),
        sf=np.asarray(sf, dtype=int),
        distance=np.asarray(distance, dtype=float),
        node_energy=np.asarray(node_energy, dtype=float),
        outcome_counts=dict(outcome_counts),
        bin_width=float(bin_width),
    )


def bin_by_distance(report: MetricsReport, bin_width: float) -> dict[float, float]:
    """Mean node DER per distance bin ``[k*w, (k+1)*w)``, keyed by the bin's lower edge."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    idx = np.floor(report.distance / bin_width).astype(int)
    out = {}
    for k in np.unique(idx[report.active]):
        mask = report.active & (idx == k)
        out[float(k * bin_width)] = float(report.node_der[mask].mean())
    return out


def aggregate_energy(report: MetricsReport) -> tuple[float, np.ndarray]:
    """Total and per-node transmit energy in joules, lost packets included."""
    return report.energy_total, report.node_energy.copy()
