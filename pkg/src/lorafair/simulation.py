"""Discrete-event Aloha uplink simulation for one gateway."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Iterator, Mapping, Sequence

import numpy as np

from .allocation import DEFAULT_DEPLOYMENT, LORAWAN_POW_LEVELS, NodeReport, parse_strategy
from .channel import DISTRIBUTIONS, Position, PropagationConfig, path_loss, place_nodes
from .metrics import MetricsReport, build_report
from .phy import (
    DEFAULT_CF,
    DEFAULT_ENERGY_PROFILE,
    MAX_TP,
    CirMatrix,
    EnergyProfile,
    SensitivityModel,
    TxParams,
    airtime,
    tx_energy,
)


class ConfigError(ValueError):
    """Invalid scenario or experiment configuration."""


class Outcome(IntEnum):
    DELIVERED = 0
    LOST_SAME_SF = 1
    LOST_CROSS_SF = 2
    LOST_DEMOD_LIMIT = 3
    LOST_SENSITIVITY = 4

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Scenario:
    n_nodes: int = 1000
    radius: float = 1000.0
    distribution: str = "uniform"
    placement: str = "area"
    packet_len: int = 80
    mean_interval: float = 60.0
    max_recv: int = 8
    channels: tuple[int, ...] = (DEFAULT_CF,)
    sim_time: float = 7200.0
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    strategy: str = "fadr-one-region"
    perfect_orthogonality: bool = False
    capture_enabled: bool = True
    propagation: PropagationConfig = PropagationConfig()
    cir: CirMatrix = field(default_factory=CirMatrix)
    pow_levels: tuple[int, ...] = LORAWAN_POW_LEVELS
    sensitivity: SensitivityModel = SensitivityModel()
    deployed: tuple[tuple[int, int, int], ...] = DEFAULT_DEPLOYMENT
    bw_weighting: str = "linear"
    initial_tp: int = MAX_TP
    warmup_packets: int = 20
    energy: EnergyProfile = DEFAULT_ENERGY_PROFILE
    bin_width: float | None = None

    def __post_init__(self):
        checks = [
            (self.n_nodes >= 1, "n_nodes must be >= 1"),
            (self.radius > 0, "radius must be positive"),
            (self.distribution in DISTRIBUTIONS, f"unknown distribution {self.distribution!r}"),
            (self.placement in ("area", "radius"), f"unknown placement {self.placement!r}"),
            (1 <= self.packet_len <= 255, "packet_len must be in 1..255"),
            (self.mean_interval > 0, "mean_interval must be positive"),
            (self.max_recv >= 1, "max_recv must be >= 1"),
            (len(self.channels) >= 1, "at least one channel is required"),
            (self.sim_time > 0, "sim_time must be positive"),
            (len(self.seeds) >= 1, "at least one seed is required"),
            (self.warmup_packets >= 1, "warmup_packets must be >= 1"),
            (self.bin_width is None or self.bin_width > 0, "bin_width must be positive"),
            (all(2 <= p <= 14 for p in self.pow_levels), "power levels must lie in [2, 14] dBm"),
            (2 <= self.initial_tp <= 14, "initial_tp must lie in [2, 14] dBm"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            parse_strategy(self.strategy)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class Transmission:
    node: int
    start: float
    end: float
    params: TxParams
    rx_power: float
    outcome: Outcome | None = None


def generate_traffic(
    mean_interval: float, sim_time: float, rng: np.random.Generator, airtime_s: float = 0.0
) -> np.ndarray:
    """Start times of one node's packets: exponential gaps, never self-overlapping."""
    if mean_interval <= 0:
        raise ValueError("mean_interval must be positive")
    chunk = max(16, int(1.2 * sim_time / mean_interval) + 16)
    starts: list[np.ndarray] = []
    t = 0.0
    first = True
    while True:
        gaps = rng.exponential(mean_interval, size=chunk)
        if not first:
            gaps[0] = max(gaps[0], airtime_s)
        gaps[1:] = np.maximum(gaps[1:], airtime_s)
        block = t + np.cumsum(gaps)
        inside = block[block < sim_time]
        starts.append(inside)
        if len(inside) < chunk:
            break
        t, first = float(block[-1]), False
    return np.concatenate(starts)


def _resolve(start, end, node, sf, bw, chan, power, decodable, cir, perfect_orthogonality, capture_enabled, max_recv):
    """Outcome code per packet. Arrays are plain sequences aligned by packet."""
    n = len(start)
    order = sorted(range(n), key=lambda k: (start[k], node[k]))
    same = bytearray(n)
    cross = bytearray(n)
    outcome = [0] * n
    active: list[int] = []
    demod: list[int] = []
    for i in order:
        s = start[i]
        if not decodable[i]:
            outcome[i] = Outcome.LOST_SENSITIVITY
        else:
            demod = [k for k in demod if end[k] > s]
            if len(demod) >= max_recv:
                outcome[i] = Outcome.LOST_DEMOD_LIMIT
            else:
                demod.append(i)
        sf_i, p_i, c_i, b_i = sf[i], power[i], chan[i], bw[i]
        row = cir[sf_i - 7]
        still_on = []
        for k in active:
            if end[k] <= s:
                continue
            still_on.append(k)
            if chan[k] != c_i or bw[k] != b_i:
                continue
            sf_k = sf[k]
            if sf_k == sf_i:
                if not capture_enabled:
                    same[i] = same[k] = 1
                    continue
                d = p_i - power[k]
                thr = row[sf_i - 7]
                if d >= thr:
                    same[k] = 1
                elif -d >= thr:
                    same[i] = 1
                else:
                    same[i] = same[k] = 1
            elif not perfect_orthogonality:
                if power[k] - p_i > row[sf_k - 7]:
                    cross[i] = 1
                if p_i - power[k] > cir[sf_k - 7][sf_i - 7]:
                    cross[k] = 1
        still_on.append(i)
        active = still_on
    for i in range(n):
        if outcome[i] == 0:
            if same[i]:
                outcome[i] = Outcome.LOST_SAME_SF
            elif cross[i]:
                outcome[i] = Outcome.LOST_CROSS_SF
    return outcome


def resolve_receptions(
    transmissions: Sequence[Transmission],
    cir: CirMatrix = CirMatrix(),
    perfect_orthogonality: bool = False,
    capture_enabled: bool = True,
    max_recv: int = 8,
    sensitivity: SensitivityModel = SensitivityModel(),
) -> list[Outcome]:
    """Decide the fate of each transmission and store it on ``outcome``.

    Two frames interact when they overlap in time on the same carrier and
    bandwidth. Same-SF frames survive only by the capture margin; cross-SF
    frames are lost when the interferer is stronger by more than the CIR
    threshold. Below-sensitivity frames are undecodable but still interfere.
    Demodulators are granted first come, first served.
    """
    tx = list(transmissions)
    codes = _resolve(
        [t.start for t in tx],
        [t.end for t in tx],
        [t.node for t in tx],
        [t.params.sf for t in tx],
        [t.params.bw for t in tx],
        [t.params.cf for t in tx],
        [t.rx_power for t in tx],
        [sensitivity.decodable(t.rx_power, t.params.sf, t.params.bw) for t in tx],
        cir.thresholds.tolist(),
        perfect_orthogonality,
        capture_enabled,
        max_recv,
    )
    out = [Outcome(c) for c in codes]
    for t, o in zip(tx, out):
        t.outcome = o
    return out


@dataclass
class RunResult:
    scenario: Scenario
    seed: int
    positions: list[Position]
    path_gain: np.ndarray
    params: list[TxParams]
    sent: np.ndarray
    delivered: np.ndarray
    node_energy: np.ndarray
    packet_node: np.ndarray
    packet_start: np.ndarray
    packet_power: np.ndarray
    packet_outcome: np.ndarray
    report: MetricsReport

    def event_log(self) -> Iterator[str]:
        """Per-packet lines ``time,node,sf,bw,tp,rx_power,outcome`` in time order."""
        yield "time,node,sf,bw,tp,rx_power,outcome"
        order = np.lexsort((self.packet_node, self.packet_start))
        for k in order:
            node = int(self.packet_node[k])
            p = self.params[node]
            yield (
                f"{self.packet_start[k]:.6f},{node},{p.sf},{p.bw},{p.tp},"
                f"{self.packet_power[k]:.2f},{Outcome(self.packet_outcome[k]).label}"
            )


def node_reports(path_gain: Sequence[float], samples: int) -> list[NodeReport]:
    return [NodeReport(i, float(g), samples) for i, g in enumerate(path_gain)]


def run(
    scenario: Scenario,
    seed: int,
    *,
    positions: Sequence[Position] | None = None,
    assignment: Mapping[int, TxParams] | None = None,
    schedule: Mapping[int, Sequence[float]] | None = None,
) -> RunResult:
    """Simulate one scenario with one seed.

    ``positions``, ``assignment`` and ``schedule`` override node placement,
    parameter allocation and packet start times respectively.
    """
    from .estimators import make_allocator

    sc = scenario
    seq = np.random.SeedSequence(seed)
    place_seq, shadow_seq, traffic_seq = seq.spawn(3)
    if positions is None:
        positions = place_nodes(sc.n_nodes, sc.radius, sc.distribution, np.random.default_rng(place_seq), sc.placement)
    positions = list(positions)
    n = len(positions)
    dist = np.array([max(p.distance, 1.0) for p in positions])
    gain = -path_loss(dist, sc.propagation, np.random.default_rng(shadow_seq))
    gain = np.atleast_1d(gain)

    if assignment is None:
        alloc = make_allocator(sc).fit(gain.reshape(-1, 1))
        params = alloc.params_
    else:
        params = [assignment[i] for i in range(n)]
    if len(sc.channels) == 1:
        params = [replace(p, cf=sc.channels[0]) for p in params]
    else:
        # spread nodes over the configured channels round-robin
        params = [replace(p, cf=sc.channels[i % len(sc.channels)]) for i, p in enumerate(params)]

    air = np.array([airtime(p, sc.packet_len) for p in params])
    node_rngs = [np.random.default_rng(s) for s in traffic_seq.spawn(n)]
    starts_per_node = []
    for i in range(n):
        if schedule is not None and i in schedule:
            starts_per_node.append(np.asarray(schedule[i], dtype=float))
        else:
            starts_per_node.append(generate_traffic(sc.mean_interval, sc.sim_time, node_rngs[i], air[i]))
    counts = np.array([len(s) for s in starts_per_node])
    pk_node = np.repeat(np.arange(n), counts)
    pk_start = np.concatenate(starts_per_node) if n else np.empty(0)
    pk_end = pk_start + air[pk_node]
    rx = gain + np.array([p.tp for p in params])
    pk_power = rx[pk_node]
    decodable_node = np.array([sc.sensitivity.decodable(rx[i], p.sf, p.bw) for i, p in enumerate(params)])

    sf = np.array([p.sf for p in params])
    bw = np.array([p.bw for p in params])
    cf = np.array([p.cf for p in params])
    codes = _resolve(
        pk_start.tolist(),
        pk_end.tolist(),
        pk_node.tolist(),
        sf[pk_node].tolist(),
        bw[pk_node].tolist(),
        cf[pk_node].tolist(),
        pk_power.tolist(),
        decodable_node[pk_node].tolist(),
        sc.cir.thresholds.tolist(),
        sc.perfect_orthogonality,
        sc.capture_enabled,
        sc.max_recv,
    )
    outcome = np.array(codes, dtype=np.int8)
    delivered = np.bincount(pk_node[outcome == Outcome.DELIVERED], minlength=n)
    per_packet_j = np.array([tx_energy(air[i], params[i].tp, sc.energy) for i in range(n)])
    node_energy = counts * per_packet_j
    losses = {o.label: int(np.sum(outcome == o)) for o in Outcome}
    report = build_report(
        sent=counts,
        delivered=delivered,
        sf=sf,
        distance=dist,
        node_energy=node_energy,
        outcome_counts=losses,
        bin_width=sc.bin_width or sc.radius / 20,
    )
    return RunResult(
        scenario=sc,
        seed=seed,
        positions=positions,
        path_gain=gain,
        params=params,
        sent=counts,
        delivered=delivered,
        node_energy=node_energy,
        packet_node=pk_node,
        packet_start=pk_start,
        packet_power=pk_power,
        packet_outcome=outcome,
        report=report,
    )
