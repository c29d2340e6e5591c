"""Data-rate and transmit-power allocation strategies for a single LoRaWAN cell.

Path gains are received powers referenced to a 0 dBm transmitter, so adding a
power level in dBm to a path gain yields the power seen at the gateway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

from .phy import (
    BANDWIDTHS,
    DEFAULT_CF,
    MAX_TP,
    SPREADING_FACTORS,
    CirMatrix,
    SensitivityModel,
    TxParams,
    airtime,
    bit_rate,
)

LORAWAN_POW_LEVELS = (2, 5, 8, 11, 14)
DEFAULT_DEPLOYMENT = tuple((sf, 125_000, 1) for sf in SPREADING_FACTORS)
MIN_REGION_SIZE = 50
ADELANTADO_SF12_SHARE = 0.28
STRATEGIES = ("fadr-one-region", "fadr-region:<size>", "equal-sf", "adelantado", "reynders", "sn5")


class Rate(NamedTuple):
    sf: int
    bw: int = 125_000
    cr: int = 1

    @property
    def bit_rate(self) -> float:
        return bit_rate(TxParams(self.sf, self.bw, self.cr))


@dataclass(frozen=True)
class NodeReport:
    """Averaged uplink measurement for one node.

    ``path_gain`` is the mean RSSI minus the common transmit power used while
    the samples were collected.
    """

    node_id: int
    path_gain: float
    sample_count: int = 1

    def __post_init__(self):
        if not math.isfinite(self.path_gain):
            raise ValueError(f"node {self.node_id}: path gain must be finite")
        if self.sample_count < 1:
            raise ValueError(f"node {self.node_id}: sample_count must be >= 1")


def _by_strength(nodes: Iterable[NodeReport]) -> list[NodeReport]:
    return sorted(nodes, key=lambda r: (-r.path_gain, r.node_id))


# -- fair ratios ----------------------------------------------------------------


def fair_sf_ratios() -> dict[int, float]:
    """Share of nodes per spreading factor that equalises collision probability."""
    weights = {sf: sf / 2**sf for sf in SPREADING_FACTORS}
    total = sum(weights.values())
    return {sf: w / total for sf, w in weights.items()}


def _group(deployed, width: int) -> dict[tuple, list]:
    groups: dict[tuple, list] = {}
    for combo in sorted(set(map(tuple, deployed))):
        if len(combo) != width:
            raise ValueError(f"expected {width}-tuples in the deployment set, got {combo!r}")
        groups.setdefault(combo[:-1], []).append(combo[-1])
    if not groups:
        raise ValueError("deployment set is empty")
    return groups


def fair_sf_bw_ratios(deployed: Iterable[tuple[int, int]], bw_weighting: str = "linear") -> dict[tuple[int, int], float]:
    """Split each SF's fair share across the bandwidths deployed with it.

    Shares are proportional to ``bw`` (``bw_weighting="linear"``) or to ``bw**2``
    (``"squared"``, which yields the 1:4 split of 125/250 kHz).
    """
    if bw_weighting not in ("linear", "squared"):
        raise ValueError(f"unknown bw weighting {bw_weighting!r}")
    power = 1 if bw_weighting == "linear" else 2
    groups = _group(deployed, 2)
    missing = set(SPREADING_FACTORS) - {sf for (sf,) in groups}
    if missing:
        raise ValueError(f"spreading factors {sorted(missing)} are not deployed")
    p_sf = fair_sf_ratios()
    out = {}
    for (sf,), bws in groups.items():
        if any(bw not in BANDWIDTHS for bw in bws):
            raise ValueError(f"invalid bandwidth in {bws}")
        norm = sum(bw**power for bw in bws)
        for bw in bws:
            out[(sf, bw)] = p_sf[sf] * bw**power / norm
    return out


def fair_rate_ratios(deployed: Iterable[tuple[int, int, int]], bw_weighting: str = "linear") -> dict[tuple[int, int, int], float]:
    """Fair share per (sf, bw, cr); ``cr`` is the coding-rate index n of 4/(4+n)."""
    groups = _group(deployed, 3)
    p_sf_bw = fair_sf_bw_ratios(groups.keys(), bw_weighting)
    out = {}
    for (sf, bw), crs in groups.items():
        norm = sum(4.0 / (4 + cr) for cr in crs)
        for cr in crs:
            out[(sf, bw, cr)] = p_sf_bw[(sf, bw)] * (4.0 / (4 + cr)) / norm
    return out


def _as_rate(key: Hashable) -> Rate | None:
    if isinstance(key, int):
        return Rate(key)
    if isinstance(key, tuple) and 1 <= len(key) <= 3:
        return Rate(*key)
    return None


def _slowness(keys: Sequence[Hashable]) -> list:
    """Sort keys for tie-breaking, slowest data rate first."""
    def rank(item):
        pos, key = item
        rate = _as_rate(key)
        return (rate.bit_rate if rate else math.inf, -pos)

    return [key for _, key in sorted(enumerate(keys), key=rank)]


def ratios_to_counts(n: int, ratios: Mapping[Hashable, float]) -> dict[Hashable, int]:
    """Largest-remainder rounding of ``n * ratio``; ties go to slower data rates."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = sum(ratios.values())
    if total <= 0:
        raise ValueError("ratios must have a positive sum")
    exact = {k: n * v / total for k, v in ratios.items()}
    counts = {k: int(math.floor(x + 1e-9)) for k, x in exact.items()}
    left = n - sum(counts.values())
    order = {k: i for i, k in enumerate(_slowness(list(ratios)))}
    by_remainder = sorted(ratios, key=lambda k: (-round(exact[k] - counts[k], 9), order[k]))
    for k in by_remainder[: max(left, 0)]:
        counts[k] += 1
    return {k: counts[k] for k in ratios}


def _ordered_rates(ratios: Mapping[Hashable, float]) -> list[Hashable]:
    # strong nodes get low SF; within an SF, the faster combination first
    return sorted(ratios, key=lambda k: (_as_rate(k).sf, -_as_rate(k).bit_rate))


def _interleave(labels_by_count: list[tuple[Hashable, int]]) -> list[Hashable]:
    slots = []
    for order, (label, count) in enumerate(labels_by_count):
        slots.extend(((i + 0.5) / count, order, label) for i in range(count))
    return [label for *_, label in sorted(slots, key=lambda s: (s[0], s[1]))]


def assign_rates_by_region(
    nodes: Sequence[NodeReport],
    region_size: int | None = None,
    deployed: Iterable[tuple[int, int, int]] = DEFAULT_DEPLOYMENT,
    bw_weighting: str = "linear",
) -> dict[int, Rate]:
    """Allocate SF/BW/CR with the fair ratios inside RSSI-contiguous regions.

    ``region_size=None`` treats the whole cell as one region, in which case the
    slowest rates go to the weakest nodes. Smaller regions interleave the rates
    across each region's RSSI span. The last region absorbs any remainder.
    """
    ranked = _by_strength(nodes)
    n = len(ranked)
    if n == 0:
        raise ValueError("no nodes to allocate")
    if region_size is not None and region_size < MIN_REGION_SIZE:
        raise ValueError(f"region_size must be >= {MIN_REGION_SIZE}")
    ratios = fair_rate_ratios(deployed, bw_weighting)
    rates = _ordered_rates(ratios)

    n_regions = 1 if region_size is None else max(n // region_size, 1)
    bounds = [k * region_size for k in range(n_regions)] + [n] if n_regions > 1 else [0, n]
    out: dict[int, Rate] = {}
    for lo, hi in zip(bounds, bounds[1:]):
        counts = ratios_to_counts(hi - lo, ratios)
        plan = [(r, counts[r]) for r in rates if counts[r] > 0]
        if n_regions == 1:
            labels = [r for r, c in plan for _ in range(c)]
        else:
            labels = _interleave(plan)
        for report, key in zip(ranked[lo:hi], labels):
            out[report.node_id] = _as_rate(key)
    return out


# -- transmit power control -----------------------------------------------------


def _check_levels(pow_levels: Sequence[int]) -> list[int]:
    levels = list(pow_levels)
    if len(levels) < 2:
        raise ValueError("need at least two power levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("power levels must be strictly ascending")
    return levels


def fadr_tp_levels(gains: Sequence[float], pow_levels: Sequence[int], min_cir: float) -> tuple[list[int], int]:
    """Core of the FADR power control on gains sorted strongest first.

    Returns the per-node power levels and the number of node visits made, which
    stays linear in the node count.
    """
    g = list(gains)
    levels = _check_levels(pow_levels)
    n = len(g)
    if n == 0:
        raise ValueError("no nodes to allocate")
    if any(b > a for a, b in zip(g, g[1:])):
        raise ValueError("gains must be sorted strongest first")

    min_power, max_rssi, min_rssi = levels[0], g[0], g[-1]
    candidates = levels[1:]
    max_power = levels[-1]
    for k, level in enumerate(candidates):
        if abs(max_rssi + min_power - min_rssi - level) <= min_cir:
            max_power = level
            candidates = candidates[:k]
            break
    else:
        candidates = candidates[:-1]

    # post-adjustment floor, from the original extremes
    floor = min(min_rssi + max_power, max_rssi + min_power)
    tp: list[int | None] = [None] * n
    visits = 0

    first_free = n
    for i in range(n):
        visits += 1
        if g[i] + min_power < floor:
            first_free = i
            break
        tp[i] = min_power

    max_idx = n
    for i in range(n - 1, first_free - 1, -1):
        visits += 1
        if abs(g[i] + max_power - floor) > min_cir:
            break
        tp[i] = max_power
        max_idx = i
    ref = (g[max_idx] if max_idx < n else min_rssi) + max_power

    j = first_free
    for level in candidates:
        if j >= max_idx:
            break
        visits += 1
        if abs(g[j] + level - floor) > min_cir or abs(g[j] + level - ref) > min_cir:
            continue
        while j < max_idx:
            visits += 1
            if abs(g[j] + level - ref) > min_cir:
                break
            tp[j] = level
            j += 1
    for i in range(j, max_idx):
        tp[i] = max_power
    return tp, visits


def fadr_power_control(
    nodes: Sequence[NodeReport],
    pow_levels: Sequence[int] = LORAWAN_POW_LEVELS,
    cir: CirMatrix = CirMatrix(),
) -> dict[int, int]:
    """Balance received powers so far nodes stay within the CIR margin of near ones."""
    if not nodes:
        raise ValueError("no nodes to allocate")
    ranked = _by_strength(nodes)
    tps, _ = fadr_tp_levels([r.path_gain for r in ranked], pow_levels, cir.min)
    return {r.node_id: tp for r, tp in zip(ranked, tps)}


# -- baselines ------------------------------------------------------------------


def _contiguous(ranked: list[NodeReport], ratios: Mapping[int, float]) -> dict[int, int]:
    counts = ratios_to_counts(len(ranked), ratios)
    sfs = [sf for sf in sorted(ratios) for _ in range(counts[sf])]
    return {r.node_id: sf for r, sf in zip(ranked, sfs)}


def baseline_equal_sf(nodes: Sequence[NodeReport], tp: int = MAX_TP, cf: int = DEFAULT_CF) -> dict[int, TxParams]:
    """N/6 nodes per SF, strongest nodes on SF7."""
    ranked = _by_strength(nodes)
    sfs = _contiguous(ranked, {sf: 1 / 6 for sf in SPREADING_FACTORS})
    return {i: TxParams(sf, tp=tp, cf=cf) for i, sf in sfs.items()}


def baseline_adelantado(nodes: Sequence[NodeReport], tp: int = MAX_TP, cf: int = DEFAULT_CF) -> dict[int, TxParams]:
    """28% of nodes (the weakest) on SF12, the rest evenly over SF7-SF11."""
    ranked = _by_strength(nodes)
    rest = (1 - ADELANTADO_SF12_SHARE) / 5
    ratios = {sf: rest for sf in SPREADING_FACTORS[:-1]} | {12: ADELANTADO_SF12_SHARE}
    sfs = _contiguous(ranked, ratios)
    return {i: TxParams(sf, tp=tp, cf=cf) for i, sf in sfs.items()}


def baseline_reynders(
    nodes: Sequence[NodeReport],
    pow_levels: Sequence[int] = LORAWAN_POW_LEVELS,
    cir: CirMatrix = CirMatrix(),
    sensitivity: SensitivityModel = SensitivityModel(),
    target: str = "reference",
    cf: int = DEFAULT_CF,
) -> dict[int, TxParams]:
    """Reimplementation of the path-loss-sorted SF and power control of Reynders et al.

    SFs follow the fair ratios over path-loss-sorted nodes. The weakest SF8
    node is the reference and transmits at the top level; SF7 nodes able to
    reach it within the CIR margin are pinned to the lowest level. Every other
    node takes the lowest level that lifts it to the reference power
    (``target="reference"``) or to sensitivity plus the CIR margin
    (``target="sensitivity"``), whichever is higher; nodes that cannot make it
    use the top level.
    """
    if target not in ("reference", "sensitivity"):
        raise ValueError(f"unknown target {target!r}")
    levels = _check_levels(pow_levels)
    ranked = _by_strength(nodes)
    if not ranked:
        raise ValueError("no nodes to allocate")
    sfs = _contiguous(ranked, fair_sf_ratios())
    min_cir = cir.min

    high = [r for r in ranked if sfs[r.node_id] > 7]
    ref_pool = [r for r in high if sfs[r.node_id] == 8] or high
    ref_power = ref_pool[-1].path_gain + levels[-1] if ref_pool else -math.inf

    out = {}
    for r in ranked:
        sf = sfs[r.node_id]
        if sf == 7 and r.path_gain + levels[0] > ref_power - min_cir:
            tp = levels[0]
        else:
            goal = sensitivity(sf, 125_000) + min_cir
            if target == "reference":
                goal = max(goal, ref_power)
            tp = next((lv for lv in levels if r.path_gain + lv >= goal), levels[-1])
        out[r.node_id] = TxParams(sf, tp=tp, cf=cf)
    return out


def baseline_sn5(
    nodes: Sequence[NodeReport],
    pow_levels: Sequence[int] = LORAWAN_POW_LEVELS,
    sensitivity: SensitivityModel = SensitivityModel(),
    payload_len: int = 80,
    cf: int = DEFAULT_CF,
) -> dict[int, TxParams]:
    """Each node picks the decodable combination with the least airtime, then the least power."""
    levels = _check_levels(pow_levels)
    combos = sorted(
        (TxParams(sf, bw, cf=cf) for sf in SPREADING_FACTORS for bw in BANDWIDTHS),
        key=lambda p: (airtime(p, payload_len), p.sf),
    )
    out = {}
    for r in nodes:
        choice = None
        for p in combos:
            tp = next((lv for lv in levels if r.path_gain + lv >= sensitivity(p.sf, p.bw)), None)
            if tp is not None:
                choice = TxParams(p.sf, p.bw, p.cr, tp, cf)
                break
        out[r.node_id] = choice or TxParams(12, 125_000, tp=levels[-1], cf=cf)
    return out


# -- strategy dispatch ----------------------------------------------------------


def parse_strategy(name: str) -> tuple[str, int | None]:
    """Split ``fadr-region:<size>`` into its kind and region size."""
    if name.startswith("fadr-region:"):
        size = name.split(":", 1)[1]
        if not size.isdigit():
            raise ValueError(f"bad region size in strategy {name!r}")
        return "fadr", int(size)
    if name == "fadr-one-region":
        return "fadr", None
    if name in ("equal-sf", "adelantado", "reynders", "sn5"):
        return name, None
    raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")


def allocate(
    strategy: str,
    nodes: Sequence[NodeReport],
    *,
    pow_levels: Sequence[int] = LORAWAN_POW_LEVELS,
    cir: CirMatrix = CirMatrix(),
    deployed: Iterable[tuple[int, int, int]] = DEFAULT_DEPLOYMENT,
    bw_weighting: str = "linear",
    sensitivity: SensitivityModel = SensitivityModel(),
    payload_len: int = 80,
    initial_tp: int = MAX_TP,
    cf: int = DEFAULT_CF,
) -> dict[int, TxParams]:
    kind, region_size = parse_strategy(strategy)
    if kind == "fadr":
        rates = assign_rates_by_region(nodes, region_size, deployed, bw_weighting)
        tps = fadr_power_control(nodes, pow_levels, cir)
        return {i: TxParams(r.sf, r.bw, r.cr, tps[i], cf) for i, r in rates.items()}
    if kind == "equal-sf":
        return baseline_equal_sf(nodes, initial_tp, cf)
    if kind == "adelantado":
        return baseline_adelantado(nodes, initial_tp, cf)
    if kind == "reynders":
        return baseline_reynders(nodes, pow_levels, cir, sensitivity, cf=cf)
    return baseline_sn5(nodes, pow_levels, sensitivity, payload_len, cf)
