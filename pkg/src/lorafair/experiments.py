"""Seeded sweeps, per-run summaries and CSV output.

Summary CSV columns, in order::

    sweep_value, strategy, seed_count,
    der_mean, der_std, jain_mean, jain_std, energy_j_mean, energy_j_std,
    der_sf7, der_sf8, der_sf9, der_sf10, der_sf11, der_sf12

``der_*`` is delivered over sent packets for the cell (or for one SF), ``jain``
is the fairness index of per-node DER over nodes that sent something, and
``energy_j`` is the total transmit energy of the cell. Standard deviations are
sample deviations over seeds (0 for a single seed). An SF nobody used gives
``nan``. Floats are written with six decimals.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .allocation import DEFAULT_DEPLOYMENT, Rate, fair_rate_ratios, ratios_to_counts
from .config import with_axis
from .phy import SPREADING_FACTORS
from .simulation import ConfigError, Scenario, run

WORKERS_ENV = "LORAFAIR_WORKERS"
FULL_SCALE_SIM_TIME = 86_400.0
FULL_SCALE_SEEDS = tuple(range(1, 11))
SWEEP_AXES = ("n_nodes", "radius", "distribution", "strategy")

CSV_COLUMNS = (
    "sweep_value",
    "strategy",
    "seed_count",
    "der_mean",
    "der_std",
    "jain_mean",
    "jain_std",
    "energy_j_mean",
    "energy_j_std",
    *(f"der_sf{sf}" for sf in SPREADING_FACTORS),
)
NODE_COLUMNS = ("node", "x", "y", "distance", "path_gain", "sf", "bw", "cr", "tp", "sent", "delivered", "der", "energy_j")


class RunSummary(NamedTuple):
    der: float
    jain: float
    energy: float
    per_sf: tuple[float, ...]


def summarize(result) -> RunSummary:
    rep = result.report
    return RunSummary(rep.overall_der, rep.jain, rep.energy_total, tuple(rep.per_sf_der[sf] for sf in SPREADING_FACTORS))


def _run_one(scenario: Scenario, seed: int) -> RunSummary:
    return summarize(run(scenario, seed))


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    base: Scenario
    axis: str
    values: tuple
    seeds: tuple[int, ...]
    strategies: tuple[str, ...] = ()
    out: str | None = None

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if not self.seeds:
            raise ConfigError("seed list must be non-empty")

    def points(self) -> list[tuple[object, str, Scenario]]:
        """(sweep value, strategy, scenario) in output order; validates every point."""
        strategies = self.strategies or (self.base.strategy,)
        out = []
        for v in self.values:
            sc = with_axis(self.base, self.axis, v)
            if self.axis == "strategy":
                out.append((v, sc.strategy, sc))
            else:
                out.extend((v, s, replace(sc, strategy=s)) for s in strategies)
        return out


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def _mean_std(x: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(x, dtype=float)
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


def aggregate(value, strategy: str, runs: Sequence[RunSummary]) -> dict:
    """One CSV row from the per-seed summaries of a sweep point."""
    row = {"sweep_value": value, "strategy": strategy, "seed_count": len(runs)}
    for key, attr in (("der", "der"), ("jain", "jain"), ("energy_j", "energy")):
        row[f"{key}_mean"], row[f"{key}_std"] = _mean_std([getattr(r, attr) for r in runs])
    for i, sf in enumerate(SPREADING_FACTORS):
        vals = [r.per_sf[i] for r in runs if not math.isnan(r.per_sf[i])]
        row[f"der_sf{sf}"] = float(np.mean(vals)) if vals else math.nan
    return row


def sweep(spec: ExperimentSpec, workers: int | None = None) -> list[dict]:
    """Run every (value, strategy, seed) and return rows in sweep order."""
    points = spec.points()
    jobs = [(sc, seed) for _, _, sc in points for seed in spec.seeds]
    workers = workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_one, *zip(*jobs)))
    else:
        results = [_run_one(sc, seed) for sc, seed in jobs]
    k = len(spec.seeds)
    return [aggregate(v, s, results[i * k : (i + 1) * k]) for i, (v, s, _) in enumerate(points)]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def to_csv(rows: Sequence[dict], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def node_rows(result) -> list[dict]:
    rep = result.report
    rows = []
    for i, (pos, p) in enumerate(zip(result.positions, result.params)):
        rows.append({
            "node": i, "x": pos.x, "y": pos.y, "distance": pos.distance,
            "path_gain": float(result.path_gain[i]), "sf": p.sf, "bw": p.bw, "cr": p.cr, "tp": p.tp,
            "sent": int(rep.sent[i]), "delivered": int(rep.delivered[i]),
            "der": float(rep.node_der[i]), "energy_j": float(rep.node_energy[i]),
        })
    return rows


def ratio_table(n: int, deployed=DEFAULT_DEPLOYMENT, bw_weighting: str = "linear") -> list[tuple[Rate, float, int]]:
    """(rate, share, node count) rows, fastest SF first."""
    ratios = {Rate(*k): v for k, v in fair_rate_ratios(deployed, bw_weighting).items()}
    counts = ratios_to_counts(n, ratios)
    order = sorted(ratios, key=lambda r: (r.sf, -r.bw, r.cr))
    return [(r, ratios[r], counts[r]) for r in order]


@dataclass(frozen=True)
class Preset:
    """A study from the evaluation: toggles, the swept axis and the strategies compared."""

    description: str
    axis: str
    values: tuple
    strategies: tuple[str, ...]
    overrides: dict = field(default_factory=dict)

    def spec(self, name: str, base: Scenario | None = None, seeds=None) -> ExperimentSpec:
        base = replace(base or Scenario(), **self.overrides)
        return ExperimentSpec(name, base, self.axis, self.values, tuple(seeds or base.seeds), self.strategies)


_NODE_COUNTS = (100, 500, 1000, 2000, 3000, 4000)
_IDEAL = {"perfect_orthogonality": True, "capture_enabled": False}

PRESETS = {
    "ideal-channel": Preset(
        "fair ratios vs equal SF shares; orthogonal SFs, no capture",
        "n_nodes", _NODE_COUNTS, ("fadr-one-region", "equal-sf", "adelantado"), _IDEAL,
    ),
    "node-count": Preset(
        "main comparison under the full collision model",
        "n_nodes", _NODE_COUNTS, ("fadr-one-region", "fadr-region:50", "reynders", "sn5"),
    ),
    "distance": Preset(
        "DER against distance; use simulate --nodes for the per-node profile",
        "strategy", ("fadr-one-region", "reynders", "sn5"), (),
    ),
    "radius": Preset(
        "cell radius sweep",
        "radius", (100, 200, 400, 800, 1600, 3200), ("fadr-one-region", "reynders", "sn5"),
    ),
    "skewed": Preset(
        "skewed node placement",
        "distribution", ("uniform", "inner", "middle", "outer"), ("fadr-one-region", "reynders", "sn5"),
        {"n_nodes": 4000},
    ),
}
