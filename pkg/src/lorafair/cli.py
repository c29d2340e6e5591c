"""Command line entry point: ``lorafair {ratios,simulate,sweep}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config, parse_deployment
from .experiments import (
    NODE_COLUMNS,
    FULL_SCALE_SEEDS,
    FULL_SCALE_SIM_TIME,
    PRESETS,
    SWEEP_AXES,
    ExperimentSpec,
    aggregate,
    node_rows,
    ratio_table,
    summarize,
    sweep,
    to_csv,
)
from .simulation import ConfigError, Scenario, run


def _csv_list(text: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return items


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _full_scale(sc: Scenario) -> Scenario:
    return replace(sc, sim_time=FULL_SCALE_SIM_TIME, seeds=FULL_SCALE_SEEDS)


def cmd_ratios(args) -> int:
    deployed = parse_deployment(args.deployed)
    rows = ratio_table(args.n, deployed, args.bw_weighting)
    print(f"{'sf':>3} {'bw_khz':>7} {'cr':>4} {'share':>9} {'count':>7}")
    for rate, share, count in rows:
        print(f"{rate.sf:>3} {rate.bw // 1000:>7} {'4/' + str(4 + rate.cr):>4} {share:>9.4f} {count:>7}")
    print(f"{'total':>15} {sum(s for _, s, _ in rows):>9.4f} {sum(c for _, _, c in rows):>7}")
    return 0


def cmd_simulate(args) -> int:
    scenario, _ = load_config(args.config)
    if args.full_scale:
        scenario = _full_scale(scenario)
    result = run(scenario, args.seed)
    # everything is rendered before any file is touched
    summary = to_csv([aggregate("-", scenario.strategy, [summarize(result)])])
    outputs = [(args.out, summary)]
    if args.events:
        outputs.append((args.events, "\n".join(result.event_log()) + "\n"))
    if args.nodes:
        outputs.append((args.nodes, to_csv(node_rows(result), NODE_COLUMNS)))
    for path, text in outputs:
        _write(path, text)
    return 0


def cmd_sweep(args) -> int:
    if args.config is None and args.preset is None:
        raise ConfigError("sweep needs --config, --preset or both")
    base, extra = load_config(args.config) if args.config else (Scenario(), {})
    if args.full_scale:
        base = _full_scale(base)
    seeds = tuple(args.seeds) if args.seeds else base.seeds
    strategies = args.strategies or extra.get("strategies")
    if args.preset:
        spec = PRESETS[args.preset].spec(args.preset, base, seeds)
        spec = replace(
            spec,
            axis=args.axis or spec.axis,
            values=tuple(args.values or spec.values),
            strategies=tuple(strategies or spec.strategies),
            out=args.out,
        )
    else:
        if not (args.axis and args.values):
            raise ConfigError("sweep needs --axis and --values unless a preset is given")
        spec = ExperimentSpec("sweep", base, args.axis, tuple(args.values), seeds, tuple(strategies or ()), args.out)
    spec.points()  # reject bad sweep values before running anything
    rows = sweep(spec, args.workers)
    _write(spec.out, to_csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lorafair", description="Fair data-rate allocation and power control for LoRa cells.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("ratios", help="print fair data-rate shares and node counts")
    r.add_argument("--n", type=int, default=1000, help="number of nodes (default 1000)")
    r.add_argument("--deployed", default="default", help="deployed rates, e.g. '7-12:125,7:250' or 'lorawan-eu'")
    r.add_argument("--bw-weighting", choices=("linear", "squared"), default="linear")
    r.set_defaults(func=cmd_ratios)

    s = sub.add_parser("simulate", help="run one scenario with one seed")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", help="summary CSV path (default stdout)")
    s.add_argument("--events", help="write the per-packet event log here")
    s.add_argument("--nodes", help="write per-node results here")
    s.add_argument("--full-scale", action="store_true", help="simulate one full day")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="sweep one axis over seeds and strategies")
    w.add_argument("--config")
    w.add_argument("--preset", choices=sorted(PRESETS))
    w.add_argument("--axis", choices=SWEEP_AXES)
    w.add_argument("--values", type=_csv_list)
    w.add_argument("--seeds", type=_int_list)
    w.add_argument("--strategies", type=_csv_list)
    w.add_argument("--out", required=True)
    w.add_argument("--workers", type=int, help="parallel runs (default $LORAFAIR_WORKERS or 1)")
    w.add_argument("--full-scale", action="store_true", help="one simulated day and ten seeds")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"lorafair: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
