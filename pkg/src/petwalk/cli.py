"""Command-line entry points: serve, simulate, gen, stats."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .config import load_config
from .engine import Engine
from .errors import DegenerateSampleError, DomainError, ParseError
from .evalstats import effect_label, q13_aggregate, rank_biserial, ueqs_aggregate, wilcoxon_exact
from .feed import gen_sensor_grid, parse_trace
from .logfmt import render_log
from .profile import load_catalog, load_profiles
from .scenarios import BUILDERS


def _cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    config = load_config(args.config or os.environ.get("PETWALK_CONFIG"))
    data_dir = args.data or os.environ.get("PETWALK_DATA")
    mode = args.mode or os.environ.get("PETWALK_MODE", "virtual")
    app = create_app(config=config, data_dir=data_dir, mode=mode)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    try:
        catalog = load_catalog(args.pois, config)
        profiles = load_profiles(args.profile)
        with open(args.trace, "r", encoding="utf-8") as fh:
            events = list(parse_trace(fh))
        engine = Engine(config=config, catalog=catalog)
        notifications = engine.replay(events, profiles)
    except (ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render_log(notifications)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def _cmd_gen_grid(args) -> int:
    try:
        bbox = tuple(float(part) for part in args.bbox.split(","))
        if len(bbox) != 4:
            raise ValueError
    except ValueError:
        print("error: --bbox expects lat_min,lon_min,lat_max,lon_max", file=sys.stderr)
        return 1
    try:
        grid = gen_sensor_grid(args.seed, bbox, args.air, args.noise, args.precip)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = json.dumps(grid, indent=2)
    if args.out == "-":
        print(payload)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    return 0


def _cmd_gen_trace(args) -> int:
    records = BUILDERS[args.scenario](args.seed)
    lines = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    if args.out == "-":
        sys.stdout.write(lines)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(lines)
    return 0


def _read_table(path: str) -> list[list[float]]:
    """Delimiter-separated numeric rows; a non-numeric first row is a header."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        sample = fh.read()
    delimiter = ";" if ";" in sample and "," not in sample else ","
    rows = []
    for row in csv.reader(sample.splitlines(), delimiter=delimiter):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if rows:
                raise ParseError(f"non-numeric row after data started: {row!r}")
            # header row: skip
    if not rows:
        raise ParseError(f"{path}: no numeric rows found")
    return rows


def _emit_result(human: list[str], payload: dict, fmt: str) -> None:
    if fmt in ("human", "both"):
        for line in human:
            print(line)
    if fmt in ("json", "both"):
        print(json.dumps(payload, ensure_ascii=False))


def _cmd_stats(args) -> int:
    try:
        rows = _read_table(args.input)
        if args.stats_cmd == "wilcoxon":
            pairs = []
            for row in rows:
                if len(row) != 2:
                    raise ParseError("wilcoxon input needs exactly two columns (baseline, treatment)")
                pairs.append((row[0], row[1]))
            result = wilcoxon_exact(pairs)
            r = rank_biserial(pairs)
            label = effect_label(r)
            human = [
                f"n_pairs={len(pairs)} n_eff={result.n_eff}",
                f"W={result.w:.4f} R+={result.r_plus:.4f} R-={result.r_minus:.4f}",
                f"p_two_tailed={result.p_two_tailed:.6f}",
                f"r_rb={r:.4f} ({label.value})",
            ]
            payload = {
                "n_pairs": len(pairs),
                "n_eff": result.n_eff,
                "w": result.w,
                "r_plus": result.r_plus,
                "r_minus": result.r_minus,
                "p_two_tailed": result.p_two_tailed,
                "r_rb": r,
                "effect": label.value,
            }
        else:
            values = [cell for row in rows for cell in row]
            if args.stats_cmd == "ueqs":
                agg = ueqs_aggregate(values)
                human = [f"PQ={agg.pq:.4f}", f"HQ={agg.hq:.4f}", f"overall={agg.overall:.4f}"]
                payload = {"pq": agg.pq, "hq": agg.hq, "overall": agg.overall}
            else:
                agg = q13_aggregate(values)
                human = [
                    f"utility={agg.utility:.4f}",
                    f"acceptance={agg.acceptance:.4f}",
                    f"vp={agg.vp:.4f}",
                    f"overall={agg.overall:.4f}",
                ]
                payload = {
                    "utility": agg.utility,
                    "acceptance": agg.acceptance,
                    "vp": agg.vp,
                    "overall": agg.overall,
                }
    except (ParseError, DomainError, DegenerateSampleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit_result(human, payload, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="petwalk", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", default=None)
    serve.add_argument("--data", default=None, help="persistence directory")
    serve.add_argument("--mode", choices=["virtual", "wall"], default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    simulate = sub.add_parser("simulate", help="replay a trace deterministically")
    simulate.add_argument("--trace", required=True)
    simulate.add_argument("--pois", required=True)
    simulate.add_argument("--profile", required=True)
    simulate.add_argument("--config", default=None)
    simulate.add_argument("--out", required=True, help="notification log path, or - for stdout")
    simulate.set_defaults(func=_cmd_simulate)

    gen = sub.add_parser("gen", help="generate simulation inputs")
    gen_sub = gen.add_subparsers(dest="gen_cmd", required=True)
    grid = gen_sub.add_parser("grid", help="deterministic sensor grid")
    grid.add_argument("--seed", type=int, default=0)
    grid.add_argument("--bbox", required=True, help="lat_min,lon_min,lat_max,lon_max")
    grid.add_argument("--air", type=int, default=100)
    grid.add_argument("--noise", type=int, default=50)
    grid.add_argument("--precip", type=int, default=5)
    grid.add_argument("--out", required=True)
    grid.set_defaults(func=_cmd_gen_grid)
    trace = gen_sub.add_parser("trace", help="canned scenario trace")
    trace.add_argument("--scenario", choices=sorted(BUILDERS), required=True)
    trace.add_argument("--seed", type=int, default=0)
    trace.add_argument("--out", required=True)
    trace.set_defaults(func=_cmd_gen_trace)

    stats = sub.add_parser("stats", help="evaluation statistics toolkit")
    stats_sub = stats.add_subparsers(dest="stats_cmd", required=True)
    for name, help_text in (
        ("wilcoxon", "exact signed-rank test on two columns"),
        ("ueqs", "UEQ-S sub-scale aggregation of 8 item means"),
        ("q13", "Q13 sub-scale aggregation of 11 item means"),
    ):
        cmd = stats_sub.add_parser(name, help=help_text)
        cmd.add_argument("--input", required=True)
        cmd.add_argument("--format", choices=["human", "json", "both"], default="both")
        cmd.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
