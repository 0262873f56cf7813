"""Single entry point: serve / simulate / stats / histogram / calibrate.

Every subcommand is deterministic given its flags, the config file, and
the seed. Typed errors exit nonzero with the message on stderr.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import replace
from random import Random

from .analytics import compute_all_stats, compute_stats, hourly_histogram
from .config import Config, load_config
from .engine import calibrate_baselines, default_catalog, load_catalog, load_samples_csv
from .errors import AnimoError
from .eventlog import EventLog, read_events
from .relay import RelayCore
from .simulator import DEFAULT_START_TS, BehaviorModel, simulate_dyads


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="animo", description=__doc__)
    p.add_argument("--config", help="path to a json config file (or set ANIMO_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the relay server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int)
    serve.add_argument("--ws-port", type=int)
    serve.add_argument("--ttl-secs", type=float)
    serve.add_argument("--loss", type=float)
    serve.add_argument("--seed", type=int)
    serve.add_argument("--log-path")
    serve.add_argument("--registry-path")
    serve.add_argument("--catalog", help="catalog jsonl path (default: packaged)")

    sim = sub.add_parser("simulate", help="generate an event log from simulated dyads")
    sim.add_argument("--dyads", type=int, default=17)
    sim.add_argument("--days", type=int, default=14)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--rate", type=float, help="sends per user per day (default 5)")
    sim.add_argument("--read-prob", type=float)
    sim.add_argument("--reply-prob", type=float)
    sim.add_argument("--loss", type=float)
    sim.add_argument("--hz", type=float, default=0.1, help="heart-rate sample rate")
    sim.add_argument("--start-ts", type=float, default=DEFAULT_START_TS)
    sim.add_argument("--ttl-secs", type=float)
    sim.add_argument("--out", required=True, help="event log path (overwritten)")
    sim.add_argument("--overrides", help="json file: dyad index -> model field overrides")

    stats = sub.add_parser("stats", help="per-dyad usage table from an event log")
    stats.add_argument("--log", required=True)
    stats.add_argument("--reply-window", type=float)
    stats.add_argument("--format", choices=("table", "json"), default="table")

    hist = sub.add_parser("histogram", help="hour-of-day send/read counts as csv")
    hist.add_argument("--log", required=True)
    hist.add_argument("--out", help="write csv here instead of stdout")

    cal = sub.add_parser("calibrate", help="compute baselines from two heart-rate csvs")
    cal.add_argument("--calm", required=True)
    cal.add_argument("--stress", required=True)
    cal.add_argument("--user", help="user_id to calibrate (default: the only one present)")
    return p


def _pick(flag_value, cfg_value):
    return cfg_value if flag_value is None else flag_value


def _cmd_serve(args: argparse.Namespace, cfg: Config) -> int:
    from .server import RelayServer  # keeps cli import light for batch commands

    catalog_path = _pick(args.catalog, cfg.catalog_path)
    catalog = load_catalog(catalog_path) if catalog_path else default_catalog()
    core = RelayCore(
        catalog,
        event_log=EventLog(_pick(args.log_path, cfg.log_path)),
        ttl_secs=_pick(args.ttl_secs, cfg.ttl_secs),
        loss=_pick(args.loss, cfg.loss),
        rng=Random(_pick(args.seed, cfg.seed)),
        registry_path=_pick(args.registry_path, cfg.registry_path),
    )
    server = RelayServer(
        core,
        host=args.host,
        port=_pick(args.port, cfg.port),
        ws_port=_pick(args.ws_port, cfg.ws_port),
    )
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_simulate(args: argparse.Namespace, cfg: Config) -> int:
    # precedence: explicit flags > config-file model > built-in defaults
    base = BehaviorModel.from_dict(cfg.model) if cfg.model else BehaviorModel()
    model = replace(
        base,
        sends_per_user_per_day=_pick(args.rate, base.sends_per_user_per_day),
        read_prob=_pick(args.read_prob, base.read_prob),
        reply_prob=_pick(args.reply_prob, base.reply_prob),
        loss=_pick(args.loss, base.loss),
    )
    model.validate()
    overrides = None
    if args.overrides:
        with open(args.overrides, encoding="utf-8") as fh:
            overrides = {int(k): v for k, v in json.load(fh).items()}
    events = simulate_dyads(
        args.dyads,
        args.days,
        model,
        seed=_pick(args.seed, cfg.seed),
        log_path=args.out,
        overrides=overrides,
        start_ts=args.start_ts,
        hz=args.hz,
        ttl_secs=_pick(args.ttl_secs, cfg.ttl_secs),
        reply_window_secs=cfg.reply_window_secs,
        alpha=cfg.alpha,
        t_low=cfg.t_low,
        t_high=cfg.t_high,
    )
    print(f"wrote {len(events)} events to {args.out}")
    return 0


def _format_row(label: str, users: str, st) -> str:
    return (
        f"{label:<8} {users:<16} {st.sent:>6}  "
        f"{st.read:>5} ({st.read_pct}%)  {st.replied:>5} ({st.replied_pct}%)  {st.lost:>5}"
    )


def _cmd_stats(args: argparse.Namespace, cfg: Config) -> int:
    events = read_events(args.log)
    window = _pick(args.reply_window, cfg.reply_window_secs)
    per_dyad = compute_all_stats(events, reply_window=window)
    total = compute_stats(events, None, reply_window=window)
    if args.format == "json":
        print(json.dumps(
            {"dyads": [st.to_json() for st in per_dyad.values()], "total": total.to_json()},
            indent=2,
        ))
        return 0
    members: dict[str, str] = {}
    from .analytics import replay

    rep = replay(events)
    for dyad_id, (a, b) in rep.dyads.items():
        members[dyad_id] = f"{a}+{b}"
    print(f"{'dyad':<8} {'users':<16} {'sent':>6}  {'read (%)':>12}  {'replied (%)':>13}  {'lost':>5}")
    for dyad_id, st in per_dyad.items():
        print(_format_row(dyad_id, members.get(dyad_id, ""), st))
    print(_format_row("total", "", total))
    return 0


def _cmd_histogram(args: argparse.Namespace, cfg: Config) -> int:
    hist = hourly_histogram(read_events(args.log))
    text = "\n".join(hist.csv_lines()) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_calibrate(args: argparse.Namespace, cfg: Config) -> int:
    calm = load_samples_csv(args.calm)
    stress = load_samples_csv(args.stress)
    users = {s.user_id for s in calm} | {s.user_id for s in stress}
    user = args.user
    if user is None:
        if len(users) != 1:
            raise AnimoError(
                f"csvs contain users {sorted(users)}; pick one with --user"
            )
        user = next(iter(users))
    baselines = calibrate_baselines(
        [s for s in calm if s.user_id == user],
        [s for s in stress if s.user_id == user],
    )
    print(f"{user}: low {baselines.low_bpm:g} bpm, high {baselines.high_bpm:g} bpm")
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "simulate": _cmd_simulate,
    "stats": _cmd_stats,
    "histogram": _cmd_histogram,
    "calibrate": _cmd_calibrate,
}


def run(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except AnimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
