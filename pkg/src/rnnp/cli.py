"""Command-line entry point: every workflow as a subcommand.

Configuration is a JSON file with optional sections; unknown keys are
rejected.  All randomness flows from one root seed, so identical
configuration and seed reproduce identical primary outputs (wall-clock
columns aside).

Exit codes: 0 ok, 2 configuration error, 3 data validation error,
4 numeric failure, 5 acceptance/verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from datetime import datetime

from .base import ConfigError, DataValidationError, NumericError
from .bench import emit_csv, gain_factors, sweep_neurons, sweep_tau
from .engines import DEFAULT_BPTT_GUARD, macronode_count
from .gradcheck import run_gradient_check, write_report
from .linalg import Rng
from .metrics import point_metrics, probabilistic_metrics
from .model import RnnSpec
from .pbonacci import (
    build_table,
    check_bounds,
    fibonacci_sum_identity,
    monotone_doubling_check,
)
from .pipeline import (
    LoadForecastPipeline,
    read_forecast_csv,
    write_forecast_csv,
)
from .series import ingest_csv, read_holidays, write_csv
from .synth import SynthConfig, synth_generate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_ACCEPTANCE = 5

CONFIG_SECTIONS = {
    "seed": int,
    "paths": dict,
    "model": dict,
    "train": dict,
    "synth": dict,
    "bench": dict,
}

KNOWN_KEYS = {
    "paths": {"data", "holidays", "checkpoint", "history", "out"},
    "model": {"lags", "hidden_dim", "loss", "sigma_floor", "tau"},
    "train": {
        "engine",
        "learning_rate",
        "batch_size",
        "max_epochs",
        "patience",
        "stride",
        "train_start",
        "train_end",
        "val_start",
        "val_end",
        "yearly_harmonics",
        "include_trend",
    },
    "synth": {
        "start_year",
        "years",
        "base_log_mwh",
        "trend_per_year",
        "yearly_amp",
        "daily_amp",
        "daily_second_amp",
        "weekend_drop",
        "holiday_drop",
        "temp_coeff",
        "temp_coeff_lag24",
        "ar1",
        "ar24",
        "noise_sigma",
        "temp_base_f",
        "temp_yearly_swing_f",
        "temp_daily_swing_f",
        "temp_noise_f",
        "temp_ar",
    },
    "bench": {"tau_min", "tau_max", "engines", "lag_sets", "hidden_dims"},
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    for key, value in config.items():
        if key not in CONFIG_SECTIONS:
            raise ConfigError(
                f"unknown config section {key!r}; known: {sorted(CONFIG_SECTIONS)}"
            )
        if not isinstance(value, CONFIG_SECTIONS[key]):
            raise ConfigError(f"config section {key!r} has the wrong type")
        if key in KNOWN_KEYS and isinstance(value, dict):
            unknown = set(value) - KNOWN_KEYS[key]
            if unknown:
                raise ConfigError(
                    f"unknown keys in config section {key!r}: {sorted(unknown)}"
                )
    return config


def _parse_ts(text: str, what: str) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise ConfigError(f"{what} is not an ISO timestamp: {text!r}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    section = dict(config.get("synth", {}))
    if args.years is not None:
        section["years"] = args.years
    if args.start_year is not None:
        section["start_year"] = args.start_year
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    try:
        synth_config = SynthConfig(**section)
    except TypeError as exc:
        raise ConfigError(f"bad synth config: {exc}") from None
    series, truth = synth_generate(synth_config, Rng(seed))
    write_csv(series, args.out)
    if args.truth_out:
        with open(args.truth_out, "w", encoding="utf-8") as f:
            json.dump(
                {
                    "log_det": truth.log_det,
                    "noise": truth.noise,
                    "config": {
                        k: (sorted(d.isoformat() for d in v) if k == "holidays" else v)
                        for k, v in asdict(truth.config).items()
                    },
                },
                f,
            )
    print(f"wrote {len(series)} hours to {args.out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    paths = config.get("paths", {})
    model_cfg = config.get("model", {})
    train_cfg = config.get("train", {})
    data_path = args.data or paths.get("data")
    if not data_path:
        raise ConfigError("no data path (use --data or paths.data)")
    series = ingest_csv(data_path)
    holidays = frozenset()
    holiday_path = args.holidays or paths.get("holidays")
    if holiday_path:
        holidays = read_holidays(holiday_path)

    train_start = _parse_ts(
        train_cfg.get("train_start", series.start.isoformat()), "train_start"
    )
    train_end = _parse_ts(
        train_cfg.get("train_end", series.end.isoformat()), "train_end"
    )
    val_start = train_cfg.get("val_start")
    val_end = train_cfg.get("val_end")

    pipe = LoadForecastPipeline(
        lags=tuple(model_cfg.get("lags", [1, 2, 24])),
        hidden_dim=model_cfg.get("hidden_dim", 15),
        loss=model_cfg.get("loss", "gaussian_nll"),
        sigma_floor=model_cfg.get("sigma_floor", 1e-4),
        engine=train_cfg.get("engine", "trrl"),
        learning_rate=train_cfg.get("learning_rate", 1e-3),
        batch_size=train_cfg.get("batch_size", 32),
        max_epochs=train_cfg.get("max_epochs", 500),
        patience=train_cfg.get("patience", 100),
        tau=model_cfg.get("tau", 49),
        train_stride=train_cfg.get("stride", 1),
        yearly_harmonics=train_cfg.get("yearly_harmonics", 2),
        include_trend=train_cfg.get("include_trend", True),
        holidays=holidays,
        seed=config.get("seed", 0),
    )
    pipe.fit(
        series,
        train_start,
        train_end,
        _parse_ts(val_start, "val_start") if val_start else None,
        _parse_ts(val_end, "val_end") if val_end else None,
    )
    checkpoint = args.out or paths.get("checkpoint")
    if not checkpoint:
        raise ConfigError("no checkpoint path (use --out or paths.checkpoint)")
    pipe.save(checkpoint)
    history_path = args.history or paths.get("history")
    if history_path:
        with open(history_path, "w", encoding="utf-8") as f:
            f.write("epoch,train_loss,val_loss,seconds\n")
            for h in pipe.forecaster_.history_:
                val = "" if h.val_loss is None else repr(h.val_loss)
                f.write(f"{h.epoch},{h.train_loss!r},{val},{h.seconds!r}\n")
    epochs = len(pipe.forecaster_.history_)
    print(f"trained {epochs} epochs; checkpoint -> {checkpoint}")
    return EXIT_OK


def cmd_forecast(args: argparse.Namespace) -> int:
    series = ingest_csv(args.data)
    pipe = LoadForecastPipeline.load(args.checkpoint)
    start = _parse_ts(args.start, "--start")
    end = _parse_ts(args.end, "--end")
    forecasts = pipe.forecast_range(series, start, end)
    write_forecast_csv(forecasts, args.out)
    print(f"wrote {len(forecasts)} forecasts to {args.out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    series = ingest_csv(args.data)
    rows = read_forecast_csv(args.forecasts)
    realized = [series.demand_mwh[series.index_of(ts)] for ts, _, _, _ in rows]
    points = [p for _, p, _, _ in rows]
    if all(sigma is not None for _, _, _, sigma in rows):
        dists = [(m, s) for _, _, m, s in rows]
        report = probabilistic_metrics(points, dists, realized)
    else:
        report = point_metrics(points, realized)
    print(report.render_text())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(report.to_json())
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    rows, ok = run_gradient_check(n_seeds=args.seeds, base_seed=args.base_seed)
    if args.out:
        write_report(rows, args.out)
    failures = [r for r in rows if not r.ok]
    print(
        f"gradcheck: {len(rows)} comparisons over {args.seeds} seeds, "
        f"{len(failures)} failures"
    )
    for r in failures[:10]:
        print(
            f"  FAIL {r.engine} seed={r.seed} tau={r.tau} "
            f"lags={r.lag_set} rel={r.max_rel_err:.3e} abs={r.max_abs_err:.3e}"
        )
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    section = config.get("bench", {})
    if args.mode == "tau":
        spec = RnnSpec(lag_set=(1, 2), x_dim=13, hidden_dim=15, y_dim=1)
        tau_min = section.get("tau_min", 3)
        tau_max = section.get("tau_max", 48)
        taus = list(range(tau_min, tau_max + 1))
        records = []
        for engine in section.get("engines", ["trrl", "rtrl", "bptt"]):
            use = [t for t in taus if engine != "bptt" or t <= DEFAULT_BPTT_GUARD]
            records.extend(sweep_tau(engine, spec, use, seed=config.get("seed", 0)))
        emit_csv(records, args.out)
        print(f"wrote {len(records)} tau-sweep records to {args.out}")
    else:
        records = sweep_neurons(
            lag_sets=tuple(
                tuple(l) for l in section.get("lag_sets", [[1], [1, 2], [1, 2, 24]])
            ),
            hidden_dims=tuple(section.get("hidden_dims", [5, 10, 15])),
            seed=config.get("seed", 0),
        )
        emit_csv(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")
        print(f"{'lags':>12} {'hidden':>6} {'gain':>8} {'theory':>7}")
        for row in gain_factors(records):
            lag_text = "{" + ",".join(str(l) for l in row.lag_set) + "}"
            print(
                f"{lag_text:>12} {row.hidden_dim:>6} "
                f"{row.gain_factor:>8.2f} {row.theoretical:>7}"
            )
    return EXIT_OK


def cmd_pbonacci(args: argparse.Namespace) -> int:
    table = build_table(args.p, args.n)
    bounds = check_bounds(table)
    doubling = monotone_doubling_check(table) if args.n >= 2 else []
    if args.format == "csv":
        print("n,x_n,s_n,lower_ok,upper_ok,doubling_ok")
        for i in range(table.n):
            d_ok = doubling[i - 1].ok if i >= 1 else True
            print(
                f"{i + 1},{table.values[i]},{table.sums[i]},"
                f"{int(bounds[i].lower_ok)},{int(bounds[i].upper_ok)},{int(d_ok)}"
            )
    else:
        print(f"p-bonacci table, p={table.p}")
        print(f"{'n':>4} {'X_n':>24} {'S_n':>24} {'bounds':>7} {'doubling':>9}")
        for i in range(table.n):
            d_text = "-" if i == 0 else ("ok" if doubling[i - 1].ok else "FAIL")
            b_text = "ok" if bounds[i].ok else "FAIL"
            print(
                f"{i + 1:>4} {table.values[i]:>24} {table.sums[i]:>24} "
                f"{b_text:>7} {d_text:>9}"
            )
        if args.p == 2:
            lhs, rhs = fibonacci_sum_identity(args.n)
            print(f"sum identity: S_{args.n} = {lhs}, F_{args.n + 2} - 1 = {rhs}")
        macro = macronode_count(args.n, tuple(range(1, args.p + 1)))
        print(f"macronodes at tau={args.n} for lags 1..{args.p}: {macro}")
    all_ok = all(b.ok for b in bounds) and all(d.ok for d in doubling)
    return EXIT_OK if all_ok else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rnnp",
        description=(
            "Multi-lag recurrent forecasting: train and run the hourly "
            "load pipeline, verify gradient engines, benchmark their cost, "
            "and inspect the sequence arithmetic behind the tree counts."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic hourly series CSV")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out")
    p.add_argument("--years", type=int)
    p.add_argument("--start-year", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit seasonal model + recurrent network")
    p.add_argument("--config")
    p.add_argument("--data")
    p.add_argument("--holidays")
    p.add_argument("--out")
    p.add_argument("--history")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="produce forecasts from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="score forecasts against realized data")
    p.add_argument("--forecasts", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="cross-engine gradient verification")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("bench", help="complexity sweeps with operation counters")
    p.add_argument("--mode", choices=["tau", "neurons"], default="tau")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pbonacci", help="sequence tables, bounds, identities")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_pbonacci)

    return parser


def main(argv: list | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataValidationError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, OverflowError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
