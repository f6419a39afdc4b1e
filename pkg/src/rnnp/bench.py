"""Complexity measurement harness over the gradient engines.

Records deterministic multiply-accumulate counts and peak gradient-state
floats per engine call next to wall-clock time.  The counters carry the
complexity claims (linear growth for the forward/backward recombined
sweeps, exponential for the unrolled tree, Jacobian storage for the
forward propagation); seconds are reported for orientation only and never
asserted, since they depend on the host.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

from .base import DataValidationError
from .engines import bptt_gradients, rtrl_gradients, trrl_gradients
from .linalg import Rng
from .model import RnnSpec, init_params
from .training import LossHead

CSV_HEADER = [
    "engine",
    "lag_set",
    "hidden_dim",
    "y_dim",
    "tau",
    "mac_count",
    "peak_floats",
    "wall_seconds",
    "macronodes",
]


@dataclass
class BenchRecord:
    engine: str
    lag_set: tuple
    hidden_dim: int
    y_dim: int
    tau: int
    mac_count: int
    peak_floats: int
    wall_seconds: float
    macronodes: int | None = None


def _run_once(engine: str, spec: RnnSpec, tau: int, seed: int) -> BenchRecord:
    rng = Rng(seed)
    params = init_params(spec, rng.spawn(1))
    xin = rng.spawn(2)
    xs = [xin.uniform(-1.0, 1.0, spec.x_dim) for _ in range(tau)]
    head = LossHead(kind="mse" if spec.y_dim == 1 else "gaussian_nll")
    loss = head.bind(0.3)
    t0 = time.perf_counter()
    macronodes = None
    if engine == "trrl":
        _, counter = trrl_gradients(params, spec, xs, loss)
    elif engine == "rtrl":
        _, counter = rtrl_gradients(params, spec, xs, loss)
    elif engine == "bptt":
        _, counter, macronodes = bptt_gradients(params, spec, xs, loss)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    elapsed = time.perf_counter() - t0
    return BenchRecord(
        engine=engine,
        lag_set=spec.lag_set,
        hidden_dim=spec.hidden_dim,
        y_dim=spec.y_dim,
        tau=tau,
        mac_count=counter.mac_count,
        peak_floats=counter.peak_floats,
        wall_seconds=elapsed,
        macronodes=macronodes,
    )


def sweep_tau(
    engine: str, spec: RnnSpec, taus: list, seed: int = 0
) -> list:
    """One gradient evaluation per sequence length on a fixed seeded model."""
    return [_run_once(engine, spec, tau, seed) for tau in taus]


def sweep_neurons(
    engines: tuple = ("trrl", "rtrl"),
    lag_sets: tuple = ((1,), (1, 2), (1, 2, 24)),
    hidden_dims: tuple = (5, 10, 15),
    tau: int = 49,
    y_dim: int = 2,
    x_dim: int = 13,
    seed: int = 0,
) -> list:
    """Grid of engine runs across lag sets and hidden sizes at fixed tau."""
    records = []
    for lag_set in lag_sets:
        for h in hidden_dims:
            spec = RnnSpec(
                lag_set=tuple(lag_set), x_dim=x_dim, hidden_dim=h, y_dim=y_dim
            )
            for engine in engines:
                records.append(_run_once(engine, spec, tau, seed))
    return records


@dataclass
class GainRow:
    lag_set: tuple
    hidden_dim: int
    rtrl_macs: int
    trrl_macs: int
    gain_factor: float
    theoretical: int  # p * y^2


def gain_factors(records: list) -> list:
    """RTRL-over-recombined-sweep cost ratio per (lag set, hidden size)."""
    by_key: dict = {}
    for r in records:
        by_key.setdefault((r.lag_set, r.hidden_dim, r.y_dim), {})[r.engine] = r
    rows = []
    for (lag_set, h, y), engines in sorted(by_key.items()):
        if "rtrl" in engines and "trrl" in engines:
            rtrl_macs = engines["rtrl"].mac_count
            trrl_macs = engines["trrl"].mac_count
            rows.append(
                GainRow(
                    lag_set=lag_set,
                    hidden_dim=h,
                    rtrl_macs=rtrl_macs,
                    trrl_macs=trrl_macs,
                    gain_factor=rtrl_macs / trrl_macs,
                    theoretical=len(lag_set) * y * y,
                )
            )
    return rows


def emit_csv(records: list, path: str) -> None:
    """Write records with a stable column order; overwrites on re-run."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.engine,
                    ";".join(str(l) for l in r.lag_set),
                    r.hidden_dim,
                    r.y_dim,
                    r.tau,
                    r.mac_count,
                    r.peak_floats,
                    repr(r.wall_seconds),
                    "" if r.macronodes is None else r.macronodes,
                ]
            )


def read_csv(path: str) -> list:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER:
            raise DataValidationError(f"bad bench header {reader.fieldnames!r}")
        for rec in reader:
            records.append(
                BenchRecord(
                    engine=rec["engine"],
                    lag_set=tuple(int(v) for v in rec["lag_set"].split(";")),
                    hidden_dim=int(rec["hidden_dim"]),
                    y_dim=int(rec["y_dim"]),
                    tau=int(rec["tau"]),
                    mac_count=int(rec["mac_count"]),
                    peak_floats=int(rec["peak_floats"]),
                    wall_seconds=float(rec["wall_seconds"]),
                    macronodes=int(rec["macronodes"]) if rec["macronodes"] else None,
                )
            )
    return records


def linear_fit_r2(xs: list, ys: list) -> float:
    """Coefficient of determination of the least-squares line."""
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0.0:
        raise ValueError("degenerate x values")
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot
