"""Cross-engine and finite-difference gradient verification suite.

Runs seeded random model/sequence instances through all three engines,
compares them pairwise and against central finite differences, and emits
one row per comparison.  This is the same evidence the test suite relies
on, packaged for the command line so a build can be checked in the field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .engines import (
    DEFAULT_BPTT_GUARD,
    bptt_gradients,
    finite_difference_gradients,
    max_abs_diff,
    max_rel_diff,
    rtrl_gradients,
    trrl_gradients,
)
from .linalg import Rng
from .model import RnnSpec, init_params
from .training import LossHead

CSV_HEADER = ["engine", "seed", "tau", "lagset", "max_rel_err", "max_abs_err", "ok"]

PAIRWISE_TOL = 1e-10
FD_REL_TOL = 1e-5
FD_ABS_TOL = 1e-7

DEFAULT_LAG_SETS = ((1,), (1, 2), (1, 3), (1, 2, 5))


@dataclass
class GradCheckRow:
    engine: str
    seed: int
    tau: int
    lag_set: tuple
    max_rel_err: float
    max_abs_err: float
    ok: bool


def _random_instance(seed: int, lag_sets) -> tuple:
    rng = Rng(seed)
    lag_set = lag_sets[seed % len(lag_sets)]
    y_dim = 1 + seed % 2
    spec = RnnSpec(
        lag_set=lag_set,
        x_dim=rng.randint(1, 5),
        hidden_dim=rng.randint(2, 8),
        y_dim=y_dim,
    )
    tau = rng.randint(max(1, spec.max_lag), 12)
    params = init_params(spec, rng.spawn(1))
    xin = rng.spawn(2)
    xs = [xin.uniform(-1.0, 1.0, spec.x_dim) for _ in range(tau)]
    target = rng.uniform(-1.0, 1.0, 1)[0]
    head = LossHead(kind="mse" if y_dim == 1 else "gaussian_nll")
    return spec, params, xs, head.bind(target)


def _fd_ok(engine_pair, fd_pair) -> tuple:
    worst_rel, worst_abs, ok = 0.0, 0.0, True
    for ve, vf in (
        (engine_pair.d_theta, fd_pair.d_theta),
        (engine_pair.d_phi, fd_pair.d_phi),
    ):
        for a, b in zip(ve, vf):
            err = abs(a - b)
            rel = err / max(abs(a), abs(b), 1e-12)
            worst_abs = max(worst_abs, err)
            worst_rel = max(worst_rel, rel)
            if err > FD_ABS_TOL and rel > FD_REL_TOL:
                ok = False
    return worst_rel, worst_abs, ok


def run_gradient_check(
    n_seeds: int = 20,
    lag_sets=DEFAULT_LAG_SETS,
    base_seed: int = 0,
) -> tuple:
    """Returns (rows, all_ok) over ``n_seeds`` random instances."""
    rows: list = []
    all_ok = True
    for k in range(n_seeds):
        seed = base_seed + k
        spec, params, xs, loss = _random_instance(seed, lag_sets)
        tau = len(xs)
        engines = {
            "trrl": trrl_gradients(params, spec, xs, loss)[0],
            "rtrl": rtrl_gradients(params, spec, xs, loss)[0],
        }
        if tau <= DEFAULT_BPTT_GUARD:
            engines["bptt"] = bptt_gradients(params, spec, xs, loss)[0]
        fd = finite_difference_gradients(params, spec, xs, loss)

        for name, pair in engines.items():
            rel, abs_err, ok = _fd_ok(pair, fd)
            rows.append(
                GradCheckRow(
                    engine=name,
                    seed=seed,
                    tau=tau,
                    lag_set=spec.lag_set,
                    max_rel_err=rel,
                    max_abs_err=abs_err,
                    ok=ok,
                )
            )
            all_ok = all_ok and ok

        names = sorted(engines)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                pa, pb = engines[a], engines[b]
                worst_abs = max(
                    max_abs_diff(pa.d_theta, pb.d_theta),
                    max_abs_diff(pa.d_phi, pb.d_phi),
                )
                worst_rel = max(
                    max_rel_diff(pa.d_theta, pb.d_theta),
                    max_rel_diff(pa.d_phi, pb.d_phi),
                )
                scale = 1.0 + max(
                    (abs(v) for v in pb.d_theta + pb.d_phi), default=0.0
                )
                ok = worst_abs <= PAIRWISE_TOL * scale
                rows.append(
                    GradCheckRow(
                        engine=f"{a}-vs-{b}",
                        seed=seed,
                        tau=tau,
                        lag_set=spec.lag_set,
                        max_rel_err=worst_rel,
                        max_abs_err=worst_abs,
                        ok=ok,
                    )
                )
                all_ok = all_ok and ok
    return rows, all_ok


def write_report(rows: list, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.engine,
                    r.seed,
                    r.tau,
                    ";".join(str(l) for l in r.lag_set),
                    repr(r.max_rel_err),
                    repr(r.max_abs_err),
                    int(r.ok),
                ]
            )
