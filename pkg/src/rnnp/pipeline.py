"""End-to-end hourly load forecasting: deseasonalize, learn, reassemble.

The pipeline z-scores log demand, removes per-hour calendar structure with
the linear deseasonalizer, trains the recurrent model on overlapping
fixed-length residual windows (closed loop, the network's own outputs as
feedbacks), and produces forecasts for a horizon by running one window
per target hour with realized weather as known.  A probabilistic head
yields a lognormal distribution per hour after denormalization; its mean
is the point forecast.  A walk-forward driver rolls a fixed-length
training window one year at a time, choosing hyperparameters on the first
split only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime

from .base import BaseEstimator, DataValidationError, check_fitted
from .features import CalendarFeatureEncoder
from .forecaster import RnnForecaster, _as_windows
from .metrics import MetricReport, point_metrics, probabilistic_metrics
from .model import RnnSpec, load_checkpoint, pack, save_checkpoint, unpack
from .seasonal import HourlyDeseasonalizer
from .series import HourlySeries
from .stats import lognormal_mean, lognormal_quantile
from .training import HyperGrid, LossHead, TrainConfig, grid_search
from .windows import make_windows

FORECAST_CSV_HEADER = ["timestamp", "point", "mu_log", "sigma_log", "q05", "q95"]


@dataclass
class ForecastDistribution:
    """One hour's forecast: seasonal part, network part, assembled lognormal."""

    timestamp: datetime
    seasonal_z: float
    mu_z: float
    sigma_z: float | None
    mu_log: float
    sigma_log: float | None
    point: float


class LoadForecastPipeline(BaseEstimator):
    """Deseasonalizer + feature encoder + recurrent residual model."""

    def __init__(
        self,
        lags: tuple = (1, 2, 24),
        hidden_dim: int = 15,
        loss: str = "gaussian_nll",
        sigma_floor: float = 1e-4,
        engine: str = "trrl",
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        max_epochs: int = 500,
        patience: int = 100,
        tau: int = 49,
        train_stride: int = 1,
        yearly_harmonics: int = 2,
        include_trend: bool = True,
        holidays: frozenset = frozenset(),
        seed: int = 0,
    ) -> None:
        self.lags = lags
        self.hidden_dim = hidden_dim
        self.loss = loss
        self.sigma_floor = sigma_floor
        self.engine = engine
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.tau = tau
        self.train_stride = train_stride
        self.yearly_harmonics = yearly_harmonics
        self.include_trend = include_trend
        self.holidays = holidays
        self.seed = seed

    def _windows_for_range(
        self, series: HourlySeries, start: datetime, end: datetime, stride: int
    ) -> tuple:
        i, j = series.index_range(start, end)
        residuals = self.deseasonalizer_.transform(series, start, end)
        features = [
            self.encoder_.encode(
                series.timestamps[k], series.drybulb_f[k], series.wetbulb_f[k]
            )
            for k in range(i, j)
        ]
        windows = make_windows(features, residuals.residuals, self.tau, stride)
        return [w.xs for w in windows], [w.target for w in windows]

    def fit(
        self,
        series: HourlySeries,
        train_start: datetime,
        train_end: datetime,
        val_start: datetime | None = None,
        val_end: datetime | None = None,
    ) -> "LoadForecastPipeline":
        self.encoder_ = CalendarFeatureEncoder(holidays=self.holidays).fit(
            series, train_start, train_end
        )
        self.deseasonalizer_ = HourlyDeseasonalizer(
            yearly_harmonics=self.yearly_harmonics,
            include_trend=self.include_trend,
            holidays=self.holidays,
        ).fit(series, train_start, train_end)

        X, y = self._windows_for_range(
            series, train_start, train_end, self.train_stride
        )
        validation = None
        if val_start is not None and val_end is not None:
            validation = self._windows_for_range(
                series, val_start, val_end, self.train_stride
            )
        self.forecaster_ = RnnForecaster(
            lags=self.lags,
            hidden_dim=self.hidden_dim,
            loss=self.loss,
            sigma_floor=self.sigma_floor,
            engine=self.engine,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
        ).fit(X, y, validation)
        return self

    def forecast_range(
        self, series: HourlySeries, start: datetime, end: datetime
    ) -> list:
        """Ex-post closed-loop forecasts for every hour in [start, end).

        Each hour runs a fresh window of length tau ending at that hour,
        feedbacks zero-initialized at the window start, exogenous inputs
        (calendar + realized weather) taken as known.
        """
        check_fitted(self, ["forecaster_"])
        i0, i1 = series.index_range(start, end)
        if i0 < self.tau - 1:
            raise DataValidationError(
                f"forecasting {start.isoformat()} needs {self.tau - 1} hours of "
                f"exogenous history before it"
            )
        features = self.encoder_.transform(series)
        out = []
        for k in range(i0, i1):
            xs = features[k - self.tau + 1 : k + 1]
            y_final = self.forecaster_.predict_output(xs)
            mu_z, sigma_z = self.forecaster_.head_.mean_and_sigma(y_final)
            ts = series.timestamps[k]
            s_z = self.deseasonalizer_.seasonal_at(ts)
            mu_log, sigma_log = self.deseasonalizer_.to_log_params(
                s_z + mu_z, sigma_z
            )
            if sigma_log is None:
                point = math.exp(mu_log)
            else:
                point = lognormal_mean(mu_log, sigma_log)
            out.append(
                ForecastDistribution(
                    timestamp=ts,
                    seasonal_z=s_z,
                    mu_z=mu_z,
                    sigma_z=sigma_z,
                    mu_log=mu_log,
                    sigma_log=sigma_log,
                    point=point,
                )
            )
        return out

    def evaluate(
        self, forecasts: list, series: HourlySeries
    ) -> MetricReport:
        realized = [
            series.demand_mwh[series.index_of(f.timestamp)] for f in forecasts
        ]
        points = [f.point for f in forecasts]
        if self.loss == "gaussian_nll":
            dists = [(f.mu_log, f.sigma_log) for f in forecasts]
            return probabilistic_metrics(points, dists, realized)
        return point_metrics(points, realized)

    def save(self, path: str) -> None:
        check_fitted(self, ["forecaster_"])
        flat = pack(self.forecaster_.params_, self.forecaster_.spec_)
        extras = {
            "pipeline_params": _jsonable_params(self.get_params()),
            "normalization": {
                "log_mean": self.deseasonalizer_.log_mean_,
                "log_std": self.deseasonalizer_.log_std_,
            },
            "seasonal": {
                "fit_origin": self.deseasonalizer_.fit_origin_.isoformat(),
                "coef": {str(h): c for h, c in self.deseasonalizer_.coef_.items()},
            },
            "encoder": {
                "drybulb_mean": self.encoder_.drybulb_mean_,
                "drybulb_std": self.encoder_.drybulb_std_,
                "wetbulb_mean": self.encoder_.wetbulb_mean_,
                "wetbulb_std": self.encoder_.wetbulb_std_,
            },
        }
        save_checkpoint(path, self.forecaster_.spec_, flat, extras)

    @classmethod
    def load(cls, path: str) -> "LoadForecastPipeline":
        spec, flat, extras = load_checkpoint(path)
        params = extras["pipeline_params"]
        params["holidays"] = frozenset(
            datetime.fromisoformat(d).date() for d in params.get("holidays", [])
        )
        params["lags"] = tuple(params["lags"])
        pipe = cls(**params)

        pipe.encoder_ = CalendarFeatureEncoder(holidays=pipe.holidays)
        enc = extras["encoder"]
        pipe.encoder_.drybulb_mean_ = enc["drybulb_mean"]
        pipe.encoder_.drybulb_std_ = enc["drybulb_std"]
        pipe.encoder_.wetbulb_mean_ = enc["wetbulb_mean"]
        pipe.encoder_.wetbulb_std_ = enc["wetbulb_std"]

        pipe.deseasonalizer_ = HourlyDeseasonalizer(
            yearly_harmonics=pipe.yearly_harmonics,
            include_trend=pipe.include_trend,
            holidays=pipe.holidays,
        )
        pipe.deseasonalizer_.log_mean_ = extras["normalization"]["log_mean"]
        pipe.deseasonalizer_.log_std_ = extras["normalization"]["log_std"]
        pipe.deseasonalizer_.fit_origin_ = datetime.fromisoformat(
            extras["seasonal"]["fit_origin"]
        )
        pipe.deseasonalizer_.coef_ = {
            int(h): list(c) for h, c in extras["seasonal"]["coef"].items()
        }
        pipe.deseasonalizer_.dropped_columns_ = {}

        fc = RnnForecaster(
            lags=pipe.lags,
            hidden_dim=spec.hidden_dim,
            loss=pipe.loss,
            sigma_floor=pipe.sigma_floor,
            engine=pipe.engine,
            learning_rate=pipe.learning_rate,
            batch_size=pipe.batch_size,
            max_epochs=pipe.max_epochs,
            patience=pipe.patience,
            seed=pipe.seed,
        )
        fc.spec_ = spec
        fc.params_ = unpack(flat, spec)
        fc.head_ = LossHead(kind=pipe.loss, sigma_floor=pipe.sigma_floor)
        fc.history_ = []
        pipe.forecaster_ = fc
        return pipe


def _jsonable_params(params: dict) -> dict:
    out = dict(params)
    out["lags"] = list(params["lags"])
    out["holidays"] = sorted(d.isoformat() for d in params["holidays"])
    return out


def write_forecast_csv(forecasts: list, path: str) -> None:
    """Forecast CSV: timestamp, point, lognormal parameters, 5%/95% quantiles."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FORECAST_CSV_HEADER)
        for fc in forecasts:
            if fc.sigma_log is None:
                q05 = q95 = ""
                sigma = ""
            else:
                q05 = repr(lognormal_quantile(fc.mu_log, fc.sigma_log, 0.05))
                q95 = repr(lognormal_quantile(fc.mu_log, fc.sigma_log, 0.95))
                sigma = repr(fc.sigma_log)
            writer.writerow(
                [
                    fc.timestamp.isoformat(),
                    repr(fc.point),
                    repr(fc.mu_log),
                    sigma,
                    q05,
                    q95,
                ]
            )


def read_forecast_csv(path: str) -> list:
    """Read back (timestamp, point, mu_log, sigma_log or None) rows."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != FORECAST_CSV_HEADER:
            raise DataValidationError(f"bad forecast header {reader.fieldnames!r}")
        for rec in reader:
            rows.append(
                (
                    datetime.fromisoformat(rec["timestamp"]),
                    float(rec["point"]),
                    float(rec["mu_log"]),
                    float(rec["sigma_log"]) if rec["sigma_log"] else None,
                )
            )
    return rows


@dataclass(frozen=True)
class WalkForwardSplit:
    train_start: datetime
    train_end: datetime
    test_start: datetime
    test_end: datetime


def build_walk_forward_plan(
    first_train_year: int, train_years: int, n_splits: int
) -> list:
    """Rolling splits: a fixed-length training window advancing one year.

    The first split's test year serves as the validation year for
    hyperparameter selection; later splits are proper test years.
    """
    if train_years < 1 or n_splits < 1:
        raise ValueError("train_years and n_splits must be >= 1")
    splits = []
    for k in range(n_splits):
        t0 = datetime(first_train_year + k, 1, 1)
        t1 = datetime(first_train_year + k + train_years, 1, 1)
        splits.append(
            WalkForwardSplit(
                train_start=t0,
                train_end=t1,
                test_start=t1,
                test_end=datetime(first_train_year + k + train_years + 1, 1, 1),
            )
        )
    return splits


@dataclass
class WalkForwardRow:
    lag_set: tuple
    test_year: int
    hidden_dim: int
    learning_rate: float
    batch_size: int
    report: MetricReport


def run_walk_forward(
    series: HourlySeries,
    splits: list,
    lag_sets: list,
    grid: HyperGrid,
    pipeline_kwargs: dict,
    train_stride: int = 1,
) -> list:
    """Hyperparameters from the first split, then roll and re-test.

    For each lag set, the grid is searched once with the first split's
    test year as validation; the winning cell is frozen and every split is
    retrained and evaluated with it.  Returns one row per (lag set, test
    year).
    """
    if not splits:
        raise ValueError("empty walk-forward plan")
    rows = []
    for lag_set in lag_sets:
        kwargs = dict(pipeline_kwargs)
        kwargs["lags"] = tuple(lag_set)
        kwargs["train_stride"] = train_stride

        probe = LoadForecastPipeline(**kwargs)
        first = splits[0]
        probe.encoder_ = CalendarFeatureEncoder(holidays=probe.holidays).fit(
            series, first.train_start, first.train_end
        )
        probe.deseasonalizer_ = HourlyDeseasonalizer(
            yearly_harmonics=probe.yearly_harmonics,
            include_trend=probe.include_trend,
            holidays=probe.holidays,
        ).fit(series, first.train_start, first.train_end)
        X, y = probe._windows_for_range(
            series, first.train_start, first.train_end, train_stride
        )
        Xv, yv = probe._windows_for_range(
            series, first.test_start, first.test_end, train_stride
        )
        head = LossHead(kind=probe.loss, sigma_floor=probe.sigma_floor)
        base_spec = RnnSpec(
            lag_set=tuple(lag_set),
            x_dim=len(X[0][0]),
            hidden_dim=probe.hidden_dim,
            y_dim=head.y_dim,
        )
        config = TrainConfig(
            learning_rate=probe.learning_rate,
            batch_size=probe.batch_size,
            max_epochs=probe.max_epochs,
            patience=probe.patience,
            seed=probe.seed,
        )
        cells = grid_search(
            base_spec,
            _as_windows(X, y),
            _as_windows(Xv, yv),
            head,
            probe.engine,
            grid,
            config,
        )
        best = cells[0]

        for split in splits:
            kwargs_run = dict(kwargs)
            kwargs_run["hidden_dim"] = best.hidden_dim
            kwargs_run["learning_rate"] = best.learning_rate
            kwargs_run["batch_size"] = best.batch_size
            pipe = LoadForecastPipeline(**kwargs_run)
            pipe.fit(series, split.train_start, split.train_end)
            forecasts = pipe.forecast_range(
                series, split.test_start, split.test_end
            )
            rows.append(
                WalkForwardRow(
                    lag_set=tuple(lag_set),
                    test_year=split.test_start.year,
                    hidden_dim=best.hidden_dim,
                    learning_rate=best.learning_rate,
                    batch_size=best.batch_size,
                    report=pipe.evaluate(forecasts, series),
                )
            )
    return rows
