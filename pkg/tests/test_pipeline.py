"""End-to-end pipeline behavior at desk scale.

The heavyweight accuracy/calibration checks live in test_acceptance; these
tests pin the assembly semantics: zero-network identities, checkpoint
round-trips, forecast file formats, and the walk-forward driver shape.
"""

import math
from datetime import datetime

import pytest

from rnnp.base import DataValidationError
from rnnp.linalg import Matrix, Rng
from rnnp.model import ModelParams
from rnnp.pipeline import (
    LoadForecastPipeline,
    build_walk_forward_plan,
    read_forecast_csv,
    run_walk_forward,
    write_forecast_csv,
)
from rnnp.synth import SynthConfig, synth_generate
from rnnp.training import HyperGrid, softplus


def make_series(years=2, seed=50, **overrides):
    series, truth = synth_generate(SynthConfig(years=years, **overrides), Rng(seed))
    return series, truth


def quick_pipeline(**overrides):
    kwargs = dict(
        lags=(1,),
        hidden_dim=3,
        loss="gaussian_nll",
        learning_rate=5e-3,
        batch_size=32,
        max_epochs=2,
        patience=10,
        tau=12,
        train_stride=48,
        seed=9,
    )
    kwargs.update(overrides)
    return LoadForecastPipeline(**kwargs)


def zero_out(pipe):
    spec = pipe.forecaster_.spec_
    pipe.forecaster_.params_ = ModelParams(
        U=Matrix.zeros(spec.hidden_dim, spec.x_dim),
        W=[Matrix.zeros(spec.hidden_dim, spec.y_dim) for _ in spec.lag_set],
        b=[0.0] * spec.hidden_dim,
        V=Matrix.zeros(spec.y_dim, spec.hidden_dim),
        c=[0.0] * spec.y_dim,
    )


class TestZeroNetworkIdentities:
    def test_point_head_reduces_to_seasonal_forecast(self):
        series, _ = make_series(years=1, seed=51)
        pipe = quick_pipeline(loss="mse", max_epochs=1)
        pipe.fit(series, series.start, series.end)
        zero_out(pipe)
        start, end = datetime(2007, 6, 1), datetime(2007, 6, 3)
        forecasts = pipe.forecast_range(series, start, end)
        deseason = pipe.deseasonalizer_
        for f in forecasts:
            want = math.exp(
                deseason.log_mean_
                + deseason.log_std_ * deseason.seasonal_at(f.timestamp)
            )
            assert f.point == want  # bitwise: the network contributes nothing
            assert f.sigma_log is None

    def test_gaussian_head_sigma_at_rest_value(self):
        series, _ = make_series(years=1, seed=52)
        pipe = quick_pipeline(max_epochs=1)
        pipe.fit(series, series.start, series.end)
        zero_out(pipe)
        f = pipe.forecast_range(series, datetime(2007, 7, 1), datetime(2007, 7, 1, 6))
        rest_sigma = softplus(0.0) + pipe.sigma_floor
        for fc in f:
            assert fc.sigma_z == pytest.approx(rest_sigma, rel=1e-12)
            assert fc.mu_z == 0.0


class TestNoiselessRecovery:
    def test_point_pipeline_on_pure_seasonal_signal(self):
        """With no noise and no weather response the linear stage explains
        everything; the trained network only has to stay out of the way."""
        config = SynthConfig(
            years=2,
            noise_sigma=0.0,
            ar1=0.0,
            ar24=0.0,
            temp_coeff=0.0,
            temp_coeff_lag24=0.0,
        )
        series, _ = synth_generate(config, Rng(60))
        pipe = LoadForecastPipeline(
            lags=(1,),
            hidden_dim=4,
            loss="mse",
            learning_rate=0.02,
            batch_size=32,
            max_epochs=15,
            patience=15,
            tau=12,
            train_stride=7,
            seed=2,
        )
        pipe.fit(series, datetime(2007, 1, 1), datetime(2008, 1, 1))
        forecasts = pipe.forecast_range(
            series, datetime(2008, 2, 1), datetime(2008, 3, 1)
        )
        report = pipe.evaluate(forecasts, series)
        assert report.mape_pct < 0.5


class TestForecastAssembly:
    def test_probabilistic_point_is_lognormal_mean(self):
        series, _ = make_series(years=1, seed=53)
        pipe = quick_pipeline()
        pipe.fit(series, series.start, series.end)
        forecasts = pipe.forecast_range(
            series, datetime(2007, 5, 1), datetime(2007, 5, 2)
        )
        for f in forecasts:
            want = math.exp(f.mu_log + 0.5 * f.sigma_log**2)
            assert f.point == pytest.approx(want, rel=1e-14)
            assert f.sigma_log > 0.0

    def test_needs_window_history(self):
        series, _ = make_series(years=1, seed=54)
        pipe = quick_pipeline(tau=49)
        pipe.fit(series, series.start, series.end)
        with pytest.raises(DataValidationError, match="history"):
            pipe.forecast_range(series, series.start, datetime(2007, 1, 2))

    def test_forecast_csv_round_trip(self, tmp_path):
        series, _ = make_series(years=1, seed=55)
        pipe = quick_pipeline()
        pipe.fit(series, series.start, series.end)
        forecasts = pipe.forecast_range(
            series, datetime(2007, 3, 1), datetime(2007, 3, 1, 12)
        )
        path = str(tmp_path / "forecast.csv")
        write_forecast_csv(forecasts, path)
        rows = read_forecast_csv(path)
        assert len(rows) == len(forecasts)
        for row, f in zip(rows, forecasts):
            assert row[0] == f.timestamp
            assert row[1] == f.point
            assert row[2] == f.mu_log
            assert row[3] == f.sigma_log

    def test_point_head_csv_leaves_distribution_columns_empty(self, tmp_path):
        series, _ = make_series(years=1, seed=59)
        pipe = quick_pipeline(loss="mse")
        pipe.fit(series, series.start, series.end)
        forecasts = pipe.forecast_range(
            series, datetime(2007, 3, 2), datetime(2007, 3, 2, 6)
        )
        path = str(tmp_path / "forecast.csv")
        write_forecast_csv(forecasts, path)
        rows = read_forecast_csv(path)
        assert all(sigma is None for _, _, _, sigma in rows)
        with open(path) as f:
            assert f.read().count(",,") > 0  # empty quantile columns


class TestCheckpoint:
    def test_save_load_reproduces_forecasts(self, tmp_path):
        series, _ = make_series(years=1, seed=56)
        pipe = quick_pipeline()
        pipe.fit(series, series.start, series.end)
        start, end = datetime(2007, 4, 1), datetime(2007, 4, 1, 8)
        want = pipe.forecast_range(series, start, end)
        path = str(tmp_path / "model.rnnp.json")
        pipe.save(path)
        again = LoadForecastPipeline.load(path)
        got = again.forecast_range(series, start, end)
        assert [f.point for f in got] == [f.point for f in want]
        assert [f.mu_log for f in got] == [f.mu_log for f in want]
        assert again.get_params() == pipe.get_params()


class TestWalkForward:
    def test_plan_shape(self):
        plan = build_walk_forward_plan(2007, 4, 3)
        assert len(plan) == 3
        assert plan[0].train_start == datetime(2007, 1, 1)
        assert plan[0].train_end == plan[0].test_start == datetime(2011, 1, 1)
        assert plan[2].train_start == datetime(2009, 1, 1)
        assert plan[2].test_end == datetime(2014, 1, 1)

    def test_single_split_degenerates_to_train_validate_test(self):
        series, _ = make_series(years=2, seed=57)
        plan = build_walk_forward_plan(2007, 1, 1)
        rows = run_walk_forward(
            series,
            plan,
            lag_sets=[(1,)],
            grid=HyperGrid(hidden_dims=(3,), learning_rates=(5e-3,), batch_sizes=(32,)),
            pipeline_kwargs=dict(
                loss="mse", max_epochs=2, patience=5, tau=12, seed=3
            ),
            train_stride=96,
        )
        assert len(rows) == 1
        assert rows[0].test_year == 2008
        assert rows[0].report.rmse_mwh > 0.0

    def test_one_row_per_lag_set_and_year(self):
        series, _ = make_series(years=3, seed=58)
        plan = build_walk_forward_plan(2007, 1, 2)
        rows = run_walk_forward(
            series,
            plan,
            lag_sets=[(1,), (1, 2)],
            grid=HyperGrid(hidden_dims=(3,), learning_rates=(5e-3,), batch_sizes=(32,)),
            pipeline_kwargs=dict(
                loss="mse", max_epochs=1, patience=5, tau=12, seed=4
            ),
            train_stride=96,
        )
        assert [(r.lag_set, r.test_year) for r in rows] == [
            ((1,), 2008),
            ((1,), 2009),
            ((1, 2), 2008),
            ((1, 2), 2009),
        ]
