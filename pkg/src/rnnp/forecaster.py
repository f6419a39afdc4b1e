"""Scikit-learn-style regressor over many-to-one sequence windows."""

from __future__ import annotations

import math

from .base import BaseEstimator, check_fitted
from .linalg import Rng
from .model import forward_sequence, init_params, RnnSpec
from .training import LossHead, TrainConfig, TrainingWindow, train


def _as_windows(X, y) -> list:
    """Validate (X, y) into training windows.

    X is a sequence of windows, each a rectangular list of equally sized
    feature rows; y holds one finite target per window.
    """
    if len(X) == 0:
        raise ValueError("X is empty")
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} windows but y has {len(y)} targets")
    x_dim = len(X[0][0])
    tau = len(X[0])
    windows = []
    for wi, (xs, target) in enumerate(zip(X, y)):
        if len(xs) != tau:
            raise ValueError(f"window {wi} has length {len(xs)}, expected {tau}")
        for row in xs:
            if len(row) != x_dim:
                raise ValueError(f"window {wi} has a row of width {len(row)}")
            for v in row:
                if not math.isfinite(v):
                    raise ValueError(f"window {wi} contains a non-finite input")
        t = float(target)
        if not math.isfinite(t):
            raise ValueError(f"target {wi} is not finite")
        windows.append(TrainingWindow(xs=xs, target=t))
    return windows


class RnnForecaster(BaseEstimator):
    """Recurrent regressor: fit on windows, predict the final-step value.

    ``loss="mse"`` trains a scalar point head; ``loss="gaussian_nll"``
    trains a two-output head predicting mean and standard deviation, in
    which case ``predict`` returns the mean and ``predict_dist`` the
    (mean, sigma) pairs.
    """

    def __init__(
        self,
        lags: tuple = (1,),
        hidden_dim: int = 10,
        loss: str = "mse",
        sigma_floor: float = 1e-4,
        engine: str = "trrl",
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        max_epochs: int = 500,
        patience: int = 100,
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
        self.seed = seed

    def fit(self, X, y, validation: tuple | None = None) -> "RnnForecaster":
        windows = _as_windows(X, y)
        val_windows = _as_windows(*validation) if validation is not None else None
        head = LossHead(kind=self.loss, sigma_floor=self.sigma_floor)
        spec = RnnSpec(
            lag_set=tuple(self.lags),
            x_dim=len(windows[0].xs[0]),
            hidden_dim=self.hidden_dim,
            y_dim=head.y_dim,
        )
        config = TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
        )
        params = init_params(spec, Rng(self.seed))
        self.head_ = head
        self.spec_ = spec
        self.params_, self.history_ = train(
            params, spec, windows, self.engine, head, config, val_windows
        )
        return self

    def predict_output(self, xs: list) -> list:
        """Raw final output vector for one window."""
        check_fitted(self, ["params_"])
        return forward_sequence(self.params_, self.spec_, xs).y_final

    def predict(self, X) -> list:
        """Predicted mean of the final-step target, one value per window."""
        check_fitted(self, ["params_"])
        return [self.head_.mean_and_sigma(self.predict_output(xs))[0] for xs in X]

    def predict_dist(self, X) -> list:
        """(mean, sigma) pairs; sigma is None under the point head."""
        check_fitted(self, ["params_"])
        return [self.head_.mean_and_sigma(self.predict_output(xs)) for xs in X]
