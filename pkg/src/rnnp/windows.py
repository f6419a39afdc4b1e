"""Sliding many-to-one training windows over a residual series."""

from __future__ import annotations

from .training import TrainingWindow


def make_windows(
    features: list, residuals: list, tau: int = 49, stride: int = 1
) -> list:
    """Overlapping windows: tau feature rows, target = residual at the end.

    With stride 1 the count is ``len(residuals) - tau + 1``.  Feature rows
    are shared by reference between overlapping windows, so the cost is
    per-window bookkeeping, not tau copies.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n = len(residuals)
    if len(features) != n:
        raise ValueError(
            f"features ({len(features)}) and residuals ({n}) differ in length"
        )
    if n < tau:
        raise ValueError(f"series of length {n} is shorter than tau={tau}")
    windows = []
    for end in range(tau - 1, n, stride):
        windows.append(
            TrainingWindow(
                xs=features[end - tau + 1 : end + 1], target=residuals[end]
            )
        )
    return windows
