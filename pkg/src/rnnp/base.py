"""Estimator plumbing and shared exceptions.

The estimator classes in this package follow the scikit-learn protocol
(``fit`` returns ``self``, constructor arguments are stored verbatim,
fitted state lives in trailing-underscore attributes, ``get_params`` /
``set_params`` round-trip).  The mixin below provides the protocol without
pulling in scikit-learn itself; estimators built on it still compose with
tools that duck-type against the protocol.
"""

from __future__ import annotations

import inspect
import math
from typing import Any, Iterable


class RnnpError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(RnnpError):
    """Invalid configuration (bad key, bad value, inconsistent options)."""


class DataValidationError(RnnpError):
    """Input data violates a structural contract (gaps, duplicates, signs)."""


class NumericError(RnnpError):
    """A numeric computation produced a non-finite or out-of-range value."""


class NotFittedError(RnnpError):
    """An estimator method that requires ``fit`` was called before ``fit``."""


class BaseEstimator:
    """Minimal scikit-learn-style parameter handling.

    Constructor arguments are discovered by introspection, so subclasses
    must store every ``__init__`` argument under the same attribute name
    and do no other work in ``__init__``.
    """

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep: bool = True) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params: Any) -> "BaseEstimator":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ConfigError(
                    f"unknown parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def check_fitted(estimator: Any, attributes: Iterable[str]) -> None:
    """Raise :class:`NotFittedError` unless all fitted attributes exist."""
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet "
            f"(missing {', '.join(missing)}); call fit() first"
        )


def check_finite_values(values: Iterable[float], what: str) -> None:
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise NumericError(f"non-finite value {v!r} in {what} at index {i}")


def check_positive(value: float, what: str) -> None:
    if not value > 0:
        raise ConfigError(f"{what} must be positive, got {value!r}")
