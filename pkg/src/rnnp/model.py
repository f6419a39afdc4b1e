"""Shallow Jordan recurrent networks over an arbitrary lag set.

The model maps an input sequence {x(1..t)} to outputs through

    a(t) = b + U x(t) + sum_l W_l yhat(t - l)      for l in the lag set
    h(t) = sigmoid(a(t))
    yhat(t) = c + V h(t)

with yhat(s) = 0 for s <= 0.  Feedbacks are the model's own previous
outputs, so a sequence is processed closed-loop from a zero start.  The
lag set need not be contiguous: {1, 2, 24} wires hourly and daily
feedbacks directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .base import NumericError
from .linalg import Matrix, OpCounter, Rng, matvec

CHECKPOINT_MAGIC = "RNNP1"


@dataclass(frozen=True)
class RnnSpec:
    """Architecture description: lag set and layer widths."""

    lag_set: tuple
    x_dim: int
    hidden_dim: int
    y_dim: int
    hidden_activation: str = "sigmoid"

    def __post_init__(self) -> None:
        lags = tuple(int(l) for l in self.lag_set)
        object.__setattr__(self, "lag_set", lags)
        if not lags:
            raise ValueError("lag set must contain at least one lag")
        if any(l < 1 for l in lags):
            raise ValueError(f"lags must be >= 1, got {lags}")
        if any(b <= a for a, b in zip(lags, lags[1:])):
            raise ValueError(f"lag set must be strictly increasing, got {lags}")
        for name in ("x_dim", "hidden_dim", "y_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.hidden_activation != "sigmoid":
            raise ValueError(
                f"unsupported hidden activation {self.hidden_activation!r}"
            )

    @property
    def p(self) -> int:
        return len(self.lag_set)

    @property
    def max_lag(self) -> int:
        return self.lag_set[-1]

    @property
    def theta_size(self) -> int:
        """Input-to-hidden parameter count: (x + p*y + 1) * h."""
        return (self.x_dim + self.p * self.y_dim + 1) * self.hidden_dim

    @property
    def phi_size(self) -> int:
        """Hidden-to-output parameter count: (h + 1) * y."""
        return (self.hidden_dim + 1) * self.y_dim

    @property
    def weight_count(self) -> int:
        return self.theta_size + self.phi_size

    def to_dict(self) -> dict:
        return {
            "lag_set": list(self.lag_set),
            "x_dim": self.x_dim,
            "hidden_dim": self.hidden_dim,
            "y_dim": self.y_dim,
            "hidden_activation": self.hidden_activation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RnnSpec":
        return cls(
            lag_set=tuple(d["lag_set"]),
            x_dim=d["x_dim"],
            hidden_dim=d["hidden_dim"],
            y_dim=d["y_dim"],
            hidden_activation=d.get("hidden_activation", "sigmoid"),
        )


@dataclass
class ModelParams:
    """Trainable parameters: U (h x x), W_l (h x y) per lag, b, V (y x h), c."""

    U: Matrix
    W: list
    b: list
    V: Matrix
    c: list

    def validate(self, spec: RnnSpec) -> None:
        h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim
        if (self.U.rows, self.U.cols) != (h, x):
            raise ValueError(f"U is {self.U.rows}x{self.U.cols}, expected {h}x{x}")
        if len(self.W) != spec.p:
            raise ValueError(f"expected {spec.p} lag matrices, got {len(self.W)}")
        for i, w in enumerate(self.W):
            if (w.rows, w.cols) != (h, y):
                raise ValueError(
                    f"W[{i}] is {w.rows}x{w.cols}, expected {h}x{y}"
                )
        if len(self.b) != h:
            raise ValueError(f"b has length {len(self.b)}, expected {h}")
        if (self.V.rows, self.V.cols) != (y, h):
            raise ValueError(f"V is {self.V.rows}x{self.V.cols}, expected {y}x{h}")
        if len(self.c) != y:
            raise ValueError(f"c has length {len(self.c)}, expected {y}")

    def copy(self) -> "ModelParams":
        return ModelParams(
            U=self.U.copy(),
            W=[w.copy() for w in self.W],
            b=list(self.b),
            V=self.V.copy(),
            c=list(self.c),
        )


@dataclass(frozen=True)
class FlatParams:
    """Packed parameter vectors.

    theta packs U row-major, then each W_l row-major in lag-set order,
    then b; phi packs V row-major then c.  The flat index of U[0][0] is 0.
    """

    theta: list
    phi: list


def theta_offsets(spec: RnnSpec) -> tuple:
    """(u_offset, [w_offset per lag], b_offset) into the theta vector."""
    h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim
    u_off = 0
    w_offs = [h * x + i * h * y for i in range(spec.p)]
    b_off = h * x + spec.p * h * y
    return u_off, w_offs, b_off


def phi_offsets(spec: RnnSpec) -> tuple:
    """(v_offset, c_offset) into the phi vector."""
    return 0, spec.y_dim * spec.hidden_dim


def pack(params: ModelParams, spec: RnnSpec) -> FlatParams:
    params.validate(spec)
    theta: list = []
    theta.extend(params.U.data)
    for w in params.W:
        theta.extend(w.data)
    theta.extend(params.b)
    phi: list = []
    phi.extend(params.V.data)
    phi.extend(params.c)
    return FlatParams(theta=theta, phi=phi)


def unpack(flat: FlatParams, spec: RnnSpec) -> ModelParams:
    h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim
    if len(flat.theta) != spec.theta_size:
        raise ValueError(
            f"theta has length {len(flat.theta)}, expected {spec.theta_size}"
        )
    if len(flat.phi) != spec.phi_size:
        raise ValueError(f"phi has length {len(flat.phi)}, expected {spec.phi_size}")
    _, w_offs, b_off = theta_offsets(spec)
    U = Matrix(h, x, list(flat.theta[0 : h * x]))
    W = [
        Matrix(h, y, list(flat.theta[off : off + h * y])) for off in w_offs
    ]
    b = list(flat.theta[b_off : b_off + h])
    v_off, c_off = phi_offsets(spec)
    V = Matrix(y, h, list(flat.phi[v_off : v_off + y * h]))
    c = list(flat.phi[c_off : c_off + y])
    return ModelParams(U=U, W=W, b=b, V=V, c=c)


def init_params(spec: RnnSpec, rng: Rng) -> ModelParams:
    """Glorot-uniform weights, zero biases.

    Each matrix is drawn U[-r, r] with r = sqrt(6 / (fan_in + fan_out)),
    which keeps sigmoid pre-activations in their responsive range.
    """
    h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim

    def draw(rows: int, cols: int, fan_in: int, fan_out: int) -> Matrix:
        r = math.sqrt(6.0 / (fan_in + fan_out))
        return Matrix(rows, cols, rng.uniform(-r, r, rows * cols))

    return ModelParams(
        U=draw(h, x, x, h),
        W=[draw(h, y, y, h) for _ in spec.lag_set],
        b=[0.0] * h,
        V=draw(y, h, h, y),
        c=[0.0] * y,
    )


def sigmoid(a: float) -> float:
    if a >= 0.0:
        return 1.0 / (1.0 + math.exp(-a))
    e = math.exp(a)
    return e / (1.0 + e)


def sigmoid_vec(a: list) -> list:
    return [sigmoid(v) for v in a]


@dataclass
class ForwardTrace:
    """Per-step activations of one processed sequence (1-based step t)."""

    xs: list
    a_steps: list = field(default_factory=list)
    h_steps: list = field(default_factory=list)
    y_steps: list = field(default_factory=list)
    _zero_y: list = field(default_factory=list)

    @property
    def tau(self) -> int:
        return len(self.xs)

    def y_at(self, t: int) -> list:
        """Output at step t, the zero vector for t <= 0."""
        if t <= 0:
            return self._zero_y
        return self.y_steps[t - 1]

    @property
    def y_final(self) -> list:
        return self.y_steps[-1]


def forward_step(
    params: ModelParams,
    spec: RnnSpec,
    x_t: list,
    past_outputs,
    counter: OpCounter | None = None,
) -> tuple:
    """One step of the recurrence; ``past_outputs(lag)`` supplies feedbacks.

    The callback must return the zero vector for any step index <= 0.
    Returns (a, h, yhat).
    """
    if len(x_t) != spec.x_dim:
        raise ValueError(f"input has length {len(x_t)}, expected {spec.x_dim}")
    a = matvec(params.U, x_t, counter)
    for i in range(spec.hidden_dim):
        a[i] += params.b[i]
    for W_l, lag in zip(params.W, spec.lag_set):
        fb = past_outputs(lag)
        wf = matvec(W_l, fb, counter)
        for i in range(spec.hidden_dim):
            a[i] += wf[i]
    h = sigmoid_vec(a)
    y = matvec(params.V, h, counter)
    for k in range(spec.y_dim):
        y[k] += params.c[k]
    return a, h, y


def forward_sequence(
    params: ModelParams,
    spec: RnnSpec,
    xs: list,
    counter: OpCounter | None = None,
) -> ForwardTrace:
    """Closed-loop forward pass over a sequence of input vectors.

    Feedbacks are the model's own outputs from earlier steps of the same
    window; steps before the window start contribute zero vectors.
    """
    if not xs:
        raise ValueError("empty input sequence")
    trace = ForwardTrace(xs=xs, _zero_y=[0.0] * spec.y_dim)
    for t in range(1, len(xs) + 1):
        a, h, y = forward_step(
            params, spec, xs[t - 1], lambda lag, _t=t: trace.y_at(_t - lag), counter
        )
        for v in a:
            if not math.isfinite(v):
                raise NumericError(f"non-finite pre-activation at step {t}")
        for v in y:
            if not math.isfinite(v):
                raise NumericError(f"non-finite output at step {t}")
        trace.a_steps.append(a)
        trace.h_steps.append(h)
        trace.y_steps.append(y)
    return trace


def save_checkpoint(
    path: str,
    spec: RnnSpec,
    flat: FlatParams,
    extras: dict | None = None,
) -> None:
    """Write a versioned JSON checkpoint (magic ``RNNP1``).

    ``extras`` carries pipeline state (normalization statistics, seasonal
    coefficients, encoder state); the schema is documented in the README.
    """
    record = {
        "magic": CHECKPOINT_MAGIC,
        "spec": spec.to_dict(),
        "theta": list(flat.theta),
        "phi": list(flat.phi),
        "extras": extras or {},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(record, f)


def load_checkpoint(path: str) -> tuple:
    """Read a checkpoint; returns (spec, flat_params, extras)."""
    with open(path, "r", encoding="utf-8") as f:
        record = json.load(f)
    if record.get("magic") != CHECKPOINT_MAGIC:
        raise ValueError(
            f"not a model checkpoint (magic {record.get('magic')!r}, "
            f"expected {CHECKPOINT_MAGIC!r})"
        )
    spec = RnnSpec.from_dict(record["spec"])
    flat = FlatParams(
        theta=[float(v) for v in record["theta"]],
        phi=[float(v) for v in record["phi"]],
    )
    if len(flat.theta) != spec.theta_size or len(flat.phi) != spec.phi_size:
        raise ValueError("checkpoint parameter lengths do not match its spec")
    return spec, flat, record.get("extras", {})
