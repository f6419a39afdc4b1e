"""Dense linear-algebra kernels, deterministic RNG, and operation counters.

Everything here is plain CPython ``float`` arithmetic over lists.  Each
kernel fixes its summation order explicitly (accumulation over the inner
index in increasing order), so results are bit-identical across runs and
platforms and match a naive double-loop reference exactly.  That
reproducibility is contractual: the gradient engines are compared against
each other at tight tolerances, and their cost is accounted by exact
multiply-accumulate tallies rather than wall time.

Matrices and vectors are treated as immutable after construction and are
safe to share between threads; an ``OpCounter`` belongs to one gradient
call and must not be shared across concurrent calls.
"""

from __future__ import annotations

import math
import random

from .base import NumericError

Vector = list  # list[float]; vectors are plain lists of floats


class OpCounter:
    """Tally of scalar multiply-accumulates and peak gradient-state floats.

    ``mac_count`` counts every scalar multiply that feeds an accumulation
    (pure additions are free).  ``peak_floats`` is a high-water mark of the
    float values a gradient algorithm keeps alive across time steps, fed by
    the owning engine through :meth:`grad_floats_alloc` /
    :meth:`grad_floats_free`.  Both tallies only ever grow within a call.
    """

    __slots__ = ("mac_count", "peak_floats", "_live_floats")

    def __init__(self) -> None:
        self.mac_count = 0
        self.peak_floats = 0
        self._live_floats = 0

    def add_macs(self, n: int) -> None:
        self.mac_count += n

    def grad_floats_alloc(self, n: int) -> None:
        self._live_floats += n
        if self._live_floats > self.peak_floats:
            self.peak_floats = self._live_floats

    def grad_floats_free(self, n: int) -> None:
        self._live_floats -= n

    def __repr__(self) -> str:
        return f"OpCounter(mac_count={self.mac_count}, peak_floats={self.peak_floats})"


class Matrix:
    """Row-major dense matrix of 64-bit floats."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list) -> None:
        if rows < 0 or cols < 0:
            raise ValueError(f"negative matrix shape {rows}x{cols}")
        if len(data) != rows * cols:
            raise ValueError(
                f"matrix data length {len(data)} does not match shape {rows}x{cols}"
            )
        for v in data:
            if not math.isfinite(v):
                raise NumericError(f"non-finite matrix entry {v!r}")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, [0.0] * (rows * cols))

    @classmethod
    def from_rows(cls, rows: list) -> "Matrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if n_rows else 0
        flat: list = []
        for r in rows:
            if len(r) != n_cols:
                raise ValueError("ragged rows")
            flat.extend(float(v) for v in r)
        return cls(n_rows, n_cols, flat)

    def at(self, r: int, c: int) -> float:
        return self.data[r * self.cols + c]

    def row(self, r: int) -> list:
        base = r * self.cols
        return self.data[base : base + self.cols]

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.cols, list(self.data))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"


def matvec(m: Matrix, v: list, counter: OpCounter | None = None) -> list:
    """m @ v with accumulation over columns in increasing index.

    Counts exactly ``rows * cols`` multiply-accumulates.
    """
    if m.cols != len(v):
        raise ValueError(f"matvec shape mismatch: {m.rows}x{m.cols} @ {len(v)}")
    data = m.data
    out = []
    base = 0
    for _ in range(m.rows):
        acc = 0.0
        for c in range(m.cols):
            acc += data[base + c] * v[c]
        out.append(acc)
        base += m.cols
    if counter is not None:
        counter.add_macs(m.rows * m.cols)
    return out


def matvec_t(m: Matrix, v: list, counter: OpCounter | None = None) -> list:
    """m.T @ v with accumulation over rows in increasing index.

    Counts exactly ``rows * cols`` multiply-accumulates.
    """
    if m.rows != len(v):
        raise ValueError(f"matvec_t shape mismatch: {m.cols}x{m.rows} @ {len(v)}")
    data = m.data
    cols = m.cols
    out = [0.0] * cols
    base = 0
    for r in range(m.rows):
        vr = v[r]
        for c in range(cols):
            out[c] += data[base + c] * vr
        base += cols
    if counter is not None:
        counter.add_macs(m.rows * cols)
    return out


def matmat(a: Matrix, b: Matrix, counter: OpCounter | None = None) -> Matrix:
    """a @ b with accumulation over the inner index in increasing order.

    Counts exactly ``a.rows * a.cols * b.cols`` multiply-accumulates.
    """
    if a.cols != b.rows:
        raise ValueError(
            f"matmat shape mismatch: {a.rows}x{a.cols} @ {b.rows}x{b.cols}"
        )
    ad, bd = a.data, b.data
    inner, out_cols = a.cols, b.cols
    out = [0.0] * (a.rows * out_cols)
    for r in range(a.rows):
        abase = r * inner
        obase = r * out_cols
        for k in range(inner):
            ark = ad[abase + k]
            bbase = k * out_cols
            for c in range(out_cols):
                out[obase + c] += ark * bd[bbase + c]
    if counter is not None:
        counter.add_macs(a.rows * inner * out_cols)
    return Matrix(a.rows, out_cols, out)


def diag_scale(d: list, v: list, counter: OpCounter | None = None) -> list:
    """Elementwise product diag(d) @ v; counts ``len(d)`` multiplies."""
    if len(d) != len(v):
        raise ValueError(f"diag_scale length mismatch: {len(d)} vs {len(v)}")
    if counter is not None:
        counter.add_macs(len(d))
    return [d[i] * v[i] for i in range(len(d))]


def dot(a: list, b: list, counter: OpCounter | None = None) -> float:
    """Inner product with left-to-right accumulation; counts ``len(a)`` MACs."""
    if len(a) != len(b):
        raise ValueError(f"dot length mismatch: {len(a)} vs {len(b)}")
    acc = 0.0
    for i in range(len(a)):
        acc += a[i] * b[i]
    if counter is not None:
        counter.add_macs(len(a))
    return acc


class Rng:
    """Deterministic random stream: identical seed, identical values.

    Backed by the standard Mersenne Twister, whose ``random()`` output is
    guaranteed stable across CPython versions.  Normal deviates are drawn
    by inverse-CDF on ``random()`` so they inherit the same guarantee.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._gen = random.Random(seed)

    def spawn(self, stream: int) -> "Rng":
        """Derive an independent, reproducible child stream."""
        return Rng((self.seed * 1000003 + stream + 1) & 0xFFFFFFFFFFFFFFFF)

    def uniform(self, lo: float, hi: float, n: int) -> list:
        if lo >= hi:
            raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
        if n < 0:
            raise ValueError(f"negative sample count {n}")
        width = hi - lo
        rnd = self._gen.random
        return [lo + width * rnd() for _ in range(n)]

    def normal(self, mu: float, sigma: float, n: int) -> list:
        from .stats import normal_ppf

        if sigma < 0:
            raise ValueError(f"negative sigma {sigma}")
        rnd = self._gen.random
        out = []
        for _ in range(n):
            u = rnd()
            while u <= 0.0:  # guard the open interval for the inverse CDF
                u = rnd()
            out.append(mu + sigma * normal_ppf(u))
        return out

    def shuffle(self, items: list) -> None:
        self._gen.shuffle(items)

    def randint(self, lo: int, hi: int) -> int:
        return self._gen.randint(lo, hi)


def rand_uniform(rng: Rng, lo: float, hi: float, n: int) -> list:
    """n i.i.d. samples from U[lo, hi); deterministic per seed."""
    return rng.uniform(lo, hi, n)
