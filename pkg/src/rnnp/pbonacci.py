"""Generalized Fibonacci (p-bonacci) sequences in exact integer arithmetic.

A p-bonacci sequence starts at X_1 = 1 and each later term sums the up to
p preceding terms; its partial sums S_n count the macronodes of the
unrolled recurrent network with contiguous lags 1..p, which is why their
exponential growth matters here.  All arithmetic is exact and checked
against a 128-bit unsigned ceiling: growth past that bound raises instead
of silently producing a wrong figure.
"""

from __future__ import annotations

from dataclasses import dataclass

U128_MAX = (1 << 128) - 1


def _checked(value: int, what: str) -> int:
    if value > U128_MAX:
        raise OverflowError(f"{what} exceeds 128 unsigned bits")
    return value


@dataclass(frozen=True)
class PbonacciTable:
    """Terms X_1..X_n and partial sums S_1..S_n for one order p."""

    p: int
    values: tuple
    sums: tuple

    @property
    def n(self) -> int:
        return len(self.values)


def build_table(p: int, n: int) -> PbonacciTable:
    """Exact table of the first n terms and partial sums."""
    if p < 2:
        raise ValueError(f"order p must be >= 2, got {p}")
    if n < 1:
        raise ValueError(f"table length must be >= 1, got {n}")
    values = [1]
    sums = [1]
    for i in range(2, n + 1):
        lo = max(1, i - p)
        term = sum(values[lo - 1 : i - 1])
        values.append(_checked(term, f"X_{i}"))
        sums.append(_checked(sums[-1] + term, f"S_{i}"))
    return PbonacciTable(p=p, values=tuple(values), sums=tuple(sums))


@dataclass(frozen=True)
class BoundCheck:
    n: int
    s_n: int
    lower_ok: bool  # S_n^2 >= 2^(n-1), i.e. S_n >= sqrt(2)^(n-1)
    upper_ok: bool  # S_n <= 2^(n-1)

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_bounds(table: PbonacciTable) -> list:
    """Verify sqrt(2)^(n-1) <= S_n <= 2^(n-1) for every n in the table.

    The lower bound is evaluated in squared integer form (S_n^2 against
    2^(n-1)) so no floating-point square root enters the comparison.
    """
    report = []
    for idx, s in enumerate(table.sums):
        n = idx + 1
        pow2 = 1 << (n - 1)
        report.append(
            BoundCheck(n=n, s_n=s, lower_ok=s * s >= pow2, upper_ok=s <= pow2)
        )
    return report


@dataclass(frozen=True)
class DoublingCheck:
    n: int
    holds: bool  # S_n <= 2 S_{n-1}
    is_equality: bool
    equality_expected: bool  # exactly when n <= p + 1

    @property
    def ok(self) -> bool:
        return self.holds and (self.is_equality == self.equality_expected)


def monotone_doubling_check(table: PbonacciTable) -> list:
    """Verify S_n <= 2 S_{n-1} with equality exactly for n <= p + 1.

    Equality up to n = p + 1 reflects X_n exhausting the whole preceding
    sum while the recurrence still reaches back to X_1; afterwards the
    inequality is strict.
    """
    if table.n < 2:
        raise ValueError("doubling check needs at least two entries")
    report = []
    for idx in range(1, table.n):
        n = idx + 1
        s_n, s_prev = table.sums[idx], table.sums[idx - 1]
        report.append(
            DoublingCheck(
                n=n,
                holds=s_n <= 2 * s_prev,
                is_equality=s_n == 2 * s_prev,
                equality_expected=n <= table.p + 1,
            )
        )
    return report


def fibonacci_sum_identity(n: int) -> tuple:
    """Return (sum of F_1..F_n, F_{n+2} - 1); the two sides must agree."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    table = build_table(2, n + 2)
    lhs = table.sums[n - 1]
    rhs = _checked(table.values[n + 1] - 1, "F_{n+2} - 1")
    return lhs, rhs
