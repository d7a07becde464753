"""Exact Ehrenfest, Yule and reverse-Yule generators, and the OU operator on polynomials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .polyalg import Poly, ValueVector, X

__all__ = [
    "FiniteGenerator",
    "BinomialMeasure",
    "ehrenfest",
    "yule",
    "reverse_yule",
    "ou_apply",
    "check_eigen",
    "binomial_measure",
]


@dataclass(frozen=True)
class FiniteGenerator:
    """Rate matrix on the states ``offset, ..., offset + size - 1``."""

    offset: int
    rates: tuple[tuple[Fraction, ...], ...]
    name: str = ""

    def __post_init__(self):
        rates = tuple(tuple(Fraction(v) for v in row) for row in self.rates)
        n = len(rates)
        if n == 0 or any(len(row) != n for row in rates):
            raise ValueError("rate matrix must be square and nonempty")
        for i, row in enumerate(rates):
            if any(v < 0 for j, v in enumerate(row) if j != i):
                raise ValueError(f"negative off-diagonal rate in row {i}")
            if sum(row) != 0:
                raise ValueError(f"row {i} does not sum to zero")
        object.__setattr__(self, "rates", rates)

    @property
    def size(self) -> int:
        return len(self.rates)

    @property
    def states(self) -> range:
        return range(self.offset, self.offset + self.size)

    def rate(self, x: int, y: int) -> Fraction:
        return self.rates[x - self.offset][y - self.offset]

    def max_exit_rate(self) -> Fraction:
        return max(-self.rates[i][i] for i in range(self.size))

    def apply(self, v: ValueVector) -> ValueVector:
        """``(G v)(x) = Σ_y G(x, y) v(y)``."""
        if v.offset != self.offset or len(v) != self.size:
            raise ValueError(
                f"dimension mismatch: generator on [{self.offset}, {self.states[-1]}], "
                f"vector on [{v.offset}, {v.last}]"
            )
        return ValueVector(
            self.offset,
            tuple(sum((r * f for r, f in zip(row, v.values) if r), Fraction(0)) for row in self.rates),
        )

    def left_apply(self, m) -> tuple[Fraction, ...]:
        """Row vector times generator, ``(m G)(y)``."""
        m = [Fraction(v) for v in m]
        if len(m) != self.size:
            raise ValueError("dimension mismatch")
        return tuple(sum((m[i] * self.rates[i][j] for i in range(self.size)), Fraction(0))
                     for j in range(self.size))


def _from_offdiag(offset: int, size: int, offdiag, name: str) -> FiniteGenerator:
    rows = []
    for i in range(size):
        row = [Fraction(0)] * size
        for j in range(size):
            if j != i:
                row[j] = Fraction(offdiag(offset + i, offset + j))
        row[i] = -sum(row)
        rows.append(tuple(row))
    return FiniteGenerator(offset, tuple(rows), name)


def ehrenfest(N: int) -> FiniteGenerator:
    """Ehrenfest generator ``L_N`` on ``[0, N]``: up at ``(N-x)/2``, down at ``x/2``."""
    if N < 0:
        raise ValueError("N must be nonnegative")

    def rate(x, y):
        if y == x + 1:
            return Fraction(N - x, 2)
        if y == x - 1:
            return Fraction(x, 2)
        return 0

    return _from_offdiag(0, N + 1, rate, f"ehrenfest({N})")


def yule(N: int) -> FiniteGenerator:
    """Pure-death generator ``D_N`` on ``[0, N]``: ``x -> x-1`` at rate ``x``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return _from_offdiag(0, N + 1, lambda x, y: x if y == x - 1 else 0, f"yule({N})")


def reverse_yule(N: int) -> FiniteGenerator:
    """Reverse Yule generator on ``[-N, 0]``: ``y -> y-1`` at rate ``1-y``; ``-N`` absorbing."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return _from_offdiag(-N, N + 1, lambda x, y: 1 - x if y == x - 1 else 0, f"reverse_yule({N})")


def ou_apply(f: Poly) -> Poly:
    """Ornstein-Uhlenbeck operator ``f'' - x f'``."""
    df = f.deriv()
    return df.deriv() - X * df


def check_eigen(gen: FiniteGenerator, v: ValueVector, lam) -> ValueVector:
    """Residual ``gen v + lam v``; the zero vector certifies ``gen v = -lam v``."""
    return gen.apply(v) + v.scale(lam)


@dataclass(frozen=True)
class BinomialMeasure:
    """Binomial(N, 1/2) law on ``[0, N]``."""

    N: int
    weights: ValueVector

    def __post_init__(self):
        if sum(self.weights.values) != 1 or any(w <= 0 for w in self.weights.values):
            raise ValueError("weights must be positive and sum to 1")

    @property
    def values(self) -> tuple[Fraction, ...]:
        return self.weights.values


def binomial_measure(N: int) -> BinomialMeasure:
    if N < 0:
        raise ValueError("N must be nonnegative")
    w = tuple(Fraction(math.comb(N, x), 2 ** N) for x in range(N + 1))
    return BinomialMeasure(N, ValueVector(0, w))
