"""Exact discrete null distributions.

Every distribution is held as integer counts over a common integer
denominator, so tail sums are exact until the final division. Support
points are ``Fraction`` keys; folded Mann-Whitney supports can be
half-integers and must never be compared as floats.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import DomainError

Number = Union[int, float, Fraction]

MAX_BINOMIAL_N = 10_000
MAX_MW_TOTAL = 200


def _key(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite point {x!r}")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class DiscreteNullDistribution:
    """Finite discrete distribution with exact integer weights.

    ``counts[i] / total`` is the probability of ``support[i]``. Float tables
    for the mass, the strict upper tail Pr(X > s) (survival), the weak upper
    tail Pr(X >= s) and the cdf are derived once at construction.
    """

    support: tuple[Fraction, ...]
    counts: tuple[int, ...]
    total: int
    label: str = ""
    mass_table: np.ndarray = field(init=False, repr=False, compare=False)
    survival_table: np.ndarray = field(init=False, repr=False, compare=False)
    cdf_table: np.ndarray = field(init=False, repr=False, compare=False)
    upper_table: np.ndarray = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.support) == 0 or len(self.support) != len(self.counts):
            raise DomainError("support and counts must be nonempty and aligned")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise DomainError("support must be strictly increasing")
        if any(c <= 0 for c in self.counts):
            raise DomainError("all counts must be positive")
        if sum(self.counts) != self.total:
            raise DomainError("counts must sum to the denominator")

        tail = 0
        surv_counts = []
        for c in reversed(self.counts):
            surv_counts.append(tail)
            tail += c
        surv_counts.reverse()
        cum = 0
        cdf_counts = []
        for c in self.counts:
            cum += c
            cdf_counts.append(cum)

        t = self.total
        object.__setattr__(self, "mass_table", _readonly([c / t for c in self.counts]))
        object.__setattr__(self, "survival_table", _readonly([s / t for s in surv_counts]))
        object.__setattr__(self, "cdf_table", _readonly([s / t for s in cdf_counts]))
        object.__setattr__(
            self, "upper_table", _readonly([(s + c) / t for s, c in zip(surv_counts, self.counts)])
        )
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.support)})

    @classmethod
    def from_counts(cls, pairs: Iterable[tuple[Number, int]], label: str = "") -> "DiscreteNullDistribution":
        """Build from (point, count) pairs; zero counts are dropped, duplicates merged."""
        acc: dict[Fraction, int] = {}
        for point, count in pairs:
            if count < 0:
                raise DomainError("negative count")
            if count:
                k = _key(point)
                acc[k] = acc.get(k, 0) + int(count)
        if not acc:
            raise DomainError("distribution has no mass")
        support = tuple(sorted(acc))
        counts = tuple(acc[s] for s in support)
        return cls(support, counts, sum(counts), label)

    def __len__(self) -> int:
        return len(self.support)

    @property
    def min_point(self) -> Fraction:
        return self.support[0]

    @property
    def max_point(self) -> Fraction:
        return self.support[-1]

    def index(self, x: Number) -> int:
        """Position of ``x`` in the support; ``DomainError`` if absent."""
        try:
            return self._index[_key(x)]
        except KeyError:
            raise DomainError(f"{x} is not in the support of {self.label or 'the distribution'}") from None

    def contains(self, x: Number) -> bool:
        return _key(x) in self._index

    def mass(self, x: Number) -> float:
        i = self._index.get(_key(x))
        return 0.0 if i is None else float(self.mass_table[i])

    def survival(self, x: Number) -> float:
        """Pr(X > x) for any rational ``x``."""
        k = _key(x)
        i = bisect.bisect_right(self.support, k)
        if i == len(self.support):
            return 0.0
        return float(self.upper_table[i])

    def exact_mass(self, x: Number) -> Fraction:
        i = self._index.get(_key(x))
        return Fraction(0) if i is None else Fraction(self.counts[i], self.total)

    def exact_survival(self, x: Number) -> Fraction:
        i = bisect.bisect_right(self.support, _key(x))
        return Fraction(sum(self.counts[i:]), self.total)

    def as_dict(self) -> dict[Fraction, float]:
        return dict(zip(self.support, self.mass_table.tolist()))


def _readonly(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


def binomial_null(n: int) -> DiscreteNullDistribution:
    """Binomial(n, 1/2), the null law of a sign/binomial test."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_BINOMIAL_N:
        raise DomainError(f"binomial size must be an integer in [1, {MAX_BINOMIAL_N}], got {n!r}")
    n = int(n)
    counts = []
    c = 1
    for k in range(n + 1):
        counts.append(c)
        c = c * (n - k) // (k + 1)
    return DiscreteNullDistribution(tuple(Fraction(k) for k in range(n + 1)), tuple(counts), 1 << n, f"binomial({n})")


def mann_whitney_counts(n_x: int, n_y: int) -> list[int]:
    """Number of group arrangements giving U = u, for u = 0..n_x*n_y.

    These are the coefficients of the Gaussian binomial [n_x+n_y choose n_x]_q,
    built as prod_i (1 - q^(n_y+i)) / (1 - q^i); each division by (1 - q^i)
    is a running sum with stride i.
    """
    size = n_x * n_y + 1
    a = np.zeros(size, dtype=object)
    a[0] = 1
    a[1:] = 0
    small = min(n_x, n_y)
    large = max(n_x, n_y)
    for i in range(1, small + 1):
        k = large + i
        if k < size:
            a[k:] = a[k:] - a[: size - k]
        for r in range(i):
            a[r::i] = np.cumsum(a[r::i])
    return [int(v) for v in a]


def mann_whitney_null(n_x: int, n_y: int) -> DiscreteNullDistribution:
    """Exact null law of the Mann-Whitney U statistic, no ties."""
    for v in (n_x, n_y):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise DomainError(f"group sizes must be positive integers, got {n_x!r}, {n_y!r}")
    if n_x + n_y > MAX_MW_TOTAL:
        raise DomainError(f"n_x + n_y = {n_x + n_y} exceeds the exact limit {MAX_MW_TOTAL}")
    counts = mann_whitney_counts(int(n_x), int(n_y))
    total = math.comb(n_x + n_y, n_y)
    return DiscreteNullDistribution(
        tuple(Fraction(u) for u in range(len(counts))), tuple(counts), total, f"mann_whitney({n_x},{n_y})"
    )


def fold_absolute(dist: DiscreteNullDistribution, center: Number) -> DiscreteNullDistribution:
    """Law of |X - center|; masses of colliding points are added."""
    c = _key(center)
    return DiscreteNullDistribution.from_counts(
        ((abs(s - c), n) for s, n in zip(dist.support, dist.counts)),
        label=f"|{dist.label or 'X'} - {c}|",
    )


def survival(dist: DiscreteNullDistribution, x: Number) -> float:
    return dist.survival(x)


def mass(dist: DiscreteNullDistribution, x: Number) -> float:
    return dist.mass(x)


@dataclass(frozen=True)
class TwoSampleInput:
    id: str
    x_values: tuple[float, ...]
    y_values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.x_values or not self.y_values:
            raise DomainError(f"{self.id}: both groups need at least one value")
        if not all(math.isfinite(v) for v in (*self.x_values, *self.y_values)):
            raise DomainError(f"{self.id}: values must be finite")
        if len(set(self.x_values) | set(self.y_values)) != len(self.x_values) + len(self.y_values):
            raise DomainError(f"{self.id}: ties unsupported")

    @property
    def n_x(self) -> int:
        return len(self.x_values)

    @property
    def n_y(self) -> int:
        return len(self.y_values)

    def mann_whitney_u(self) -> int:
        """Number of (x, y) pairs with y > x, i.e. the y rank sum minus n_y(n_y+1)/2."""
        xs = sorted(self.x_values)
        return sum(bisect.bisect_left(xs, y) for y in self.y_values)

    def folded_statistic(self) -> Fraction:
        """|U - n_x n_y / 2|; large values are evidence of a location shift."""
        return abs(Fraction(self.mann_whitney_u()) - Fraction(self.n_x * self.n_y, 2))


def folded_mann_whitney_null(n_x: int, n_y: int) -> DiscreteNullDistribution:
    return fold_absolute(mann_whitney_null(n_x, n_y), Fraction(n_x * n_y, 2))
