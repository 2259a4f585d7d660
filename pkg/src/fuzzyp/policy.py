"""Rules for choosing the auxiliary uniform ``u`` that a randomized p-value needs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

POLICY_KINDS = ("random", "mid", "natural", "star", "fixed")


@dataclass(frozen=True)
class UPolicy:
    kind: str
    seed: Optional[int] = None
    values: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise DomainError(f"unknown u-policy {self.kind!r}")
        if self.kind == "fixed":
            if not self.values:
                raise DomainError("fixed u-policy needs at least one value")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise DomainError("fixed u values must lie in [0, 1]")

    @classmethod
    def random(cls, seed: Optional[int] = None) -> "UPolicy":
        return cls("random", seed=seed)

    @classmethod
    def mid(cls) -> "UPolicy":
        return cls("mid")

    @classmethod
    def natural(cls) -> "UPolicy":
        return cls("natural")

    @classmethod
    def star(cls) -> "UPolicy":
        return cls("star")

    @classmethod
    def fixed(cls, values: Sequence[float] | float) -> "UPolicy":
        if np.isscalar(values):
            values = [values]
        return cls("fixed", values=tuple(float(v) for v in values))

    @property
    def label(self) -> str:
        return self.kind

    def vector(self, M: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """The u-vector this policy assigns to ``M`` hypotheses in input order."""
        if self.kind == "mid":
            return np.full(M, 0.5)
        if self.kind == "natural":
            return np.ones(M)
        if self.kind == "star":
            return u_star(M)
        if self.kind == "fixed":
            if len(self.values) != M:
                raise DomainError(f"fixed u-policy has {len(self.values)} values for {M} hypotheses")
            return np.array(self.values, dtype=float)
        if rng is None:
            if self.seed is None:
                raise DomainError("random u-policy requires a seed")
            rng = np.random.default_rng(self.seed)
        return rng.random(M)


def u_star(M: int) -> np.ndarray:
    """Means of the order statistics of M uniforms: m/(M+1), m = 1..M."""
    if M < 1:
        raise DomainError("M must be at least 1")
    return np.arange(1, M + 1) / (M + 1)
