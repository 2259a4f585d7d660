"""Monte-Carlo estimation of multiple test functions and adjusted fuzzy p-values.

Uniform draws are SplitMix64 outputs addressed by counter: replicate b gets
its own stream seed mix(mix(master_seed) + (b+1) G) and entry (b, m) is
mix(stream_seed + (m+1) G). Adding hypotheses or replicates never changes
existing entries, and any subset of rows can be generated independently.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import mtp
from .dist_core import DiscreteNullDistribution, Number
from .errors import DomainError
from .mtp import ALPHA_TOL, MtpProcedure
from .policy import UPolicy, u_star

__all__ = [
    "McConfig",
    "MtfEstimate",
    "EmpiricalAdjustedP",
    "BiasReport",
    "ReportRow",
    "MultiReport",
    "UPolicy",
    "u_matrix",
    "u_star",
    "estimate_mtf",
    "empirical_adjusted_p",
    "total_bias",
    "run_multi_method",
]

Hypothesis = tuple[DiscreteNullDistribution, Number]

_SEED_MASK = (1 << 64) - 1
# stream index reserved for the single u-vector drawn in Step 2a
_STEP2A_STREAM = (1 << 64) - 2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class McConfig:
    B: int = 1000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if int(self.B) < 1:
            raise DomainError("B must be at least 1")


@dataclass
class MtfEstimate:
    phi_hat: np.ndarray
    B: int
    counts: np.ndarray

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(self.phi_hat * (1.0 - self.phi_hat) / self.B)


@dataclass
class EmpiricalAdjustedP:
    hypothesis: int
    samples: np.ndarray
    bins: list[tuple[float, float, int]]

    def fraction_below(self, alpha: float) -> float:
        return float(np.mean(self.samples <= alpha + ALPHA_TOL))


@dataclass(frozen=True)
class BiasReport:
    u: np.ndarray
    gamma: float
    bias: float


@dataclass
class ReportRow:
    id: str
    phi: float
    p_lower: float
    p_upper: float
    q_lower: float
    q_upper: float
    group: str
    decision: str
    u: Optional[float]
    q: Optional[float] = None


@dataclass
class MultiReport:
    rows: list[ReportRow]
    procedure: str
    alpha: float
    policy: str
    B: int
    m_eff: Optional[int] = None
    summary: dict = field(default_factory=dict)

    @property
    def decisions(self) -> np.ndarray:
        return np.array([r.decision == "reject" for r in self.rows], dtype=int)


def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _stream_seeds(seed: int, rows: np.ndarray) -> np.ndarray:
    base = _mix64(np.array([int(seed) & _SEED_MASK], dtype=np.uint64))
    return _mix64(base + (rows.astype(np.uint64) + np.uint64(1)) * _GOLDEN)


def _uniforms(stream_seeds: np.ndarray, M: int) -> np.ndarray:
    cols = (np.arange(M, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
    bits = _mix64(stream_seeds[:, None] + cols[None, :])
    return (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53


def u_matrix(M: int, config: McConfig, rows: Optional[np.ndarray] = None) -> np.ndarray:
    """Uniforms for replicates ``rows`` (default 0..B-1) by M hypotheses.

    Entry (b, m) depends only on (master_seed, b, m).
    """
    if M < 1:
        raise DomainError("M must be at least 1")
    rows = np.arange(config.B, dtype=np.uint64) if rows is None else np.asarray(rows, dtype=np.uint64)
    return _uniforms(_stream_seeds(config.master_seed, rows), M)


def _tails(hypotheses: Sequence[Hypothesis]) -> tuple[np.ndarray, np.ndarray]:
    if not hypotheses:
        raise DomainError("no hypotheses")
    surv = np.empty(len(hypotheses))
    mass = np.empty(len(hypotheses))
    for j, (dist, x) in enumerate(hypotheses):
        i = dist.index(x)
        surv[j] = dist.survival_table[i]
        mass[j] = dist.mass_table[i]
    return surv, mass


def _randomized_p(hypotheses: Sequence[Hypothesis], config: McConfig) -> np.ndarray:
    surv, mass = _tails(hypotheses)
    return surv + u_matrix(len(hypotheses), config) * mass


def estimate_mtf(
    hypotheses: Sequence[Hypothesis], procedure: MtpProcedure, alpha: float, config: McConfig
) -> MtfEstimate:
    """Rejection frequency of each hypothesis over B independent u-vectors."""
    P = _randomized_p(hypotheses, config)
    D = mtp.decision_matrix(procedure, P, alpha)
    counts = D.sum(axis=0)
    return MtfEstimate(counts / config.B, config.B, counts)


def _histogram(samples: np.ndarray, bin_count: int) -> list[tuple[float, float, int]]:
    if samples.size == 0:
        return []
    counts, edges = np.histogram(samples, bins=bin_count, range=(samples.min(), samples.max()))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]


def empirical_adjusted_p(
    m: int,
    hypotheses: Sequence[Hypothesis],
    procedure: MtpProcedure,
    config: McConfig,
    bin_count: int = 30,
    alpha: Optional[float] = None,
) -> EmpiricalAdjustedP:
    """B draws of the adjusted p-value q_m(x, U) with an equal-width histogram.

    ``alpha`` is only consulted by Tarone, whose Step 0 depends on it.
    """
    if not 0 <= m < len(hypotheses):
        raise DomainError(f"hypothesis index {m} out of range")
    if bin_count < 1:
        raise DomainError("bin_count must be positive")
    P = _randomized_p(hypotheses, config)
    Q = mtp.adjust(procedure, P, alpha).values
    samples = Q[:, m].copy()
    return EmpiricalAdjustedP(m, samples, _histogram(samples, bin_count))


def total_bias(u, gamma: float) -> BiasReport:
    """Sum over m of I(u_m <= gamma) - gamma."""
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    u = np.asarray(u, dtype=float)
    bias = float(np.sum(u <= gamma) - len(u) * gamma)
    return BiasReport(u, gamma, bias)


def _policy_u(policy: UPolicy, M: int, config: McConfig) -> np.ndarray:
    if policy.kind == "random":
        seed = config.master_seed if policy.seed is None else policy.seed
        return _uniforms(_stream_seeds(seed, np.array([_STEP2A_STREAM], dtype=np.uint64)), M)[0]
    return policy.vector(M)


def run_multi_method(
    hypotheses: Sequence[Hypothesis],
    procedure: MtpProcedure,
    alpha: float,
    policy: UPolicy,
    config: McConfig,
    ids: Optional[Sequence[str]] = None,
) -> MultiReport:
    """Step 1 from the estimated test functions, then Step 2a/2b on Group 3.

    A hypothesis is auto-rejected (auto-retained) only when all B replicates
    reject (retain) it; everything else is Group 3 and is decided by the
    u-vector of ``policy``.
    """
    M = len(hypotheses)
    ids = [f"H{j + 1}" for j in range(M)] if ids is None else list(ids)
    if len(ids) != M:
        raise DomainError("ids and hypotheses differ in length")
    est = estimate_mtf(hypotheses, procedure, alpha, config)
    surv, mass = _tails(hypotheses)
    upper = np.array([float(dist.upper_table[dist.index(x)]) for dist, x in hypotheses])

    q_lower = mtp.adjust(procedure, surv, alpha)
    q_upper = mtp.adjust(procedure, upper, alpha).values
    m_eff = q_lower.m_eff
    q_lower = q_lower.values

    u = _policy_u(policy, M, config)
    p_u = surv + u * mass
    q_u = mtp.adjust(procedure, p_u, alpha).values
    d_u = mtp.decision_matrix(procedure, p_u, alpha)

    rows = []
    summary = {"auto-reject": 0, "auto-retain": 0, "group3": 0, "group3-reject": 0, "R": 0}
    for j in range(M):
        c = int(est.counts[j])
        if c == est.B:
            group, decision, uj, qj = "auto-reject", "reject", None, None
        elif c == 0:
            group, decision, uj, qj = "auto-retain", "retain", None, None
        else:
            group = "group3"
            decision = "reject" if d_u[j] else "retain"
            uj, qj = float(u[j]), float(q_u[j])
            summary["group3-reject"] += decision == "reject"
        summary[group] += 1
        summary["R"] += decision == "reject"
        rows.append(
            ReportRow(
                ids[j], float(est.phi_hat[j]), float(surv[j]), float(upper[j]),
                float(q_lower[j]), float(q_upper[j]), group, decision, uj, qj,
            )
        )
    summary["expected-group3-reject"] = float(
        sum(r.phi for r in rows if r.group == "group3")
    )
    return MultiReport(rows, procedure.name, alpha, policy.label, config.B, m_eff, summary)
