"""Multiple testing procedures on a realized vector of p-values.

All rules operate along the last axis, so a ``(B, M)`` array is handled as
B independent p-vectors. Decisions and adjusted p-values are written with
the same floating-point expressions, which makes ``decision == (q <= alpha)``
hold exactly rather than up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

ALPHA_TOL = 1e-12

PROCEDURE_KINDS = ("bonferroni", "holm", "storey", "tarone")
TARONE_VARIANTS = ("natural", "mid")


@dataclass(frozen=True)
class MtpProcedure:
    kind: str
    lam: Optional[float] = None
    variant: Optional[str] = None
    min_p: Optional[tuple[float, ...]] = None
    monotone: bool = False
    # when set, Tarone's Step 0 runs once at this level instead of at each alpha
    step0_alpha: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in PROCEDURE_KINDS:
            raise DomainError(f"unknown procedure {self.kind!r}")
        if self.kind == "storey" and (self.lam is None or not 0.0 < self.lam < 1.0):
            raise DomainError("Storey lambda must lie in (0, 1)")
        if self.kind == "tarone":
            if self.variant not in TARONE_VARIANTS:
                raise DomainError(f"Tarone variant must be one of {TARONE_VARIANTS}")
            if self.min_p is None or any(v < 0 for v in self.min_p):
                raise DomainError("Tarone needs nonnegative minimal attainable p-values")
            if self.step0_alpha is not None:
                _check_alpha(self.step0_alpha)

    @classmethod
    def bonferroni(cls) -> "MtpProcedure":
        return cls("bonferroni")

    @classmethod
    def holm(cls) -> "MtpProcedure":
        return cls("holm")

    @classmethod
    def storey(cls, lam: float, monotone: bool = False) -> "MtpProcedure":
        return cls("storey", lam=lam, monotone=monotone)

    @classmethod
    def tarone(
        cls, min_p: Sequence[float], variant: str = "natural", step0_alpha: Optional[float] = None
    ) -> "MtpProcedure":
        return cls(
            "tarone", variant=variant, min_p=tuple(float(v) for v in min_p), step0_alpha=step0_alpha
        )

    @property
    def name(self) -> str:
        if self.kind == "storey":
            return f"storey(lambda={self.lam:g}{', monotone' if self.monotone else ''})"
        if self.kind == "tarone":
            return f"tarone-{self.variant}"
        return self.kind


@dataclass
class AdjustedPValues:
    values: np.ndarray
    eligible: Optional[np.ndarray] = None
    m_eff: Optional[int] = None


@dataclass
class DecisionVector:
    decisions: np.ndarray
    R: int = field(init=False)

    def __post_init__(self) -> None:
        self.decisions = np.asarray(self.decisions, dtype=int)
        self.R = int(self.decisions.sum())


def _as_p(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise DomainError("need at least one p-value")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError("p-values must lie in [0, 1]")
    return arr


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _unsort(sorted_vals: np.ndarray, order: np.ndarray) -> np.ndarray:
    out = np.empty_like(sorted_vals)
    np.put_along_axis(out, order, sorted_vals, axis=-1)
    return out


def _order(p: np.ndarray) -> np.ndarray:
    # stable, so equal p-values keep input order
    return np.argsort(p, axis=-1, kind="stable")


# --- Bonferroni -------------------------------------------------------------

def _bonferroni_raw(p: np.ndarray) -> np.ndarray:
    return np.minimum(p.shape[-1] * p, 1.0)


def bonferroni_adjust(p) -> AdjustedPValues:
    p = _as_p(p)
    return AdjustedPValues(_bonferroni_raw(p))


# --- Holm -------------------------------------------------------------------

def _holm_scaled_sorted(p: np.ndarray):
    M = p.shape[-1]
    order = _order(p)
    ps = np.take_along_axis(p, order, axis=-1)
    factors = M - np.arange(M)
    return ps * factors, order


def holm_reject_count(p, alpha: float) -> int:
    """Largest m with (M - j + 1) p_(j) <= alpha for every j <= m."""
    _check_alpha(alpha)
    p = _as_p(p)
    scaled, _ = _holm_scaled_sorted(p)
    passes = np.logical_and.accumulate(scaled <= alpha + ALPHA_TOL, axis=-1)
    return passes.sum(axis=-1) if p.ndim > 1 else int(passes.sum())


def _holm_raw(p: np.ndarray) -> np.ndarray:
    scaled, order = _holm_scaled_sorted(p)
    q_sorted = np.minimum(np.maximum.accumulate(scaled, axis=-1), 1.0)
    return _unsort(q_sorted, order)


def holm_adjust(p) -> AdjustedPValues:
    p = _as_p(p)
    return AdjustedPValues(_holm_raw(p))


def _holm_decisions(p: np.ndarray, alpha: float) -> np.ndarray:
    scaled, order = _holm_scaled_sorted(p)
    passes = np.logical_and.accumulate(scaled <= alpha + ALPHA_TOL, axis=-1)
    return _unsort(passes, order)


# --- Storey -----------------------------------------------------------------

def storey_m0_hat(p, lam: float):
    """(#{p > lambda} + 1) / (1 - lambda)."""
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda must lie in (0, 1)")
    p = _as_p(p)
    return ((p > lam).sum(axis=-1) + 1) / (1.0 - lam)


def _rank_le(p: np.ndarray) -> np.ndarray:
    """R(p_m) = #{j : p_j <= p_m}, ties counted in full."""
    M = p.shape[-1]
    order = _order(p)
    ps = np.take_along_axis(p, order, axis=-1)
    is_last = np.ones(ps.shape, dtype=bool)
    is_last[..., :-1] = ps[..., :-1] != ps[..., 1:]
    idx = np.where(is_last, np.arange(M), M)
    last = np.flip(np.minimum.accumulate(np.flip(idx, axis=-1), axis=-1), axis=-1)
    return _unsort(last + 1, order)


def _storey_fdr(p: np.ndarray, lam: float) -> np.ndarray:
    m0 = storey_m0_hat(p, lam)
    return np.asarray(m0)[..., None] * p / _rank_le(p)


def _storey_raw(p: np.ndarray, lam: float, monotone: bool) -> np.ndarray:
    fdr = _storey_fdr(p, lam)
    if monotone:
        order = _order(p)
        fs = np.take_along_axis(fdr, order, axis=-1)
        fs = np.flip(np.minimum.accumulate(np.flip(fs, axis=-1), axis=-1), axis=-1)
        fdr = _unsort(fs, order)
    return np.minimum(fdr, 1.0)


def storey_adjust(p, lam: float, monotone: bool = False) -> AdjustedPValues:
    """Estimated FDR evaluated at each p-value, M0_hat p_m / R(p_m), capped at 1.

    With ``monotone=True`` the values are made nondecreasing in p by a
    running minimum from the largest p down.
    """
    p = _as_p(p)
    return AdjustedPValues(_storey_raw(p, lam, monotone))


def _storey_decisions(p: np.ndarray, alpha: float, lam: float, monotone: bool) -> np.ndarray:
    fdr = _storey_fdr(p, lam)
    ok = fdr <= alpha + ALPHA_TOL
    if not monotone:
        return ok
    # step-up: reject every p at or below the largest p whose FDR estimate passes
    thresh = np.where(ok, p, -np.inf).max(axis=-1)
    return p <= np.asarray(thresh)[..., None]


# --- Tarone -----------------------------------------------------------------

def tarone_eligible(min_p, alpha: float) -> tuple[np.ndarray, int]:
    """Drop hypotheses whose minimal attainable p exceeds alpha / M' until stable.

    M' is the number still eligible; it starts at M.
    """
    _check_alpha(alpha)
    min_p = np.asarray(min_p, dtype=float)
    if min_p.ndim != 1 or np.any(min_p < 0):
        raise DomainError("minimal p-values must be a nonnegative vector")
    eligible = np.ones(min_p.shape, dtype=bool)
    while True:
        m_eff = int(eligible.sum())
        if m_eff == 0:
            return eligible, 0
        keep = eligible & (min_p <= alpha / m_eff + ALPHA_TOL)
        if keep.sum() == m_eff:
            return eligible, m_eff
        eligible = keep


def _tarone_raw(p: np.ndarray, eligible: np.ndarray, m_eff: int) -> np.ndarray:
    return np.where(eligible, np.minimum(m_eff * p, 1.0), 1.0)


def tarone_adjust(p, min_p, alpha: float) -> AdjustedPValues:
    """M' p_m for eligible hypotheses; 1 for those retained at Step 0."""
    p = _as_p(p)
    min_p = np.asarray(min_p, dtype=float)
    if min_p.shape[-1] != p.shape[-1]:
        raise DomainError("min_p and p must have the same length")
    eligible, m_eff = tarone_eligible(min_p, alpha)
    return AdjustedPValues(_tarone_raw(p, eligible, m_eff), eligible=eligible, m_eff=m_eff)


def tarone_adjust_exact(p, min_p) -> AdjustedPValues:
    """inf{alpha in (0, 1) : Tarone rejects H_m at level alpha}.

    The eligible set and M' change only where alpha crosses some
    k * min_p[j]; between such breakpoints the rule is a plain threshold.
    """
    p = _as_p(p)
    min_p = np.asarray(min_p, dtype=float)
    M = p.shape[-1]
    cuts = {0.0}
    for k in range(1, M + 1):
        for v in min_p:
            c = float(k * v)
            if 0.0 < c < 1.0:
                cuts.add(c)
    cuts = sorted(cuts) + [1.0]
    q = np.ones(p.shape)
    open_ = np.ones(p.shape, dtype=bool)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        probe = lo if lo > 0.0 else hi * 0.5
        eligible, m_eff = tarone_eligible(min_p, probe)
        if m_eff == 0:
            continue
        start = np.maximum(lo, m_eff * p)
        hit = open_ & eligible & (start < hi)
        q = np.where(hit, start, q)
        open_ &= ~hit
        if not open_.any():
            break
    return AdjustedPValues(np.minimum(q, 1.0))


# --- dispatch ---------------------------------------------------------------

def adjust(procedure: MtpProcedure, p, alpha: Optional[float] = None) -> AdjustedPValues:
    """Closed-form adjusted p-values; Tarone needs ``alpha`` for its Step 0."""
    p = _as_p(p)
    k = procedure.kind
    if k == "bonferroni":
        return AdjustedPValues(_bonferroni_raw(p))
    if k == "holm":
        return AdjustedPValues(_holm_raw(p))
    if k == "storey":
        return AdjustedPValues(_storey_raw(p, procedure.lam, procedure.monotone))
    if procedure.step0_alpha is not None:
        alpha = procedure.step0_alpha
    if alpha is None:
        raise DomainError("Tarone adjustment depends on alpha")
    return tarone_adjust(p, procedure.min_p, alpha)


def decision_matrix(procedure: MtpProcedure, p, alpha: float) -> np.ndarray:
    """Level-alpha rejections as a boolean array shaped like ``p``."""
    _check_alpha(alpha)
    p = _as_p(p)
    k = procedure.kind
    if k == "bonferroni":
        return _bonferroni_raw(p) <= alpha + ALPHA_TOL
    if k == "holm":
        return _holm_decisions(p, alpha)
    if k == "storey":
        return _storey_decisions(p, alpha, procedure.lam, procedure.monotone)
    min_p = np.asarray(procedure.min_p, dtype=float)
    if min_p.shape[-1] != p.shape[-1]:
        raise DomainError("min_p and p must have the same length")
    step0 = alpha if procedure.step0_alpha is None else procedure.step0_alpha
    eligible, m_eff = tarone_eligible(min_p, step0)
    return eligible & (np.minimum(m_eff * p, 1.0) <= alpha + ALPHA_TOL)


def apply_mtp(procedure: MtpProcedure, p, alpha: float) -> DecisionVector:
    return DecisionVector(decision_matrix(procedure, p, alpha))


def adjust_by_inf_oracle(procedure: MtpProcedure, p, alpha_grid) -> AdjustedPValues:
    """Smallest grid alpha at which each hypothesis is rejected (1 if none).

    Brute force over the grid; only used to check the closed forms.
    """
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] >= 1:
        raise DomainError("alpha grid must be strictly increasing inside (0, 1)")
    p = _as_p(p)
    q = np.ones(p.shape)
    pending = np.ones(p.shape, dtype=bool)
    for a in grid:
        hit = pending & decision_matrix(procedure, p, float(a))
        q[hit] = a
        pending &= ~hit
        if not pending.any():
            break
    return AdjustedPValues(q)


@dataclass(frozen=True)
class DecisionMetrics:
    V: int
    R: int
    fdp: float


def evaluate_decisions(decisions, truth: Sequence[str]) -> DecisionMetrics:
    """Realized false rejections V, rejections R and V / max(R, 1).

    ``truth`` entries are ``"null"`` or ``"non-null"`` (booleans accepted,
    True meaning the null is true).
    """
    d = decisions.decisions if isinstance(decisions, DecisionVector) else np.asarray(decisions, dtype=int)
    if len(d) != len(truth):
        raise DomainError("decisions and truth labels differ in length")
    is_null = np.array([t if isinstance(t, (bool, np.bool_)) else str(t) == "null" for t in truth], dtype=bool)
    R = int(d.sum())
    V = int(d[is_null].sum())
    return DecisionMetrics(V, R, V / max(R, 1))
