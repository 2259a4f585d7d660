"""CSV ingestion and emission, and the binomial study simulator."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .dist_core import (
    DiscreteNullDistribution,
    TwoSampleInput,
    binomial_null,
    folded_mann_whitney_null,
)
from .errors import DomainError, InputError
from .mc_engine import EmpiricalAdjustedP, ReportRow

REPORT_HEADER = ["id", "phi", "p_lower", "p_upper", "q_lower", "q_upper", "group", "decision", "u"]
HISTOGRAM_HEADER = ["bin_left", "bin_right", "count"]


@dataclass(frozen=True)
class BinomialRecord:
    id: str
    x: int
    n: int


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _open_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = [(reader.line_num, row) for row in reader if any(c.strip() for c in row)]
    return header, rows


def ingest_binomial_csv(path) -> list[BinomialRecord]:
    """Read ``id,x,n`` rows; extra trailing columns (e.g. ``truth``) are ignored."""
    header, rows = _open_rows(path)
    if header[:3] != ["id", "x", "n"]:
        raise InputError(f"{path}: header must start with id,x,n, got {','.join(header)}")
    records: list[BinomialRecord] = []
    seen: set[str] = set()
    for line, row in rows:
        if len(row) < 3:
            raise InputError(f"{path}, row {line}: expected id,x,n")
        rid = row[0].strip()
        try:
            x, n = int(row[1]), int(row[2])
        except ValueError:
            raise InputError(f"{path}, row {line}: x and n must be integers") from None
        if not rid:
            raise InputError(f"{path}, row {line}: empty id")
        if n < 1 or x < 0:
            raise InputError(f"{path}, row {line}: need n >= 1 and x >= 0")
        if x > n:
            raise InputError(f"{path}, row {line}: x > n ({x} > {n})")
        if rid in seen:
            raise InputError(f"{path}, row {line}: duplicate id {rid!r}")
        seen.add(rid)
        records.append(BinomialRecord(rid, x, n))
    if not records:
        raise InputError(f"{path}: no hypotheses")
    return records


def read_truth_labels(path) -> Optional[list[str]]:
    """The optional ``truth`` column written by the simulator, else None."""
    header, rows = _open_rows(path)
    if "truth" not in header:
        return None
    j = header.index("truth")
    return [row[j].strip() for _, row in rows]


def write_binomial_csv(records: Sequence[BinomialRecord], path, truth: Optional[Sequence[str]] = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "n"] + (["truth"] if truth is not None else []))
        for i, r in enumerate(records):
            w.writerow([r.id, r.x, r.n] + ([truth[i]] if truth is not None else []))


def ingest_two_sample_csv(path) -> list[TwoSampleInput]:
    """Long format ``id,group,value`` with groups ``x`` and ``y``."""
    header, rows = _open_rows(path)
    if header[:3] != ["id", "group", "value"]:
        raise InputError(f"{path}: header must be id,group,value")
    groups: dict[str, dict[str, list[float]]] = {}
    for line, row in rows:
        if len(row) < 3:
            raise InputError(f"{path}, row {line}: expected id,group,value")
        rid, g = row[0].strip(), row[1].strip()
        if g not in ("x", "y"):
            raise InputError(f"{path}, row {line}: group must be x or y, got {g!r}")
        try:
            v = float(row[2])
        except ValueError:
            raise InputError(f"{path}, row {line}: value is not a number") from None
        if not math.isfinite(v):
            raise InputError(f"{path}, row {line}: value must be finite")
        groups.setdefault(rid, {"x": [], "y": []})[g].append(v)
    if not groups:
        raise InputError(f"{path}: no hypotheses")
    out = []
    for rid, g in groups.items():
        if not g["x"] or not g["y"]:
            raise InputError(f"{path}: id {rid!r} is missing group {'x' if not g['x'] else 'y'}")
        try:
            out.append(TwoSampleInput(rid, tuple(g["x"]), tuple(g["y"])))
        except DomainError as exc:
            raise InputError(f"{path}: {exc}") from None
    return out


def binomial_hypotheses(records: Iterable[BinomialRecord]) -> list[tuple[DiscreteNullDistribution, int]]:
    cache: dict[int, DiscreteNullDistribution] = {}
    out = []
    for r in records:
        if r.n not in cache:
            cache[r.n] = binomial_null(r.n)
        out.append((cache[r.n], r.x))
    return out


def two_sample_hypotheses(inputs: Iterable[TwoSampleInput]):
    cache: dict[tuple[int, int], DiscreteNullDistribution] = {}
    out = []
    for t in inputs:
        key = (t.n_x, t.n_y)
        if key not in cache:
            cache[key] = folded_mann_whitney_null(*key)
        out.append((cache[key], t.folded_statistic()))
    return out


def minimal_p_values(hypotheses, variant: str = "natural") -> np.ndarray:
    """Smallest attainable p-value per hypothesis: Pr(X = max) for the natural
    p-value, half of that for the mid-p-value."""
    scale = {"natural": 1.0, "mid": 0.5}[variant]
    return np.array([scale * float(dist.mass_table[-1]) for dist, _ in hypotheses])


def simulate_binomial_study(
    M: int = 50,
    mu: float = 15.0,
    p_null: float = 0.5,
    p_alt: float = 0.8,
    n_null: int = 25,
    seed: int = 0,
) -> tuple[list[BinomialRecord], list[str]]:
    """First ``n_null`` hypotheses are true nulls. Sizes are Poisson(mu), redrawn while 0."""
    if M < 1 or not 0 <= n_null <= M:
        raise DomainError("need M >= 1 and 0 <= n_null <= M")
    if mu <= 0 or not 0 < p_null < 1 or not 0 < p_alt < 1:
        raise DomainError("mu must be positive and probabilities in (0, 1)")
    rng = np.random.default_rng(seed)
    records, truth = [], []
    for m in range(M):
        n = 0
        while n == 0:
            n = int(rng.poisson(mu))
        is_null = m < n_null
        x = int(rng.binomial(n, p_null if is_null else p_alt))
        records.append(BinomialRecord(f"h{m + 1}", x, n))
        truth.append("null" if is_null else "non-null")
    return records, truth


def emit_report_csv(rows: Sequence[ReportRow], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        write_report(rows, fh)


def write_report(rows: Sequence[ReportRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in (r.id, r.phi, r.p_lower, r.p_upper, r.q_lower, r.q_upper, r.group, r.decision, r.u)])


def emit_histogram_csv(empirical: EmpiricalAdjustedP, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        write_histogram(empirical, fh)


def write_histogram(empirical: EmpiricalAdjustedP, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HISTOGRAM_HEADER)
    for left, right, count in empirical.bins:
        w.writerow([_fmt(left), _fmt(right), count])
