"""Benchmark harness: confusion metrics, ROC/AUC and delta_max sweeps."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .core import Config, LengthMismatch, SingleClass, ValidationError, VerdictKind
from .granger import vl_granger
from .tentropy import vl_transfer_entropy


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValidationError("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _ratio(num: int, den: int) -> Optional[float]:
    # None marks an undefined metric (empty denominator)
    return num / den if den else None


@dataclass(frozen=True)
class Metrics:
    counts: ConfusionCounts
    accuracy: Optional[float]
    tpr: Optional[float]
    fpr: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "Metrics":
        tpr = _ratio(c.tp, c.tp + c.fn)
        prec = _ratio(c.tp, c.tp + c.fp)
        if prec is None or tpr is None or prec + tpr == 0:
            f1 = None
        else:
            f1 = 2 * prec * tpr / (prec + tpr)
        return cls(c, _ratio(c.tp + c.tn, c.n), tpr, _ratio(c.fp, c.fp + c.tn), prec, tpr, f1)


def _predicted(p) -> bool:
    if isinstance(p, (bool, np.bool_)):
        return bool(p)
    kind = getattr(p, "kind", None)
    if kind is not None:
        return kind is not VerdictKind.NONE
    return bool(p.cause)


def score(predictions: Sequence, truth: Sequence[bool]) -> Metrics:
    """Confusion metrics. Predictions may be booleans, reports with a cause
    flag, or verdicts (positive unless NONE)."""
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(truth)} labels")
    pred = np.array([_predicted(p) for p in predictions], dtype=bool)
    lab = np.asarray(truth, dtype=bool)
    c = ConfusionCounts(
        tp=int(np.sum(pred & lab)), tn=int(np.sum(~pred & ~lab)),
        fp=int(np.sum(pred & ~lab)), fn=int(np.sum(~pred & lab)),
    )
    return Metrics.from_counts(c)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # decreasing; the first point is +inf (nothing called positive)


def roc_auc(scores: Sequence[float], truth: Sequence[bool]):
    """Area under the ROC curve of a threshold sweep over the scores.

    Tied scores move the curve diagonally, which gives them half credit.
    NaN scores rank below everything. Returns (auc, RocCurve).
    """
    s = np.asarray(scores, dtype=float)
    lab = np.asarray(truth, dtype=bool)
    if s.size != lab.size:
        raise LengthMismatch("scores and labels differ in length")
    P, N = int(lab.sum()), int((~lab).sum())
    if P == 0 or N == 0:
        raise SingleClass(f"need both classes, got {P} positives and {N} negatives")
    s = np.where(np.isnan(s), -np.inf, s)
    thr = np.unique(s)[::-1]
    # counts of positives/negatives with score >= threshold, one entry per distinct score
    order = np.argsort(-s, kind="stable")
    ss, ll = s[order], lab[order]
    last = np.r_[np.flatnonzero(ss[1:] != ss[:-1]), ss.size - 1]
    tps = np.cumsum(ll)[last]
    fps = np.cumsum(~ll)[last]
    tpr = np.r_[0.0, tps / P]
    fpr = np.r_[0.0, fps / N]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)
    return auc, RocCurve(fpr, tpr, np.r_[np.inf, thr])


# method name -> callable(x, y, cfg) returning a report with .cause and .score
METHODS: Dict[str, Callable] = {
    "vlg": lambda x, y, cfg: vl_granger(x, y, cfg, fix_lag=False),
    "g": lambda x, y, cfg: vl_granger(x, y, cfg, fix_lag=True),
    "vlte": lambda x, y, cfg: vl_transfer_entropy(x, y, cfg, fix_lag=False),
    "te": lambda x, y, cfg: vl_transfer_entropy(x, y, cfg, fix_lag=True),
}


def run_method(name: str, x, y, cfg: Config):
    try:
        fn = METHODS[name]
    except KeyError:
        raise ValidationError(f"unknown method {name!r}; choose from {sorted(METHODS)}") from None
    return fn(x, y, cfg)


def delta_from_fraction(frac: float, T: int) -> int:
    # guard against 0.3 * 200 = 60.00000000000001 style rounding in either direction
    return int(math.floor(frac * T + 1e-9))


@dataclass
class BenchRow:
    method: str
    delta_max_frac: float
    metrics: Metrics
    auc: Optional[float]
    wall_ms: float
    scores: List[float] = field(default_factory=list)
    causes: List[bool] = field(default_factory=list)
    ids: List[str] = field(default_factory=list)

    def as_record(self) -> dict:
        m = self.metrics
        return dict(method=self.method, delta_max_frac=self.delta_max_frac,
                    accuracy=m.accuracy, tpr=m.tpr, fpr=m.fpr, auc=self.auc,
                    precision=m.precision, recall=m.recall, f1=m.f1, wall_ms=self.wall_ms)


def evaluate_method(suite, method: str, cfg: Config, frac: Optional[float] = None) -> BenchRow:
    """Run one method over a labelled suite at one delta_max fraction."""
    if not suite:
        raise ValidationError("empty suite")
    scores, causes, labels, ids = [], [], [], []
    t0 = time.perf_counter()
    for inst in sorted(suite, key=lambda s: s.id):
        c = cfg if frac is None else cfg.replace(delta_max=delta_from_fraction(frac, inst.x.T))
        rep = run_method(method, inst.x, inst.y, c)
        scores.append(float(rep.score))
        causes.append(bool(rep.cause))
        labels.append(bool(inst.label))
        ids.append(inst.id)
    wall = (time.perf_counter() - t0) * 1e3
    try:
        auc, _ = roc_auc(scores, labels)
    except SingleClass:
        auc = None
    return BenchRow(method, frac, score(causes, labels), auc, wall, scores, causes, ids)


def benchmark(suite, methods: Sequence[str], fracs: Sequence[float],
              cfg: Config = Config()) -> List[BenchRow]:
    """Rows ordered by (method, fraction)."""
    return [evaluate_method(suite, m, cfg, f) for m in sorted(methods) for f in sorted(fracs)]


def delta_max_sweep(suite, cfg: Config = Config(), values: Sequence[float] = (0.1, 0.2, 0.3, 0.4),
                    method: str = "vlg") -> Dict[float, float]:
    """Accuracy of one method at each delta_max fraction of T."""
    return {f: evaluate_method(suite, method, cfg, f).metrics.accuracy for f in values}
