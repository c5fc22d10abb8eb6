"""Fixed vs variable-lag verdicts, group aggregation and graph inference."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Union

import numpy as np

from .core import (
    ArrayLike,
    BadInterval,
    Config,
    LengthMismatch,
    Method,
    TimeSeries,
    UnknownMember,
    ValidationError,
    VerdictKind,
    as_series,
    validate_pair,
)
from .granger import GrangerReport, vl_granger
from .tentropy import TEReport, vl_transfer_entropy

Report = Union[GrangerReport, TEReport]


@dataclass(frozen=True)
class CausalVerdict:
    kind: VerdictKind
    method: Method
    fixed_report: Report
    vl_report: Report
    vl_flag: bool


def decide(fixed_cause: bool, vl_cause: bool, vl_flag: bool) -> VerdictKind:
    """Verdict table: both detectors firing defer to vl_flag."""
    if fixed_cause and vl_cause:
        return VerdictKind.TRUE_VARIABLE if vl_flag else VerdictKind.TRUE_FIXED
    if fixed_cause:
        return VerdictKind.TRUE_FIXED
    if vl_cause:
        return VerdictKind.TRUE_VARIABLE
    return VerdictKind.NONE


def time_lag_test(x: ArrayLike, y: ArrayLike, cfg: Config = Config(),
                  method=Method.GRANGER) -> CausalVerdict:
    method = Method.parse(method)
    xs, ys = validate_pair(x, y, cfg)
    if method is Method.GRANGER:
        fixed = vl_granger(xs, ys, cfg, fix_lag=True)
        vl = vl_granger(xs, ys, cfg, fix_lag=False)
        flag = vl.bic_diff_ratio > fixed.bic_diff_ratio and vl.bic_diff_ratio > cfg.gamma
    else:
        fixed = vl_transfer_entropy(xs, ys, cfg, fix_lag=True)
        vl = vl_transfer_entropy(xs, ys, cfg, fix_lag=False)
        flag = _gt(vl.ratio, fixed.ratio)
    return CausalVerdict(decide(fixed.cause, vl.cause, flag), method, fixed, vl, bool(flag))


def _gt(a: float, b: float) -> bool:
    # nan (undefined ratio) never wins a comparison
    if np.isnan(a):
        return False
    if np.isnan(b):
        return True
    return a > b


@dataclass(frozen=True)
class GroupData:
    members: Dict[str, TimeSeries]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValidationError("a group needs at least two members")
        lengths = {s.T for s in self.members.values()}
        if len(lengths) != 1:
            raise LengthMismatch(f"group members have different lengths: {sorted(lengths)}")

    @property
    def names(self) -> List[str]:
        return list(self.members)

    @property
    def T(self) -> int:
        return next(iter(self.members.values())).T

    def __getitem__(self, name) -> TimeSeries:
        try:
            return self.members[name]
        except KeyError:
            raise UnknownMember(f"no member named {name!r}") from None


def aggregate(group: GroupData, subset: Iterable[str]) -> TimeSeries:
    """Element-wise mean of the named members."""
    names = list(subset)
    if not names:
        raise ValidationError("empty subset")
    stack = np.vstack([group[n].values for n in names])
    return TimeSeries(stack.mean(axis=0), "+".join(names))


def epsilon_converged(q: ArrayLike, u: ArrayLike, eps: float, t0: int, t1: int,
                      scale: Optional[float] = None,
                      dist: Optional[Callable[[float, float], float]] = None) -> bool:
    """True iff dist(q(t), u(t)) <= eps for every t in [t0, t1] (0-based, inclusive).

    The default distance is min(1, |q - u| / scale); scale must then be given.
    """
    qv, uv = as_series(q).values, as_series(u).values
    if qv.size != uv.size:
        raise LengthMismatch("series lengths differ")
    if not 0 < eps <= 0.5:
        raise BadInterval("eps must lie in (0, 1/2]")
    if not 0 <= t0 <= t1 < qv.size:
        raise BadInterval(f"interval [{t0}, {t1}] outside the series")
    a, b = qv[t0:t1 + 1], uv[t0:t1 + 1]
    if dist is None:
        if scale is None or scale <= 0:
            raise ValidationError("the default distance needs a positive scale")
        d = np.minimum(1.0, np.abs(a - b) / scale)
    else:
        d = np.array([dist(p, r) for p, r in zip(a, b)])
        if np.any((d < 0) | (d > 1)):
            raise ValidationError("dist must map into [0, 1]")
    return bool(np.all(d <= eps))


@dataclass(frozen=True)
class GraphResult:
    edges: List[tuple]  # (source, target, verdict kind)
    verdicts: Dict[tuple, CausalVerdict]

    def edge_set(self) -> set:
        return {(a, b) for a, b, _ in self.edges}


def infer_causal_graph(group: GroupData, cfg: Config = Config(),
                       method=Method.GRANGER) -> GraphResult:
    """Pairwise tests over every ordered pair; an edge means a verdict other than NONE."""
    names = group.names
    verdicts = {}
    edges = []
    for a in names:
        for b in names:
            if a == b:
                continue
            v = time_lag_test(group[a], group[b], cfg, method)
            verdicts[(a, b)] = v
            if v.kind is not VerdictKind.NONE:
                edges.append((a, b, v.kind))
    return GraphResult(edges, verdicts)
