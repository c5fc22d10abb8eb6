"""Seeded generators for the pairwise and group benchmarks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import BadConfig, TimeSeries, derive_seed, rng_stream

GENERATORS = ("normal", "arma")


@dataclass(frozen=True)
class PairwiseScenario:
    """One pairwise dataset.

    freeze is a 1-based inclusive interval of y that holds the value copied
    from x at the 1-based index freeze_source. y_generator defaults to the
    x generator and only matters for non-causal pairs.
    """

    generator: str = "normal"
    causal: bool = True
    T: int = 200
    delta: int = 5
    noise_scale: float = 0.1
    freeze: Optional[Tuple[int, int]] = (110, 170)
    freeze_source: int = 100
    seed: int = 0
    y_generator: Optional[str] = None
    arma_coef: float = 0.2

    def __post_init__(self):
        for g in (self.generator, self.y_generator or self.generator):
            if g not in GENERATORS:
                raise BadConfig(f"unknown generator {g!r}")
        if self.delta < 1:
            raise BadConfig("delta must be >= 1")
        if self.T < 2:
            raise BadConfig("T must be >= 2")
        if self.freeze is not None:
            a, b = self.freeze
            if not 1 <= a <= b <= self.T:
                raise BadConfig(f"freeze interval {self.freeze} outside [1, {self.T}]")
            if not 1 <= self.freeze_source <= self.T:
                raise BadConfig("freeze_source outside the series")


def source(generator: str, n: int, rng: np.random.Generator, coef: float = 0.2) -> np.ndarray:
    """White noise or the AR(1) recursion x(t) = coef * x(t-1) + e(t)."""
    eps = rng.standard_normal(n)
    if generator == "normal":
        return eps
    if generator != "arma":
        raise BadConfig(f"unknown generator {generator!r}")
    out = np.empty(n)
    out[0] = eps[0] / np.sqrt(1.0 - coef * coef)  # stationary start
    for t in range(1, n):
        out[t] = coef * out[t - 1] + eps[t]
    return out


def gen_pairwise(s: PairwiseScenario):
    """Return (x, y) as TimeSeries."""
    rng = rng_stream(s.seed, "pairwise")
    T = s.T
    if not s.causal:
        x = source(s.generator, T, rng, s.arma_coef)
        y = source(s.y_generator or s.generator, T, rng, s.arma_coef)
        return TimeSeries(x, "X"), TimeSeries(y, "Y")
    src = source(s.generator, T + s.delta, rng, s.arma_coef)
    x = src[s.delta:]
    y = src[:T] + s.noise_scale * rng.standard_normal(T)  # y(t) = x(t - delta) + noise
    if s.freeze is not None:
        a, b = s.freeze
        y[a - 1:b] = x[s.freeze_source - 1] + s.noise_scale * rng.standard_normal()
    return TimeSeries(x, "X"), TimeSeries(y, "Y")


GROUP_CAUSES = ("X1", "X2", "X3")
GROUP_SUBSETS = ((1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))


def group_names() -> List[str]:
    return list(GROUP_CAUSES) + ["Y" + "".join(map(str, s)) for s in GROUP_SUBSETS]


def group_truth() -> set:
    """Ground-truth edges: X_i -> Y_S whenever i is in S."""
    return {(f"X{i}", "Y" + "".join(map(str, s))) for s in GROUP_SUBSETS for i in s}


def gen_group(generator: str = "normal", seed: int = 0, T: int = 200, delta: int = 5,
              noise_scale: float = 0.1):
    """Ten-member group: three sources and one follower per non-empty subset.

    Each follower averages noisy delta-lagged copies of its sources.
    """
    from .pipeline import GroupData

    rng = rng_stream(seed, "group")
    srcs = [source(generator, T + delta, rng) for _ in GROUP_CAUSES]
    members: Dict[str, TimeSeries] = {}
    for name, s in zip(GROUP_CAUSES, srcs):
        members[name] = TimeSeries(s[delta:], name)
    for subset in GROUP_SUBSETS:
        copies = [srcs[i - 1][:T] + noise_scale * rng.standard_normal(T) for i in subset]
        name = "Y" + "".join(map(str, subset))
        members[name] = TimeSeries(np.mean(copies, axis=0), name)
    return GroupData(members)


@dataclass(frozen=True)
class SuiteInstance:
    id: str
    category: str
    label: bool
    x: TimeSeries
    y: TimeSeries
    scenario: PairwiseScenario


SUITE_CATEGORIES = (
    ("causal-normal", dict(generator="normal", causal=True)),
    ("causal-arma", dict(generator="arma", causal=True)),
    ("indep-normal", dict(generator="normal", causal=False)),
    ("indep-arma", dict(generator="arma", causal=False)),
    ("indep-normal-arma", dict(generator="normal", causal=False, y_generator="arma")),
)


def gen_benchmark_suite(seed: int = 0, per_category: int = 15, T: int = 200) -> List[SuiteInstance]:
    """Five categories of pairwise datasets; 15 each gives 30 causal and 45 not."""
    out = []
    for c, (cat, kw) in enumerate(SUITE_CATEGORIES):
        for k in range(per_category):
            idx = c * per_category + k
            sc = PairwiseScenario(T=T, seed=derive_seed(seed, "suite", idx), **kw)
            x, y = gen_pairwise(sc)
            out.append(SuiteInstance(f"{idx:03d}", cat, sc.causal, x, y, sc))
    return out
