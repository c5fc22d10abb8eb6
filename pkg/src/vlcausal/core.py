"""Shared types, configuration, validation and seeded RNG streams."""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

ArrayLike = Union[Sequence[float], np.ndarray, "TimeSeries"]


class VLCausalError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(VLCausalError):
    """Input rejected by a validation gate."""


class LengthMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class BadDeltaMax(ValidationError):
    pass


class BadConfig(ValidationError):
    pass


class TooShort(ValidationError):
    pass


class DegenerateDof(VLCausalError):
    pass


class WindowInfeasible(VLCausalError):
    pass


class UnknownMember(ValidationError):
    pass


class BadInterval(ValidationError):
    pass


class SingleClass(VLCausalError):
    pass


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Equally spaced real observations. Values are stored read-only."""

    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValidationError(f"series must be one-dimensional, got shape {arr.shape}")
        if arr.size < 2:
            raise TooShort(f"series needs at least 2 observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"series {self.name or '<unnamed>'} contains NaN or infinite values")
        object.__setattr__(self, "values", _frozen_array(arr))

    @property
    def T(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.T


def as_series(x: ArrayLike, name: str = "") -> TimeSeries:
    if isinstance(x, TimeSeries):
        return x
    return TimeSeries(np.asarray(x, dtype=float), name=name)


@dataclass(frozen=True)
class LagPath:
    """Per-step integer delays; entry t says Y(t) is matched to X(t - delay)."""

    delays: np.ndarray
    source_length: int

    def __post_init__(self):
        d = np.asarray(self.delays)
        if d.ndim != 1 or d.size == 0:
            raise ValidationError("lag path must be a non-empty 1-d sequence")
        if not np.all(np.equal(np.mod(d, 1), 0)):
            raise ValidationError("lag path delays must be integers")
        d = d.astype(np.int64)
        src = np.arange(d.size) - d
        if src.min() < 0 or src.max() >= self.source_length:
            raise ValidationError("lag path points outside the cause series")
        object.__setattr__(self, "delays", _frozen_array(d, dtype=np.int64))

    def __len__(self):
        return int(self.delays.size)


class VerdictKind(str, enum.Enum):
    TRUE_VARIABLE = "TRUE-VARIABLE"
    TRUE_FIXED = "TRUE-FIXED"
    NONE = "NONE"


class Method(str, enum.Enum):
    GRANGER = "GRANGER"
    TRANSFER_ENTROPY = "TRANSFER_ENTROPY"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("granger", "g", "vlg"):
            return cls.GRANGER
        if key in ("te", "transfer_entropy", "transfer-entropy", "vlte"):
            return cls.TRANSFER_ENTROPY
        raise BadConfig(f"unknown method {value!r}")


@dataclass(frozen=True)
class BinSpec:
    """How a real series is mapped to symbols before entropy estimation.

    kind is "quantile" (edges at the given probabilities), "width" (n equal-width
    bins over the range) or "edges" (explicit thresholds).
    """

    kind: str = "quantile"
    probs: tuple = (0.05, 0.95)
    n: int = 3
    edges: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("quantile", "width", "edges"):
            raise BadConfig(f"unknown bin kind {self.kind!r}")
        if self.kind == "quantile" and not all(0.0 < p < 1.0 for p in self.probs):
            raise BadConfig("quantile probabilities must lie in (0, 1)")
        if self.kind == "width" and self.n < 1:
            raise BadConfig("width binning needs n >= 1")
        if self.kind == "edges" and not self.edges:
            raise BadConfig("explicit binning needs at least one edge")


@dataclass(frozen=True)
class Config:
    """Analysis parameters.

    delta_max=None resolves to max(1, floor(0.2 T)) for the series at hand.
    criterion selects the Granger decision rule: "bic" thresholds the
    BIC-difference ratio at gamma, "ftest" uses the F-test p-value at alpha.
    vl_null picks the bootstrap null of the variable-lag TE: "realign"
    re-runs the alignment for every surrogate, "symbol" resamples the
    aligned symbols only. use_sigma additionally requires the emulation
    similarity to reach sigma before a variable-lag run reports a cause.
    """

    delta_max: Optional[int] = None
    gamma: float = 0.5
    alpha: float = 0.05
    sigma: float = 0.5
    te_k: int = 1
    te_l: int = 1
    te_bins: BinSpec = field(default_factory=BinSpec)
    nboot: int = 100
    seed: int = 0
    criterion: str = "bic"
    use_sigma: bool = False
    vl_null: str = "realign"

    def __post_init__(self):
        if self.delta_max is not None and int(self.delta_max) != self.delta_max:
            raise BadDeltaMax("delta_max must be an integer")
        if not 0.0 <= self.gamma <= 1.0:
            raise BadConfig("gamma must lie in [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise BadConfig("alpha must lie in (0, 1)")
        if not 0.0 < self.sigma <= 1.0:
            raise BadConfig("sigma must lie in (0, 1]")
        if self.te_k < 1 or self.te_l < 1:
            raise BadConfig("TE history lengths must be positive")
        if self.nboot < 0:
            raise BadConfig("nboot must be non-negative")
        if self.vl_null not in ("realign", "symbol"):
            raise BadConfig(f"unknown vl_null {self.vl_null!r}")
        if self.criterion not in ("bic", "ftest"):
            raise BadConfig(f"unknown criterion {self.criterion!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise BadConfig("seed must be a 64-bit unsigned integer")

    def resolve_delta_max(self, T: int) -> int:
        if self.delta_max is None:
            return max(1, int(math.floor(0.2 * T)))
        return int(self.delta_max)

    def replace(self, **changes) -> "Config":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return Config(**data)

    def to_dict(self, T: Optional[int] = None) -> dict:
        out = asdict(self)
        out["te_bins"] = asdict(self.te_bins)
        if T is not None:
            out["delta_max"] = self.resolve_delta_max(T)
        return out


def validate_pair(x: ArrayLike, y: ArrayLike, cfg: Config):
    """Single entry gate for pairwise analyses. Returns (x, y) as TimeSeries."""
    xs = x if isinstance(x, TimeSeries) else _checked(x, "x")
    ys = y if isinstance(y, TimeSeries) else _checked(y, "y")
    if xs.T != ys.T:
        raise LengthMismatch(f"series lengths differ: {xs.T} vs {ys.T}")
    dmax = cfg.resolve_delta_max(xs.T)
    if dmax < 1 or dmax >= xs.T:
        raise BadDeltaMax(f"delta_max={dmax} must satisfy 1 <= delta_max < T={xs.T}")
    return xs, ys


def _checked(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1 and arr.size and not np.all(np.isfinite(arr)):
        raise NonFinite(f"series {name} contains NaN or infinite values")
    return TimeSeries(arr, name=name)


def rng_stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for (seed, purpose tag, replicate index)."""
    key = (zlib.crc32(tag.encode("utf-8")), int(index))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def derive_seed(seed: int, tag: str, index: int = 0) -> int:
    key = (zlib.crc32(tag.encode("utf-8")), int(index))
    return int(np.random.SeedSequence(int(seed), spawn_key=key).generate_state(1, np.uint64)[0])
