"""Discretization, plug-in transfer entropy, bootstrap significance and VL-TE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .core import (
    ArrayLike,
    BinSpec,
    Config,
    LagPath,
    TooShort,
    ValidationError,
    as_series,
    rng_stream,
    validate_pair,
)
from .dtw import aligned_predictor, reconstruct


@dataclass(frozen=True)
class SymbolSeries:
    symbols: np.ndarray
    alphabet_size: int
    bin_edges: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int64)
        if s.ndim != 1:
            raise ValidationError("symbols must be one-dimensional")
        if s.size and (s.min() < 0 or s.max() >= self.alphabet_size):
            raise ValidationError("symbol outside the alphabet")
        e = np.asarray(self.bin_edges, dtype=float)
        if e.size > 1 and np.any(np.diff(e) <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        object.__setattr__(self, "symbols", s)
        object.__setattr__(self, "bin_edges", e)

    def __len__(self):
        return int(self.symbols.size)


@dataclass(frozen=True)
class TEReport:
    te_xy: float
    te_yx: float
    ratio: float  # +inf when only te_yx is zero, nan when both are
    pvalue_xy: Optional[float]
    pvalue_yx: Optional[float]
    cause: bool
    fix_lag: bool
    sim_value: Optional[float] = None

    @property
    def score(self) -> float:
        return self.ratio


def discretize(x: ArrayLike, bins: BinSpec = BinSpec()) -> SymbolSeries:
    """Map a real series to symbols; a value equal to an edge goes to the lower bin."""
    v = as_series(x).values
    if bins.kind == "quantile":
        edges = np.quantile(v, np.asarray(bins.probs, dtype=float))
    elif bins.kind == "width":
        edges = np.linspace(v.min(), v.max(), bins.n + 1)[1:-1]
    else:
        edges = np.asarray(bins.edges, dtype=float)
    edges = np.unique(edges)
    if v.min() == v.max():
        return SymbolSeries(np.zeros(v.size, dtype=np.int64), 1, np.empty(0), degenerate=True)
    sym = np.searchsorted(edges, v, side="left")
    return SymbolSeries(sym, edges.size + 1, edges)


def _as_symbols(s):
    if isinstance(s, SymbolSeries):
        return s.symbols, s.alphabet_size
    arr = np.asarray(s, dtype=np.int64)
    return arr, int(arr.max()) + 1 if arr.size else 1


def _history_code(s, base, length, start, stop):
    # code of (s[t-1], ..., s[t-length]) for t in [start, stop)
    code = np.zeros(stop - start, dtype=np.int64)
    for j in range(1, length + 1):
        code = code * base + s[start - j:stop - j]
    return code


def shannon_te(sx, sy, k: int = 1, l: int = 1) -> float:
    """Plug-in transfer entropy from x to y in bits.

    sum p(y_t, y_past, x_past) log2 [p(y_t | y_past, x_past) / p(y_t | y_past)]
    with y_past of length k and x_past of length l.
    """
    x, ax = _as_symbols(sx)
    y, ay = _as_symbols(sy)
    if x.size != y.size:
        raise ValidationError("symbol series lengths differ")
    m = max(k, l)
    T = y.size
    if T <= m + 1:
        raise TooShort(f"need more than {m + 1} samples for k={k}, l={l}")
    yt = y[m:]
    yp = _history_code(y, ay, k, m, T)
    xp = _history_code(x, ax, l, m, T)
    nyp = ay ** k
    nxp = ax ** l
    # joint index (y_t, y_past, x_past) -> counts, then marginals by summation
    joint = np.bincount((yt * nyp + yp) * nxp + xp, minlength=ay * nyp * nxp)
    joint = joint.reshape(ay, nyp, nxp).astype(float)
    n_bx = joint.sum(axis=0)  # (y_past, x_past)
    n_ab = joint.sum(axis=2)  # (y_t, y_past)
    n_b = n_ab.sum(axis=0)  # y_past
    a, b, c = np.nonzero(joint)
    nabc = joint[a, b, c]
    te = np.sum(nabc * np.log2(nabc * n_b[b] / (n_ab[a, b] * n_bx[b, c]))) / yt.size
    return max(float(te), 0.0)


def te_ratio(te_xy: float, te_yx: float) -> float:
    if te_yx > 0:
        return te_xy / te_yx
    return math.inf if te_xy > 0 else math.nan


@njit(cache=True)
def _markov_draw(cum_trans, cum_init, u):
    out = np.empty(u.size, np.int64)
    s = np.searchsorted(cum_init, u[0], side="right")
    out[0] = s
    for t in range(1, u.size):
        row = cum_trans[s]
        s = np.searchsorted(row, u[t], side="right")
        out[t] = s
    return out


def markov_fit(sym: np.ndarray, alphabet: int):
    """Cumulative first-order transition rows and the cumulative marginal.

    States never left (only seen last) fall back to the marginal.
    """
    counts = np.zeros((alphabet, alphabet))
    np.add.at(counts, (sym[:-1], sym[1:]), 1.0)
    marg = np.bincount(sym, minlength=alphabet).astype(float)
    marg /= marg.sum()
    rows = counts.sum(axis=1, keepdims=True)
    trans = np.where(rows > 0, counts / np.where(rows > 0, rows, 1.0), marg)
    cum = np.cumsum(trans, axis=1)
    cum[:, -1] = 1.0
    cm = np.cumsum(marg)
    cm[-1] = 1.0
    return cum, cm


def markov_resample(sym: np.ndarray, alphabet: int, rng: np.random.Generator) -> np.ndarray:
    cum, cm = markov_fit(sym, alphabet)
    u = rng.random(sym.size)
    return np.minimum(_markov_draw(cum, cm, u), alphabet - 1)


def block_bootstrap_pvalue(sx, sy, k: int = 1, l: int = 1, nboot: int = 100,
                           seed: int = 0, tag: str = "te-bootstrap"):
    """Add-one bootstrap p-values for TE in both directions.

    The cause series of each direction is replaced by a first-order Markov
    chain fitted to its own transitions, which keeps its serial dependence
    and breaks any coupling with the other series.
    """
    if nboot < 1:
        raise ValueError("nboot must be >= 1")
    x, ax = _as_symbols(sx)
    y, ay = _as_symbols(sy)
    obs_xy = shannon_te(x, y, k, l)
    obs_yx = shannon_te(y, x, k, l)
    hit_xy = hit_yx = 0
    for b in range(nboot):
        xb = markov_resample(x, ax, rng_stream(seed, tag + ":x", b))
        yb = markov_resample(y, ay, rng_stream(seed, tag + ":y", b))
        hit_xy += shannon_te(xb, y, k, l) >= obs_xy
        hit_yx += shannon_te(yb, x, k, l) >= obs_yx
    return (1 + hit_xy) / (nboot + 1), (1 + hit_yx) / (nboot + 1)


def resample_values(x: np.ndarray, sym: SymbolSeries, rng: np.random.Generator) -> np.ndarray:
    """Real-valued surrogate: Markov-chain symbols, values drawn within each bin."""
    states = markov_resample(sym.symbols, sym.alphabet_size, rng)
    out = np.empty(x.size)
    for a in range(sym.alphabet_size):
        pool = x[sym.symbols == a]
        where = states == a
        if pool.size and where.any():
            out[where] = rng.choice(pool, size=int(where.sum()))
    return out


def realigned_bootstrap_pvalue(x: np.ndarray, y: np.ndarray, cfg: Config,
                               obs_xy: float, obs_yx: float, tag: str = "te-vl"):
    """Bootstrap p-values for the variable-lag TE that redo the alignment.

    The DTW alignment is searched with y in view, so aligning a surrogate of
    the cause series to the real target keeps that search inside the null.
    """
    sx_raw = discretize(x, cfg.te_bins)
    sy_raw = discretize(y, cfg.te_bins)
    sy = sy_raw
    hit_xy = hit_yx = 0
    for b in range(cfg.nboot):
        xb = resample_values(x, sx_raw, rng_stream(cfg.seed, tag + ":x", b))
        al = reconstruct(xb, y, cfg)
        pred = aligned_predictor(xb, al.lag_path, al.delta0)
        hit_xy += shannon_te(discretize(pred, cfg.te_bins), sy, cfg.te_k, cfg.te_l) >= obs_xy
        yb = resample_values(y, sy_raw, rng_stream(cfg.seed, tag + ":y", b))
        al = reconstruct(x, yb, cfg)
        pred = aligned_predictor(x, al.lag_path, al.delta0)
        hit_yx += shannon_te(discretize(yb, cfg.te_bins), discretize(pred, cfg.te_bins),
                             cfg.te_k, cfg.te_l) >= obs_yx
    return (1 + hit_xy) / (cfg.nboot + 1), (1 + hit_yx) / (cfg.nboot + 1)


def vl_transfer_entropy(x: ArrayLike, y: ArrayLike, cfg: Config = Config(),
                        fix_lag: bool = False, lag_path: Optional[LagPath] = None) -> TEReport:
    """TE ratio of x -> y, using the DTW-aligned predictor unless fix_lag.

    A lag_path may be supplied to bypass the alignment step; the bootstrap
    then treats the alignment as fixed and resamples symbols only.
    """
    xs, ys = validate_pair(x, y, cfg)
    sim = None
    searched = False
    anchor = 0
    if fix_lag:
        cause_series = xs.values
    else:
        if lag_path is None:
            al = reconstruct(xs, ys, cfg)
            lag_path, sim, anchor = al.lag_path, al.sim_value, al.delta0
            searched = True
        cause_series = aligned_predictor(xs, lag_path, anchor)
    sx = discretize(cause_series, cfg.te_bins)
    sy = discretize(ys, cfg.te_bins)
    te_xy = shannon_te(sx, sy, cfg.te_k, cfg.te_l)
    te_yx = shannon_te(sy, sx, cfg.te_k, cfg.te_l)
    ratio = te_ratio(te_xy, te_yx)
    p_xy = p_yx = None
    if cfg.nboot > 0:
        if searched and cfg.vl_null == "realign":
            p_xy, p_yx = realigned_bootstrap_pvalue(xs.values, ys.values, cfg, te_xy, te_yx)
        else:
            tag = "te-fixed" if fix_lag else "te-vl"
            p_xy, p_yx = block_bootstrap_pvalue(sx, sy, cfg.te_k, cfg.te_l, cfg.nboot, cfg.seed, tag)
    cause = (not math.isnan(ratio)) and ratio > 1
    if p_xy is not None:
        cause = cause and p_xy <= cfg.alpha
    if cfg.use_sigma and sim is not None:
        cause = cause and sim >= cfg.sigma
    return TEReport(te_xy, te_yx, ratio, p_xy, p_yx, bool(cause), fix_lag, sim)

