"""Dynamic time warping, cross-correlation lag and DTW-based reconstruction.

All indices are 0-based. A warping path pair (i, j) matches x[i] with y[j];
the delay attached to y[t] is t - i for the last i matched to t.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .core import (
    ArrayLike,
    Config,
    LagPath,
    NonFinite,
    TimeSeries,
    ValidationError,
    WindowInfeasible,
    as_series,
    validate_pair,
)

logger = logging.getLogger(__name__)


@njit(cache=True)
def _banded_cost(x, y, w):
    # acc[i, j - i + w + 1] is the accumulated cost of cell (i, j); one +inf
    # sentinel on each side of the band in every row keeps the loop branch-free
    nx, ny = x.size, y.size
    width = 2 * w + 3
    acc = np.empty((nx, width))
    inf = np.inf
    for i in range(nx):
        lo = max(0, i - w)
        hi = min(ny - 1, i + w)
        row = acc[i]
        row[lo - i + w] = inf
        row[hi - i + w + 2] = inf
        xi = x[i]
        if i == 0:
            run = 0.0
            for j in range(lo, hi + 1):
                run += abs(xi - y[j])
                row[j + w + 1] = run
            continue
        prev = acc[i - 1]
        for j in range(lo, hi + 1):
            k = j - i + w + 1
            best = prev[k]
            if prev[k + 1] < best:
                best = prev[k + 1]
            if row[k - 1] < best:
                best = row[k - 1]
            row[k] = abs(xi - y[j]) + best
    return acc


@njit(cache=True)
def _backtrack(acc, w, nx, ny):
    ii = np.empty(nx + ny, np.int64)
    jj = np.empty(nx + ny, np.int64)
    i, j = nx - 1, ny - 1
    n = 0
    ii[n] = i
    jj[n] = j
    n += 1
    while i > 0 or j > 0:
        k = j - i + w + 1
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1, k]
            up = acc[i - 1, k + 1]
            left = acc[i, k - 1]
            # ties go to the diagonal, then to (i-1, j)
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        ii[n] = i
        jj[n] = j
        n += 1
    return ii[:n][::-1].copy(), jj[:n][::-1].copy()


@dataclass(frozen=True)
class DtwMatrix:
    """Accumulated costs inside a Sakoe-Chiba band.

    band[i, j - i + window + 1] holds the cost of cell (i, j); only cells with
    |i - j| <= window (and inside the matrix) are meaningful. Dense views are
    built on demand with +inf outside the band.
    """

    band: np.ndarray
    window: int
    x: np.ndarray
    y: np.ndarray

    @property
    def shape(self):
        return (self.x.size, self.y.size)

    @property
    def cost(self) -> np.ndarray:
        nx, ny = self.shape
        out = np.full((nx, ny), np.inf)
        for i in range(nx):
            lo, hi = max(0, i - self.window), min(ny - 1, i + self.window)
            off = self.window + 1 - i
            out[i, lo:hi + 1] = self.band[i, lo + off:hi + off + 1]
        return out

    @property
    def point_cost(self) -> np.ndarray:
        return np.abs(self.x[:, None] - self.y[None, :])


@dataclass(frozen=True)
class WarpingPath:
    pairs: np.ndarray  # (K, 2) integer array of (i, j)

    def __len__(self):
        return int(self.pairs.shape[0])

    def delays(self, ny: int) -> np.ndarray:
        """Delay per target index: t minus the last x-index matched to t."""
        last = np.full(ny, -1, dtype=np.int64)
        last[self.pairs[:, 1]] = self.pairs[:, 0]  # later pairs overwrite earlier ones
        return np.arange(ny, dtype=np.int64) - last


@dataclass(frozen=True)
class AlignmentResult:
    """Reconstruction of the cause series along the selected delays.

    lag_path holds the delays actually used, so reconstructed[t] ==
    x[t - lag_path.delays[t]]. A negative selected delay would read the
    future of x; the used path holds the last admissible matched x index
    there instead, then clamps to [0, min(delta_max, t)]. raw_delays keeps
    the unclamped selection, which is what sim_value summarizes.
    """

    reconstructed: TimeSeries
    lag_path: LagPath
    raw_delays: np.ndarray
    sim_value: float
    delta0: int
    distance: float
    path: WarpingPath


def _raw(v) -> np.ndarray:
    arr = np.ascontiguousarray(v.values if isinstance(v, TimeSeries) else v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("expected a non-empty 1-d series")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("series contains NaN or infinite values")
    return arr


def dtw_align(x: ArrayLike, y: ArrayLike, window: Optional[int] = None):
    """DTW with |x_i - y_j| point cost inside |i - j| <= window.

    Returns (DtwMatrix, WarpingPath, distance). window=None means no band.
    """
    xv, yv = _raw(x), _raw(y)
    nx, ny = xv.size, yv.size
    w = max(nx, ny) if window is None else int(window)
    if w < 1:
        raise WindowInfeasible(f"window must be >= 1, got {w}")
    if abs(nx - ny) > w:
        raise WindowInfeasible(f"window {w} cannot connect lengths {nx} and {ny}")
    w = min(w, max(nx, ny))
    acc = _banded_cost(xv, yv, w)
    ii, jj = _backtrack(acc, w, nx, ny)
    dist = float(acc[nx - 1, ny - nx + w + 1])
    return DtwMatrix(acc, w, xv, yv), WarpingPath(np.column_stack([ii, jj])), dist


@njit(cache=True)
def _lag_correlations(x, y, dmax):
    T = x.size
    out = np.full(dmax + 1, np.nan)
    for d in range(dmax + 1):
        n = T - d
        if n < 2:
            continue
        mx = 0.0
        my = 0.0
        for t in range(n):
            mx += x[t]
            my += y[t + d]
        mx /= n
        my /= n
        sxy = 0.0
        sxx = 0.0
        syy = 0.0
        for t in range(n):
            a = x[t] - mx
            b = y[t + d] - my
            sxy += a * b
            sxx += a * a
            syy += b * b
        if sxx > 0.0 and syy > 0.0:
            out[d] = sxy / np.sqrt(sxx * syy)
    return out


def lag_correlations(x: ArrayLike, y: ArrayLike, delta_max: int) -> np.ndarray:
    """Pearson correlation of x[:T-d] with y[d:] for d = 0..delta_max (NaN if degenerate)."""
    xv = np.ascontiguousarray(as_series(x).values)
    yv = np.ascontiguousarray(as_series(y).values)
    return _lag_correlations(xv, yv, int(delta_max))


def cross_correlation_lag(x: ArrayLike, y: ArrayLike, delta_max: int):
    """Shift d in [0, delta_max] maximizing corr(x[:T-d], y[d:]).

    Returns (delta0, degenerate). Ties go to the smallest shift. When any
    overlap has zero variance the lag is reported as 0 with degenerate=True.
    """
    corr = lag_correlations(x, y, delta_max)
    if np.any(np.isnan(corr)):
        return 0, True
    return int(np.argmax(corr)), False


def emulation_similarity(path) -> float:
    """Mean sign of the delays; positive means y trails x."""
    d = np.asarray(path.delays if isinstance(path, LagPath) else path)
    if d.size == 0:
        raise ValueError("empty path")
    return float(np.sign(d).sum() / d.size)


def path_similarity(path: WarpingPath) -> float:
    """Mean sign of j - i over the pairs of a warping path.

    Transposing the path flips every sign, so this form is antisymmetric in
    the argument order.
    """
    d = path.pairs[:, 1] - path.pairs[:, 0]
    return float(np.sign(d).sum() / d.size)


def _hold_future(raw: np.ndarray) -> np.ndarray:
    """Replace negative delays (matches into the future of x) by a hold on the
    last admissible matched x index."""
    t = np.arange(raw.size)
    good = raw >= 0
    last = np.maximum.accumulate(np.where(good, t, -1))
    m = np.where(good, t - raw, 0)
    held = np.where(last >= 0, m[np.maximum(last, 0)], 0)
    return np.where(good, raw, t - held)


def reconstruct(x: ArrayLike, y: ArrayLike, cfg: Config) -> AlignmentResult:
    """Rebuild x along the per-step delays that best match y.

    Each DTW delay is kept only when it brings x closer to y[t] than the
    global cross-correlation lag does; otherwise the global lag is used.
    See AlignmentResult for how the used delays are made admissible.
    """
    xs, ys = validate_pair(x, y, cfg)
    T = xs.T
    dmax = cfg.resolve_delta_max(T)
    xv, yv = xs.values, ys.values
    _, path, dist = dtw_align(xv, yv, window=dmax)
    dtw_delays = path.delays(T)
    delta0, degenerate = cross_correlation_lag(xv, yv, dmax)
    if degenerate:
        logger.debug("cross-correlation degenerate; using delta0=0")

    t = np.arange(T)
    err_dtw = np.abs(xv[t - dtw_delays] - yv)
    src0 = t - delta0
    err_cc = np.full(T, np.inf)
    ok = src0 >= 0
    err_cc[ok] = np.abs(xv[src0[ok]] - yv[ok])
    raw = np.where(err_dtw < err_cc, dtw_delays, delta0)

    used = np.clip(_hold_future(raw), 0, np.minimum(dmax, t))
    rec = xv[t - used]
    return AlignmentResult(
        reconstructed=TimeSeries(rec, name="x_dtw"),
        lag_path=LagPath(used, T),
        raw_delays=raw.astype(np.int64),
        sim_value=emulation_similarity(raw),
        delta0=delta0,
        distance=dist,
        path=path,
    )


def aligned_predictor(x: ArrayLike, lag_path: LagPath, anchor: int = 0) -> np.ndarray:
    """One-step-ahead guess of the x sample that y copies next.

    With m[s] = s - delay[s] the x index matched to y[s], the value at s is
    x[m[s] + step] where step is 0 if the path held still at s (m[s] ==
    m[s-1]) and 1 otherwise, capped at x[s]. Up to s = anchor (the global
    lag) the early part of y has no counterpart in x and the path is pinned
    near x[0], so there the guess follows the anchor shift x[s + 1 - anchor].
    Used as a lagged regressor its lag-1 value at t only depends on delays
    up to t - 1. A constant delay equal to the anchor gives a shifted x, and
    an all-zero path with anchor 0 returns x unchanged.
    """
    xv = as_series(x).values
    s = np.arange(xv.size)
    d = np.asarray(lag_path.delays)
    m = s - d
    step = np.ones(xv.size, dtype=np.int64)
    step[1:] = m[1:] != m[:-1]
    idx = m + step
    early = s <= anchor
    idx[early] = np.maximum(s[early] + 1 - anchor, 0)
    return xv[np.minimum(idx, s)]
