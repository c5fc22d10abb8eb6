"""Lagged least squares, BIC-difference ratio, F-test and variable-lag Granger."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from numba import njit
from scipy import stats

from .core import ArrayLike, Config, DegenerateDof, TooShort, as_series, validate_pair
from .dtw import AlignmentResult, aligned_predictor, reconstruct

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray  # (n_blocks, order): coefficient of block b at lag i+1
    intercept: float
    residuals: np.ndarray  # one per t in [delta_max, T)
    rss: float
    order: int
    underdetermined: bool


@dataclass(frozen=True)
class GrangerReport:
    rss_restricted: float
    rss_unrestricted: float
    bic0: float
    bic1: float
    bic_diff_ratio: float
    f_stat: Optional[float]
    f_pvalue: Optional[float]
    cause: bool
    order: int
    delta_max: int
    n_obs: int
    fix_lag: bool
    sim_value: Optional[float] = None
    restricted: Optional[RegressionFit] = None
    unrestricted: Optional[RegressionFit] = None
    alignment: Optional[AlignmentResult] = None

    @property
    def score(self) -> float:
        return self.bic_diff_ratio


def _blocks(predictors) -> list:
    return [np.asarray(as_series(p).values if not isinstance(p, np.ndarray) else p, dtype=float)
            for p in predictors]


def lag_design(blocks: Sequence[np.ndarray], order: int, start: int) -> np.ndarray:
    """Intercept plus lags 1..order of every block, rows t = start..T-1.

    Columns are interleaved by lag: [1, b0(t-1), b1(t-1), b0(t-2), ...], so the
    first 1 + p * len(blocks) columns form the order-p design.
    """
    T = blocks[0].size
    n = T - start
    nb = len(blocks)
    A = np.empty((n, 1 + order * nb))
    A[:, 0] = 1.0
    for i in range(1, order + 1):
        for b, v in enumerate(blocks):
            A[:, 1 + (i - 1) * nb + b] = v[start - i:T - i]
    return A


def lag_regress(target: ArrayLike, predictors: Sequence[ArrayLike], delta_max: int,
                order: Optional[int] = None) -> RegressionFit:
    """OLS of target(t) on an intercept and lags of each predictor block.

    The fit window is t in [delta_max, T) whatever the order, so fits of
    different orders (and restricted/unrestricted pairs) share the sample.
    Rank deficiency is resolved by the minimum-norm solution.
    """
    y = np.asarray(as_series(target).values)
    blocks = _blocks(predictors)
    if not 1 <= len(blocks) <= 2:
        raise ValueError("expected one or two predictor blocks")
    if any(b.size != y.size for b in blocks):
        raise ValueError("predictor blocks must match the target length")
    p = delta_max if order is None else order
    if not 1 <= p <= delta_max < y.size:
        raise TooShort(f"need 1 <= order <= delta_max < T (order={p}, delta_max={delta_max}, T={y.size})")
    A = lag_design(blocks, p, delta_max)
    yy = y[delta_max:]
    beta, *_ = np.linalg.lstsq(A, yy, rcond=None)
    resid = yy - A @ beta
    return RegressionFit(
        coefficients=beta[1:].reshape(p, len(blocks)).T.copy(),
        intercept=float(beta[0]),
        residuals=resid,
        rss=float(resid @ resid),
        order=p,
        underdetermined=A.shape[0] <= A.shape[1],
    )


@njit(cache=True)
def _cross_lag_block(va, vb, start, P):
    # H[i, j] = sum over t in [start, T) of va[t-1-i] * vb[t-1-j]
    T = va.size
    H = np.empty((P, P))
    for j in range(P):
        acc = 0.0
        for t in range(start, T):
            acc += va[t - 1] * vb[t - 1 - j]
        H[0, j] = acc
    for i in range(1, P):
        acc = 0.0
        for t in range(start, T):
            acc += va[t - 1 - i] * vb[t - 1]
        H[i, 0] = acc
    # shifting both lags by one moves the summation window by one sample
    for i in range(1, P):
        for j in range(1, P):
            H[i, j] = (H[i - 1, j - 1] + va[start - 1 - i] * vb[start - 1 - j]
                       - va[T - 1 - i] * vb[T - 1 - j])
    return H


def _lagged_gram(y, blocks, max_order, start):
    """Gram matrix and target cross-products of the interleaved lag design,
    in O(n * max_order + max_order^2) per block pair."""
    T = y.size
    nb = len(blocks)
    P = max_order
    m = 1 + P * nb
    G = np.empty((m, m))
    c = np.empty(m)
    G[0, 0] = T - start
    yt = y[start:]
    c[0] = yt.sum()
    for b, v in enumerate(blocks):
        cum = np.concatenate(([0.0], np.cumsum(v)))
        cols = 1 + np.arange(P) * nb + b
        lags = np.arange(1, P + 1)
        G[0, cols] = G[cols, 0] = cum[T - lags] - cum[start - lags]
        c[cols] = [yt @ v[start - i:T - i] for i in lags]
        for a in range(b, nb):
            H = _cross_lag_block(blocks[a], v, start, P)
            rows = 1 + np.arange(P) * nb + a
            G[np.ix_(rows, cols)] = H
            G[np.ix_(cols, rows)] = H.T
    return G, c


def nested_rss(target: ArrayLike, predictors: Sequence[ArrayLike], start: int,
               max_order: int) -> np.ndarray:
    """RSS of the lag regression for every order 1..max_order on rows t >= start.

    A single Cholesky factor of the interleaved Gram matrix yields all nested
    fits. Ill-conditioned designs fall back to one least-squares solve per
    order.
    """
    y = np.asarray(as_series(target).values)
    blocks = _blocks(predictors)
    nb = len(blocks)
    G, c = _lagged_gram(y, blocks, max_order, start)
    yt = y[start:]
    yy = float(yt @ yt)
    try:
        L = scipy.linalg.cholesky(G, lower=True)
        d = np.diag(L) ** 2
        if d.min() <= 1e-10 * np.diag(G).max():
            raise np.linalg.LinAlgError("near singular")
        z = scipy.linalg.solve_triangular(L, c, lower=True)
        explained = np.cumsum(z * z)
        rss = yy - explained[nb::nb]
        return np.maximum(rss, 0.0)
    except (np.linalg.LinAlgError, ValueError):
        A = lag_design(blocks, max_order, start)
        out = np.empty(max_order)
        for p in range(1, max_order + 1):
            sub = A[:, :1 + p * nb]
            beta, *_ = np.linalg.lstsq(sub, yt, rcond=None)
            r = yt - sub @ beta
            out[p - 1] = r @ r
        return out


def bic_restricted(rss: float, T: int, order: int) -> float:
    return (rss / T) * T ** ((order + 1) / T)


def bic_unrestricted(rss: float, T: int, order: int) -> float:
    return (rss / T) * T ** ((2 * order + 1) / T)


def bic_diff_ratio(bic0: float, bic1: float) -> float:
    """(bic0 - bic1) / bic0, with bic0 == 0 mapped to -inf (or 0 when bic1 == 0 too)."""
    if bic0 < 0:
        raise ValueError("bic0 must be non-negative")
    if bic0 == 0.0:
        return 0.0 if bic1 == 0.0 else -math.inf
    return (bic0 - bic1) / bic0


def f_test(rss_restricted: float, rss_unrestricted: float, n_obs: int,
           p_restricted: int, p_unrestricted: int):
    """Nested-model F test. Returns (F, p-value); F <= 0 gives p = 1."""
    df1 = p_unrestricted - p_restricted
    df2 = n_obs - p_unrestricted
    if df2 <= 0 or df1 <= 0:
        raise DegenerateDof(f"degrees of freedom ({df1}, {df2}) are not positive")
    num = (rss_restricted - rss_unrestricted) / df1
    if rss_unrestricted <= 0.0:
        return (math.inf, 0.0) if num > 0 else (0.0, 1.0)
    F = num / (rss_unrestricted / df2)
    if F <= 0:
        return F, 1.0
    return F, float(stats.f.sf(F, df1, df2))


def max_order(T: int, delta_max: int) -> int:
    """Largest lag order searched: at most delta_max, and the two-block
    model keeps at least half of its rows as residual degrees of freedom."""
    n = T - delta_max
    return max(1, min(delta_max, (n // 2 - 1) // 2))


def select_order(y: np.ndarray, predictor: np.ndarray, delta_max: int):
    """Lag order minimizing BIC_1 of the two-block model, plus both RSS curves."""
    T = y.size
    pmax = max_order(T, delta_max)
    urss = nested_rss(y, [y, predictor], delta_max, pmax)
    orders = np.arange(1, pmax + 1)
    bic1 = urss / T * T ** ((2 * orders + 1) / T)
    return int(np.argmin(bic1)) + 1


def granger_test(y: np.ndarray, predictor: np.ndarray, delta_max: int, cfg: Config,
                 fix_lag: bool, order: Optional[int] = None, sim_value=None,
                 alignment=None) -> GrangerReport:
    """Compare Y-only against Y-plus-predictor lag regressions."""
    T = y.size
    p = select_order(y, predictor, delta_max) if order is None else int(order)
    r = lag_regress(y, [y], delta_max, order=p)
    u = lag_regress(y, [y, predictor], delta_max, order=p)
    b0 = bic_restricted(r.rss, T, p)
    b1 = bic_unrestricted(u.rss, T, p)
    ratio = bic_diff_ratio(b0, b1)
    n_obs = T - delta_max
    try:
        fstat, fp = f_test(r.rss, u.rss, n_obs, 1 + p, 1 + 2 * p)
    except DegenerateDof:
        fstat, fp = None, None
    if r.rss == 0.0:
        cause = False
    elif cfg.criterion == "ftest":
        cause = fp is not None and fp <= cfg.alpha
    else:
        cause = ratio >= cfg.gamma
    if cfg.use_sigma and sim_value is not None:
        cause = cause and sim_value >= cfg.sigma
    return GrangerReport(
        rss_restricted=r.rss, rss_unrestricted=u.rss, bic0=b0, bic1=b1,
        bic_diff_ratio=ratio, f_stat=fstat, f_pvalue=fp, cause=bool(cause),
        order=p, delta_max=delta_max, n_obs=n_obs, fix_lag=fix_lag,
        sim_value=sim_value, restricted=r, unrestricted=u, alignment=alignment,
    )


def vl_granger(x: ArrayLike, y: ArrayLike, cfg: Config = Config(), fix_lag: bool = False,
               order: Optional[int] = None) -> GrangerReport:
    """Does x (variable-lag) Granger-cause y?

    With fix_lag the lags of x enter directly. Otherwise x is first aligned to
    y by DTW and the aligned predictor enters instead.
    """
    xs, ys = validate_pair(x, y, cfg)
    dmax = cfg.resolve_delta_max(xs.T)
    if fix_lag:
        return granger_test(ys.values, xs.values, dmax, cfg, True, order=order)
    al = reconstruct(xs, ys, cfg)
    pred = aligned_predictor(xs, al.lag_path, al.delta0)
    return granger_test(ys.values, pred, dmax, cfg, False, order=order,
                        sim_value=al.sim_value, alignment=al)
