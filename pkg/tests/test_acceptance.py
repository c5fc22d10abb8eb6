"""End-to-end acceptance checks.

Each test records one PASS/FAIL line; conftest prints them together at the
end of the run. Run alone with `pytest tests/test_acceptance.py -s`.
"""

import time

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

import oracles
from conftest import ACCEPTANCE_LINES
from vlcausal.core import Config, rng_stream
from vlcausal.dtw import dtw_align
from vlcausal.evaluate import benchmark, score
from vlcausal.granger import vl_granger
from vlcausal.pipeline import _gt, infer_causal_graph
from vlcausal.simulate import PairwiseScenario, gen_group, gen_pairwise, group_truth
from vlcausal.tentropy import shannon_te, vl_transfer_entropy

FRACS = (0.1, 0.2, 0.3, 0.4)


def record(n, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] C{n:02d} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def varlag_pair(rng, T=200, dmax=10):
    """y(t) = x(t - d_t) with a delay that random-walks inside [1, dmax]."""
    d = np.empty(T, dtype=int)
    cur = int(rng.integers(1, dmax + 1))
    for t in range(T):
        if rng.random() < 0.1:
            cur = int(np.clip(cur + rng.choice([-2, -1, 1, 2]), 1, dmax))
        d[t] = cur
    src = rng.standard_normal(T + dmax)
    return src[dmax:], src[np.arange(T) - d + dmax]


# ---- 1, 2: oracle suites

def test_c01_dtw_oracle():
    rng = rng_stream(0, "acc-dtw")
    t0 = time.perf_counter()
    bad = 0
    for _ in range(500):
        x = tuple(int(v) for v in rng.integers(0, 3, rng.integers(1, 9)))
        y = tuple(int(v) for v in rng.integers(0, 3, rng.integers(1, 9)))
        bad += dtw_align(x, y)[2] != min(oracles.dtw_all_path_costs(x, y))
    el = time.perf_counter() - t0
    ok = bad == 0 and el < 10
    assert record(1, "DTW vs exhaustive paths", ok, f"{500 - bad}/500 exact, {el:.2f} s (< 10 s)")


def test_c02_te_oracle():
    rng = rng_stream(0, "acc-te")
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        a, n = int(rng.integers(1, 4)), int(rng.integers(3, 21))
        sx, sy = rng.integers(0, a, n), rng.integers(0, a, n)
        ref = max(oracles.transfer_entropy(sx.tolist(), sy.tolist()), 0.0)
        worst = max(worst, abs(shannon_te(sx, sy) - ref))
    el = time.perf_counter() - t0
    ok = worst < 1e-12 and el < 5
    assert record(2, "TE vs joint-count oracle", ok, f"max error {worst:.1e} (< 1e-12), {el:.2f} s (< 5 s)")


# ---- 3, 4: alignment properties

def test_c03_constant_lag_matches_fixed_lag():
    cfg = Config(delta_max=10)
    worst = 0.0
    for i in range(50):
        rng = rng_stream(0, "acc-const", i)
        d = int(rng.integers(1, 11))
        src = rng.standard_normal(200 + d)
        x, y = src[d:], src[:200]
        vl = vl_granger(x, y, cfg)
        fx = vl_granger(x, y, cfg, fix_lag=True)
        worst = max(worst, abs(vl.rss_unrestricted - fx.rss_unrestricted) / fx.rss_restricted)
    ok = worst < 1e-6
    assert record(3, "constant lag: aligned RSS equals fixed-lag RSS", ok,
                  f"max relative gap {worst:.1e} over 50 pairs (< 1e-6)")


def test_c04_variable_lag_lowers_residual_variance():
    cfg = Config(delta_max=10)
    wins = 0
    for i in range(50):
        x, y = varlag_pair(rng_stream(0, "acc-var", i))
        vl = vl_granger(x, y, cfg)
        fx = vl_granger(x, y, cfg, fix_lag=True)
        wins += np.var(vl.unrestricted.residuals) < np.var(fx.unrestricted.residuals)
    ok = wins >= 45
    assert record(4, "variable lag: VAR(aligned) < VAR(fixed)", ok, f"{wins}/50 strict (>= 45)")


# ---- 5, 10: pairwise suite

@pytest.fixture(scope="module")
def suite_rows(suite0):
    t0 = time.perf_counter()
    rows = benchmark(suite0, ["vlg", "g", "vlte", "te"], FRACS, Config())
    return {(r.method, r.delta_max_frac): r for r in rows}, time.perf_counter() - t0


def test_c05_pairwise_benchmark(suite_rows):
    rows, el = suite_rows
    acc = [rows["vlg", f].metrics.accuracy for f in FRACS]
    auc = {m: [rows[m, f].auc for f in FRACS] for m in ("vlg", "g", "vlte", "te")}
    acc_ok = min(acc) >= 0.85
    g_ok = all(a > b for a, b in zip(auc["vlg"], auc["g"]))
    te_ok = all(a > b for a, b in zip(auc["vlte"], auc["te"]))
    time_ok = el < 600
    fmt = lambda v: "/".join(f"{a:.3f}" for a in v)
    detail = (f"VL-G accuracy {fmt(acc)} (>= 0.85); AUC VL-G {fmt(auc['vlg'])} vs G {fmt(auc['g'])} "
              f"[{'ok' if g_ok else 'not greater'}]; AUC VL-TE {fmt(auc['vlte'])} vs TE {fmt(auc['te'])} "
              f"[{'ok' if te_ok else 'not greater'}]; {el:.0f} s (< 600 s)")
    record(5, "pairwise benchmark", acc_ok and g_ok and te_ok and time_ok, detail)
    assert acc_ok and time_ok
    assert te_ok
    assert g_ok, "AUC(VL-G) must strictly exceed AUC(G) at every delta_max"


def test_c10_negative_controls(suite_rows):
    rows, _ = suite_rows
    # the default delta_max is floor(0.2 T)
    fpr_g = rows["vlg", 0.2].metrics.fpr
    fpr_te = rows["vlte", 0.2].metrics.fpr
    n_neg = rows["vlg", 0.2].metrics.counts.fp + rows["vlg", 0.2].metrics.counts.tn
    ok = n_neg == 45 and fpr_g <= 0.15 and fpr_te <= 0.15
    assert record(10, "negative controls", ok,
                  f"FPR VL-G {fpr_g:.3f}, VL-TE {fpr_te:.3f} on {n_neg} negatives (<= 0.15)")


# ---- 6: group benchmark

def test_c06_group_graph():
    cfg = Config(gamma=0.3, delta_max=10)
    truth = group_truth()
    preds, labels, f1s = [], [], []
    for seed in range(15):
        g = gen_group(seed=seed)
        res = infer_causal_graph(g, cfg)
        edges = res.edge_set()
        pairs = sorted(res.verdicts)
        p = [e in edges for e in pairs]
        t = [e in truth for e in pairs]
        preds += p
        labels += t
        f1s.append(score(p, t).f1 or 0.0)
    m = score(preds, labels)
    ok = m.f1 >= 0.75
    assert record(6, "group edge inference", ok,
                  f"F1 {m.f1:.3f} (>= 0.75), precision {m.precision:.3f}, recall {m.recall:.3f}, "
                  f"mean per-instance F1 {np.mean(f1s):.3f}")


# ---- 7, 8: default-generator statistics

def test_c07_default_generator_targets():
    g_hits = te_hits = 0
    cfg = Config(nboot=100)
    for seed in range(50):
        x, y = gen_pairwise(PairwiseScenario(seed=seed))
        g = vl_granger(x, y, cfg)
        g_hits += g.cause and g.bic_diff_ratio >= 0.5
        te = vl_transfer_entropy(x, y, cfg.replace(seed=seed))
        te_hits += te.ratio > 1 and te.pvalue_xy <= 0.05
    ok = g_hits >= 45 and te_hits >= 40
    assert record(7, "default generator soft targets", ok,
                  f"VL-G cause with ratio >= 0.5 on {g_hits}/50 (>= 45); "
                  f"VL-TE ratio > 1 with p <= 0.05 on {te_hits}/50 (>= 40)")


def test_c08_ratio_dominance():
    cfg = Config(nboot=0)
    g_wins = te_wins = 0
    for i in range(100):
        x, y = gen_pairwise(PairwiseScenario(seed=1000 + i))
        g_wins += vl_granger(x, y, cfg).bic_diff_ratio > vl_granger(x, y, cfg, fix_lag=True).bic_diff_ratio
        te_wins += _gt(vl_transfer_entropy(x, y, cfg).ratio,
                       vl_transfer_entropy(x, y, cfg, fix_lag=True).ratio)
    ok = g_wins >= 70 and te_wins >= 70
    assert record(8, "variable-lag statistic dominates", ok,
                  f"BIC ratio {g_wins}/100, TE ratio {te_wins}/100 (>= 70 each)")


# ---- 9: performance

def test_c09_performance():
    rng = rng_stream(0, "acc-perf")
    src = rng.standard_normal(5100)
    x = src[100:]
    y = src[:5000] + 0.1 * rng.standard_normal(5000)
    vl_granger(x[:300], y[:300], Config(delta_max=20))  # compile the jitted kernels first

    def best(dmax):
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            vl_granger(x, y, Config(delta_max=dmax))
            times.append(time.perf_counter() - t0)
        return min(times)

    with threadpool_limits(limits=1):
        small, large = best(250), best(1000)
    ratio = large / small
    # linear growth would give x4 for a x4 wider window; allow three times that
    ok = small <= 60 and ratio <= 12
    assert record(9, "runtime at T=5000", ok,
                  f"{small:.3f} s at delta_max=250 (<= 60 s), {large:.3f} s at 1000, "
                  f"growth x{ratio:.1f} (<= x12)")
