import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from vlcausal.core import Config, DegenerateDof, TooShort, rng_stream
from vlcausal.granger import (
    bic_diff_ratio,
    bic_restricted,
    bic_unrestricted,
    f_test,
    lag_regress,
    max_order,
    nested_rss,
    vl_granger,
)
from vlcausal.simulate import PairwiseScenario, gen_pairwise


# ---- BIC and ratio

def test_bic_scalar_example():
    b0 = bic_restricted(1.0, 100, 5)
    b1 = bic_unrestricted(1.0, 100, 5)
    # frozen from direct evaluation of (rss / T) * T ** ((p + 1) / T) and the 2p + 1 variant
    assert b0 == pytest.approx(0.0131826, abs=1e-6)
    assert b1 == pytest.approx(0.0165959, abs=1e-6)
    assert bic_diff_ratio(b0, b1) == pytest.approx(-0.2589, abs=1e-4)


def test_bic_zero_rss():
    assert bic_unrestricted(0.0, 100, 5) == 0.0
    assert bic_diff_ratio(bic_restricted(2.0, 100, 5), 0.0) == 1.0
    assert bic_diff_ratio(0.0, 0.3) == -math.inf
    assert bic_diff_ratio(0.0, 0.0) == 0.0


@pytest.mark.parametrize("b0,b1,r", [(1.5, 1.5, 0.0), (2.0, 1.0, 0.5), (1.0, 2.0, -1.0)])
def test_ratio_arithmetic(b0, b1, r):
    assert bic_diff_ratio(b0, b1) == r


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_ratio_at_most_one(b0, b1):
    assert bic_diff_ratio(b0, b1) <= 1.0


# ---- F test

def test_f_test_example_against_incomplete_beta_oracle():
    F, p = f_test(120.0, 100.0, 110, 6, 11)
    assert F == pytest.approx((20 / 5) / (100 / 99), rel=1e-12)
    assert p == pytest.approx(oracles.f_sf(F, 5, 99), rel=1e-9)
    assert p == pytest.approx(0.0026, abs=1e-4)


def test_f_test_limits():
    assert f_test(5.0, 5.0, 50, 2, 4) == (0.0, 1.0)
    assert f_test(4.0, 5.0, 50, 2, 4)[1] == 1.0
    assert f_test(5.0, 1e-12, 50, 2, 4)[1] < 1e-12
    with pytest.raises(DegenerateDof):
        f_test(5.0, 4.0, 10, 2, 10)


# ---- regression

def test_lag_regress_exact_shift():
    rng = rng_stream(1, "test-lr")
    x = rng.standard_normal(101)
    target = np.r_[0.0, x[:-1]]  # target(t) = x(t - 1)
    fit = lag_regress(target, [x], 1)
    assert np.max(np.abs(fit.residuals)) < 1e-9
    assert fit.coefficients[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_lag_regress_white_noise_against_normal_equations():
    y = rng_stream(2, "test-lr").standard_normal(200)
    fit = lag_regress(y, [y], 1)
    assert fit.rss == pytest.approx(oracles.lag_regression_rss(y, [y], 1, 1), rel=1e-9)
    assert fit.rss / 199 == pytest.approx(np.var(y[1:]), rel=0.1)


def test_lag_regress_constant_target():
    fit = lag_regress(np.full(30, 2.5), [np.arange(30.0)], 3)
    assert fit.rss == pytest.approx(0.0, abs=1e-18)


def test_lag_regress_order_bounds():
    with pytest.raises(TooShort):
        lag_regress(np.arange(10.0), [np.arange(10.0)], 10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.booleans())
def test_nested_rss_matches_direct_fits(seed, pmax, two):
    rng = rng_stream(seed, "test-nested")
    y, x = rng.standard_normal(60), rng.standard_normal(60)
    blocks = [y, x] if two else [y]
    start = 8
    got = nested_rss(y, blocks, start, pmax)
    ref = [oracles.lag_regression_rss(y, blocks, start, p) for p in range(1, pmax + 1)]
    np.testing.assert_allclose(got, ref, rtol=1e-7, atol=1e-9)
    assert np.all(np.diff(got) <= 1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_unrestricted_never_worse(seed, p):
    rng = rng_stream(seed, "test-nest2")
    y, x = rng.standard_normal(80), rng.standard_normal(80)
    r = lag_regress(y, [y], 8, order=p)
    u = lag_regress(y, [y, x], 8, order=p)
    assert u.rss <= r.rss + 1e-9


def test_max_order():
    assert max_order(200, 40) == 39
    assert max_order(200, 10) == 10
    assert max_order(5, 3) == 1


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_ratio_scale_invariant(seed, c):
    x, y = gen_pairwise(PairwiseScenario(seed=seed, T=120, freeze=None))
    cfg = Config(delta_max=10)
    for fix in (True, False):
        a = vl_granger(x.values, y.values, cfg, fix_lag=fix).bic_diff_ratio
        b = vl_granger(c * x.values, c * y.values, cfg, fix_lag=fix).bic_diff_ratio
        assert a == pytest.approx(b, abs=1e-9)


# ---- end to end

def test_fixed_lag_copy_is_causal():
    x, y = gen_pairwise(PairwiseScenario(seed=4, freeze=None))
    rep = vl_granger(x, y, Config(delta_max=10), fix_lag=True)
    assert rep.cause and rep.bic_diff_ratio > 0.9
    # the restricted/unrestricted sums agree with a direct solve at the chosen order
    yy, xx = y.values, x.values
    assert rep.rss_restricted == pytest.approx(oracles.lag_regression_rss(yy, [yy], 10, rep.order), rel=1e-8)
    assert rep.rss_unrestricted == pytest.approx(
        oracles.lag_regression_rss(yy, [yy, xx], 10, rep.order), rel=1e-6, abs=1e-9)


def test_variable_lag_default_generator():
    x, y = gen_pairwise(PairwiseScenario(seed=0))
    rep = vl_granger(x, y, Config(), fix_lag=False)
    assert rep.cause and rep.bic_diff_ratio >= 0.5
    assert rep.sim_value is not None


def test_independent_pair_not_causal():
    x, y = gen_pairwise(PairwiseScenario(seed=8, causal=False))
    for fix in (True, False):
        rep = vl_granger(x, y, Config(), fix_lag=fix)
        assert not rep.cause
        assert abs(rep.bic_diff_ratio) < 0.2


def test_ftest_criterion():
    x, y = gen_pairwise(PairwiseScenario(seed=0))
    rep = vl_granger(x, y, Config(criterion="ftest"), fix_lag=False)
    assert rep.cause and rep.f_pvalue <= 0.05
