import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vlcausal.core import (
    BadConfig,
    BadDeltaMax,
    BinSpec,
    Config,
    LagPath,
    LengthMismatch,
    Method,
    NonFinite,
    TimeSeries,
    TooShort,
    ValidationError,
    derive_seed,
    rng_stream,
    validate_pair,
)


def test_validate_pair_accepts_well_formed():
    x, y = validate_pair([1, 2, 3], [4, 5, 6], Config(delta_max=1))
    assert x.T == y.T == 3
    np.testing.assert_array_equal(y.values, [4, 5, 6])


def test_validate_pair_rejects_length_mismatch():
    with pytest.raises(LengthMismatch):
        validate_pair([1, 2, 3], [1, 2, 3, 4], Config(delta_max=1))


def test_validate_pair_rejects_nan():
    with pytest.raises(NonFinite):
        validate_pair([1, np.nan, 3], [1, 2, 3], Config(delta_max=1))
    with pytest.raises(NonFinite):
        validate_pair([1, 2, 3], [1, np.inf, 3], Config(delta_max=1))


@pytest.mark.parametrize("dmax", [0, 3, 7])
def test_validate_pair_rejects_bad_delta_max(dmax):
    with pytest.raises(BadDeltaMax):
        validate_pair([1, 2, 3], [1, 2, 3], Config(delta_max=dmax))


def test_default_delta_max_is_fifth_of_length():
    assert Config().resolve_delta_max(200) == 40
    assert Config().resolve_delta_max(4) == 1


def test_config_defaults():
    c = Config()
    assert (c.gamma, c.alpha, c.sigma, c.te_k, c.te_l, c.nboot) == (0.5, 0.05, 0.5, 1, 1, 100)
    assert c.te_bins == BinSpec("quantile", (0.05, 0.95))


@pytest.mark.parametrize("kw", [dict(gamma=1.5), dict(alpha=0.0), dict(sigma=0.0), dict(te_k=0),
                                dict(nboot=-1), dict(criterion="aic"), dict(vl_null="x"),
                                dict(delta_max=2.5), dict(seed=-1)])
def test_config_rejects_out_of_range(kw):
    with pytest.raises(ValidationError):
        Config(**kw)


def test_timeseries_is_read_only_and_validated():
    ts = TimeSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        ts.values[0] = 5.0
    with pytest.raises(TooShort):
        TimeSeries([1.0])
    with pytest.raises(ValidationError):
        TimeSeries(np.zeros((2, 2)))


def test_lag_path_range_check():
    LagPath([0, 1, 2], 3)
    with pytest.raises(ValidationError):
        LagPath([1, 0, 0], 3)  # 0 - 1 < 0
    LagPath([0, -1, 0], 3)  # negative delays are representable while in range
    with pytest.raises(ValidationError):
        LagPath([0, 0, -1], 3)  # 2 + 1 is past the end
    with pytest.raises(ValidationError):
        LagPath([0.5, 0, 0], 3)


def test_method_parse():
    assert Method.parse("te") is Method.TRANSFER_ENTROPY
    assert Method.parse("Granger") is Method.GRANGER
    with pytest.raises(BadConfig):
        Method.parse("cg")


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=30))
def test_validate_pair_idempotent(vals):
    cfg = Config(delta_max=1)
    a, b = validate_pair(vals, vals[::-1], cfg)
    a2, b2 = validate_pair(a, b, cfg)
    assert a2 is a and b2 is b


def test_rng_streams_are_deterministic_and_distinct():
    a = rng_stream(7, "boot", 3).random(5)
    np.testing.assert_array_equal(a, rng_stream(7, "boot", 3).random(5))
    assert not np.array_equal(a, rng_stream(7, "boot", 4).random(5))
    assert not np.array_equal(a, rng_stream(7, "sim", 3).random(5))
    assert not np.array_equal(a, rng_stream(8, "boot", 3).random(5))
    assert derive_seed(1, "x", 0) == derive_seed(1, "x", 0) != derive_seed(1, "x", 1)
