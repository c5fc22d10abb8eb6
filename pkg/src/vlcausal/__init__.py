"""Variable-lag Granger causality and transfer entropy for time series."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BinSpec,
    Config,
    LagPath,
    Method,
    TimeSeries,
    VerdictKind,
    VLCausalError,
    ValidationError,
)
from .dtw import cross_correlation_lag, dtw_align, reconstruct  # noqa: E402
from .granger import GrangerReport, vl_granger  # noqa: E402
from .pipeline import (  # noqa: E402
    CausalVerdict,
    GroupData,
    aggregate,
    infer_causal_graph,
    time_lag_test,
)
from .tentropy import TEReport, vl_transfer_entropy  # noqa: E402

__all__ = [
    "BinSpec", "Config", "LagPath", "Method", "TimeSeries", "VerdictKind",
    "VLCausalError", "ValidationError", "cross_correlation_lag", "dtw_align",
    "reconstruct", "GrangerReport", "vl_granger", "CausalVerdict", "GroupData",
    "aggregate", "infer_causal_graph", "time_lag_test", "TEReport",
    "vl_transfer_entropy",
]
