"""Two-terminal network reliability via survival signatures."""

from ._netrel import (
    Estimate,
    Network,
    NetrelError,
    ReliabilityCurve,
    SignatureTable,
    __version__,
    al_kst,
    default_grid,
    exact,
    load_network,
    mc_kst,
    parse_network,
    predict_variant,
    relative_error,
    reliability,
    rf_kst,
)

__all__ = [
    "Estimate",
    "Network",
    "NetrelError",
    "ReliabilityCurve",
    "SignatureTable",
    "__version__",
    "al_kst",
    "default_grid",
    "exact",
    "load_network",
    "mc_kst",
    "parse_network",
    "predict_variant",
    "relative_error",
    "reliability",
    "rf_kst",
]
