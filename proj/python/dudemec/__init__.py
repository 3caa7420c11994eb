"""Decoupled-access heterogeneous MEC network simulator.

Thin Python surface over the C++ core: channel/power helpers, fairness
metrics, and the seeded Monte-Carlo experiment driver.
"""

from dudemec._core import (
    __version__,
    default_config_json,
    derive_seed,
    fpc_power_dbm,
    jain_index,
    pathloss_db,
    rate_percentiles,
    run_drop_json,
    simulate,
)

__all__ = [
    "__version__",
    "default_config_json",
    "derive_seed",
    "fpc_power_dbm",
    "jain_index",
    "pathloss_db",
    "rate_percentiles",
    "run_drop_json",
    "simulate",
]
