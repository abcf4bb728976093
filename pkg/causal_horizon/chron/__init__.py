"""Chronological oracles, sample windows and the relation algebra on them."""
from causal_horizon.chron.oracle import ChronOracle, SampleWindow, explicit_oracle
from causal_horizon.chron.relations import (
    alpha_causal,
    check_pushup,
    chron_future,
    chron_past,
    joint_future,
    validate_chron,
)

__all__ = [
    "ChronOracle",
    "SampleWindow",
    "explicit_oracle",
    "alpha_causal",
    "check_pushup",
    "chron_future",
    "chron_past",
    "joint_future",
    "validate_chron",
]
