"""Indecomposable past sets: handles, realization on windows and the Budic-Sachs order."""
from causal_horizon.ip.engine import (
    CFCDescriptor,
    IPFamilyWindow,
    bs_chron,
    build_family,
    chain_for_ip,
    check_bs_identity,
    endpoint_map,
    future_boundary,
    i_embed,
    is_indecomposable,
    realize,
)
from causal_horizon.ip.handles import Chain, IPHandle, Point, pip, tip

__all__ = [
    "CFCDescriptor",
    "Chain",
    "IPFamilyWindow",
    "IPHandle",
    "Point",
    "bs_chron",
    "build_family",
    "chain_for_ip",
    "check_bs_identity",
    "endpoint_map",
    "future_boundary",
    "i_embed",
    "is_indecomposable",
    "pip",
    "realize",
    "tip",
]
