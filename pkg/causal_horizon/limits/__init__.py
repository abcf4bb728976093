"""Limits of past-set families: set limits and the operators L- and L+ (diagnostics live in limits.probes)."""
from causal_horizon.limits.families import (
    ArithmeticMap,
    FormulaRegion,
    MaskRegion,
    SetSequenceFamily,
    TailDescriptor,
    constant_family,
)
from causal_horizon.limits.operators import (
    L_minus,
    L_plus,
    SetLimit,
    liminf_pm,
    limsup_pm,
    set_liminf,
    set_limits,
    set_limsup,
)

__all__ = [
    "ArithmeticMap",
    "FormulaRegion",
    "L_minus",
    "L_plus",
    "MaskRegion",
    "SetLimit",
    "SetSequenceFamily",
    "TailDescriptor",
    "constant_family",
    "liminf_pm",
    "limsup_pm",
    "set_liminf",
    "set_limits",
    "set_limsup",
]
