"""Exception hierarchy. All errors are ValueErrors so callers can catch them uniformly."""
from __future__ import annotations

from typing import Any


class CausalHorizonError(ValueError):
    """Base error; `witness` holds the offending point, pair or index when there is one."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class DomainError(CausalHorizonError):
    pass


class PreconditionError(CausalHorizonError):
    pass


class CertificateError(CausalHorizonError):
    """A chain generator broke its monotonicity certificate."""


class InternalConsistencyError(CausalHorizonError):
    """Two independent computations of the same quantity disagree."""


class ChainConstructionError(CausalHorizonError):
    pass


class ConvergenceError(CausalHorizonError):
    pass


class SteppingError(CausalHorizonError):
    pass


class FamilyIncompleteError(CausalHorizonError):
    pass


class TailMismatchError(CausalHorizonError):
    pass


class UnsupportedSpaceError(CausalHorizonError):
    pass


class ConditionStarViolated(CausalHorizonError):
    """A warping function has a divergent integral of f^(-1/2) towards the end of the interval."""

    def __init__(self, message: str, factor: int, expression: str) -> None:
        super().__init__(message, witness=factor)
        self.factor = factor
        self.expression = expression


class PosetError(CausalHorizonError):
    pass


class UsageError(CausalHorizonError):
    """Bad subcommand, space, flag value or input document; the CLI exits with status 2."""
