"""Pydantic models for documents, reports and run configuration."""
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

Witness = list[Any]


# ---------------------------------------------------------------- documents


class RelationDoc(BaseModel):
    """Explicit finite chronology: point ids and related pairs given as index pairs."""

    points: list[int | str] = Field(..., description="Point identifiers")
    chron: list[tuple[int, int]] = Field(default_factory=list, description="Pairs (i, j) meaning i << j")

    @model_validator(mode="after")
    def _indices_in_range(self) -> RelationDoc:
        n = len(self.points)
        for i, j in self.chron:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"chron pair ({i}, {j}) out of range for {n} points")
        return self


class PosetDoc(BaseModel):
    """Explicit partial order; `leq` lists pairs (i, j) meaning i <= j."""

    points: list[int | str] = Field(..., description="Point identifiers")
    leq: list[tuple[int, int]] = Field(default_factory=list, description="Pairs (i, j) meaning i <= j")

    @model_validator(mode="after")
    def _indices_in_range(self) -> PosetDoc:
        n = len(self.points)
        for i, j in self.leq:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"leq pair ({i}, {j}) out of range for {n} points")
        return self


class FamilySpecDoc(BaseModel):
    """A sequence of past sets given by a generator template with the index `n` as placeholder."""

    space: str = Field(..., description="Gallery space name")
    kind: Literal["pip", "tip"] = Field("pip", description="pip: apex per n; tip: boundary chain limit per n")
    template: list[str] = Field(..., min_length=1, description="One expression in n per coordinate")
    candidate: list[float] | None = Field(None, description="Coordinates of the expected limit")
    candidate_kind: Literal["pip", "tip"] = "pip"
    label: str = ""
    period: int | None = Field(None, description="Set when the family takes finitely many values with this period")
    start: int = Field(1, ge=0)


class WarpFactorDoc(BaseModel):
    graph: dict[str, Any] = Field(
        ...,
        description='{"kind": "cycle"|"segment", "n": int, "length": float} or {"edges": [[u, v, length], ...]}',
    )
    warp: str = Field("1", description="Expression in (b-t): constants, powers, sums")


class WarpSpecDoc(BaseModel):
    a: float
    b: float
    dt: float = Field(..., gt=0)
    substeps: int = Field(4, ge=1, description="Sub-edges per time step length when subdividing factor graphs")
    factors: list[WarpFactorDoc] = Field(default_factory=list)

    @field_validator("b")
    @classmethod
    def _finite_b(cls, v: float) -> float:
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("b must be finite")
        return v

    @model_validator(mode="after")
    def _ordered(self) -> WarpSpecDoc:
        if not self.a < self.b:
            raise ValueError("interval must satisfy a < b")
        return self


# ---------------------------------------------------------------- reports


class WindowMeta(BaseModel):
    space: str
    pitch: float
    lo: list[float] = Field(default_factory=list)
    hi: list[float] = Field(default_factory=list)
    n_points: int = 0


class RelationReport(BaseModel):
    """Chronological-set axioms evaluated on a window; every false flag has witnesses."""

    n_points: int
    irreflexive: bool
    transitive: bool
    connex: bool
    separable: bool
    witnesses: dict[str, list[Witness]] = Field(default_factory=dict)

    @property
    def is_chronological_set(self) -> bool:
        return self.irreflexive and self.transitive and self.connex and self.separable


class PushupReport(BaseModel):
    ok: bool
    violations: list[Witness] = Field(default_factory=list, description="Triples (x, y, z) breaking push-up")


class IndecomposabilityVerdict(BaseModel):
    indecomposable: bool
    synoptic: bool = Field(..., description="Test 1: every pair of core points has a joint future inside the set")
    brute_force: bool | None = Field(None, description="Test 2: no split of the maximal layer covers; None when skipped")
    witness: Witness | None = Field(None, description="Pair of points with empty joint future inside the set")


class BSVerdict(BaseModel):
    value: bool
    witness: Witness | None = None
    window_limited: bool = False


class HandleDescriptor(BaseModel):
    kind: Literal["point", "chain"]
    label: str = ""
    apex: list[float] | None = None
    chain_head: list[list[float]] = Field(default_factory=list, description="First chain points")
    certificate: str | None = None


class FamilyDoc(BaseModel):
    window: WindowMeta
    handles: list[HandleDescriptor]
    subset: list[list[bool]]
    bs: list[list[bool]]
    ties: list[tuple[int, int]] = Field(default_factory=list, description="Distinct handles that are mutually included")


class BSIdentityReport(BaseModel):
    ok: bool
    n_pairs: int
    mismatches: list[Witness] = Field(default_factory=list, description="(i, j, direction)")
    reflection_failures: list[tuple[int, int]] = Field(default_factory=list)
    ties: list[tuple[int, int]] = Field(default_factory=list)


class EndpointResult(BaseModel):
    point: list[float]
    depth: int = 0
    second_chain_gap: float | None = None


class RungVerdict(BaseModel):
    verdict: bool | None
    mode: Literal["exact", "window-approximate"]
    witnesses: list[Witness] = Field(default_factory=list)
    note: str = ""


class LadderAudit(BaseModel):
    space: str
    rungs: dict[str, RungVerdict]
    implication_violations: list[str] = Field(default_factory=list)


class LimitVerdict(BaseModel):
    operator: Literal["L-", "L+", "metric-d1", "metric-delta-mu", "graph-f"]
    candidates: list[int] = Field(default_factory=list, description="Indices into the candidate list")
    labels: list[str] = Field(default_factory=list)
    status: Literal["exact", "stable", "indeterminate"] = "stable"
    diagnostics: dict[str, Any] = Field(default_factory=dict)


class FirstOrderReport(BaseModel):
    ok: bool
    x_limit_ok: bool
    y_limits_ok: list[bool]
    probe_in_liminf_past: bool
    probe_excluded: bool
    n_diagonals: int
    witness: Witness | None = None


class FrechetReport(BaseModel):
    ok: bool
    constant: bool
    subsequence: bool
    non_limit_witnesses: dict[str, str] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)


class TailFit(BaseModel):
    limit: float
    slope: float
    converges: bool
    allowance: float


class IOVerdict(BaseModel):
    inner: bool | None
    outer: bool | None
    witness: Witness | None = None
    n_probes: int = 0

    @property
    def converges(self) -> bool | None:
        if self.inner is None or self.outer is None:
            return None
        return self.inner and self.outer


class TFAEVector(BaseModel):
    label: str
    items: dict[str, bool | None]
    fits: dict[str, TailFit] = Field(default_factory=dict)

    @property
    def core_constant(self) -> bool:
        core = [self.items[k] for k in ("1", "2", "3", "4", "8", "*")]
        return None not in core and len(set(core)) == 1


class BusemannReport(BaseModel):
    labels: list[str]
    distances: list[list[float]]
    components: list[list[int]]
    min_cross: float
    monotone: bool
    finite: list[bool]


class WarpCompletionReport(BaseModel):
    ok: bool
    star_integrals: list[float]
    chart: list[list[float]] = Field(default_factory=list, description="Boundary chart points (b, vertex coordinates)")
    limits: list[list[float]] = Field(default_factory=list, description="Computed limits of the boundary chains")
    classified: list[list[float]] = Field(default_factory=list, description="Chart point each boundary chain is classified to")
    endpoint_errors: list[float] = Field(default_factory=list)
    agreement: float = 0.0
    n_handles: int = 0


class CrosscheckReport(BaseModel):
    """Analytic chron against lattice path search on pairs whose verdict survives small time shifts."""

    space: str
    n_pairs: int
    disagreements: list[Witness] = Field(default_factory=list, description="(p, q, analytic, path)")

    @property
    def ok(self) -> bool:
        return not self.disagreements


class RespectReport(BaseModel):
    ok: bool
    max_endpoint_error: float
    inverse_ok: bool
    convergence_agreement: list[bool] = Field(default_factory=list)


class AchronalityReport(BaseModel):
    ok: bool
    resolutions: list[float]
    witnesses: list[Witness] = Field(default_factory=list)


class RoundtripReport(BaseModel):
    relation: Literal["equal", "alpha-proper-subset", "leq-proper-subset", "incomparable"]
    alpha_only: list[tuple[int, int]] = Field(default_factory=list)
    leq_only: list[tuple[int, int]] = Field(default_factory=list)
    margin_mismatches: int = 0


class FilterReport(BaseModel):
    n_down_sets: int
    n_directed: int
    n_principal: int
    all_principal: bool


# ---------------------------------------------------------------- run plumbing


class ExperimentConfig(BaseModel):
    """Everything a CLI run needs; identical config and seed give identical artifacts."""

    space: str = Field("strip", description="Gallery space name")
    spec: str | None = Field(None, description="Path to a family or warp spec JSON")
    input: str | None = Field(None, description="Path to an explicit relation or poset JSON")
    demo: str | None = Field(None, description="Demo name for the demo subcommand")
    h: float = Field(1 / 32, gt=0, description="Grid pitch")
    window: list[float] | None = Field(None, description="Window box lo0 hi0 lo1 hi1 ...")
    tol: float = Field(1e-3, gt=0, description="Metric tolerance")
    margin_mult: float = Field(2.0, gt=0, description="Erosion margin in units of h")
    probe_budget: int = Field(20000, gt=0)
    depth: int = Field(64, ge=1, description="Chain evaluation depth")
    horizon: int = Field(64, ge=2, description="Index horizon for set limits")
    seed: int = 0
    out: str = Field("out", description="Output directory")
    workers: int = Field(1, ge=1)

    @property
    def resolutions(self) -> list[float]:
        return [self.h, self.h / 2]


class RunResult(BaseModel):
    ok: bool
    exit_code: int = 0
    message: str = ""
    artifacts: list[str] = Field(default_factory=list)
    verdicts: dict[str, Any] = Field(default_factory=dict)
