"""GallerySpace: an oracle together with its boundary charts and default window."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

from causal_horizon.chron.oracle import ChronOracle, SampleWindow

if TYPE_CHECKING:
    from causal_horizon.ip.engine import CFCDescriptor


@dataclass
class GallerySpace:
    """A worked example spacetime.

    `charts` map a chart name to a parametric generator of IP handles (boundary TIPs or interior
    PIPs); they are the candidate enumerators for L- and the acceptance oracles for boundaries.
    `product` marks a time axis 0 with the remaining axes spatial, which graph functions need.
    """

    name: str
    oracle: ChronOracle
    box: tuple[tuple[float, ...], tuple[float, ...]]
    charts: dict[str, Callable[..., Any]] = field(default_factory=dict)
    cfc: CFCDescriptor | None = None
    product: bool = True
    description: str = ""

    def window(self, h: float, lo=None, hi=None) -> SampleWindow:
        lo = self.box[0] if lo is None else lo
        hi = self.box[1] if hi is None else hi
        return self.oracle.window(h, lo, hi)

    def chart(self, name: str) -> Callable[..., Any]:
        if name not in self.charts:
            raise ValueError(f"Unknown chart for {self.name}: {name}. Use one of {sorted(self.charts)}")
        return self.charts[name]
