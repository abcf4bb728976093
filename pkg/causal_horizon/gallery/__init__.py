"""Gallery of model spacetimes: dispatch by name."""
from __future__ import annotations

import logging

from causal_horizon.gallery.cfc import strip_cfc
from causal_horizon.gallery.cylinder import cylinder
from causal_horizon.gallery.flat import closed_strip, minkowski2, punctured, slit, strip
from causal_horizon.gallery.grapefruit import grapefruit
from causal_horizon.gallery.space import GallerySpace
from causal_horizon.gallery.warped import warp_completion, warp_space

logger = logging.getLogger(__name__)

_BUILDERS = {
    "strip": strip,
    "closed-strip": closed_strip,
    "minkowski2": minkowski2,
    "punctured": punctured,
    "slit": slit,
    "cylinder": cylinder,
    "grapefruit": grapefruit,
}

SPACES = list(_BUILDERS)


def make_space(name: str, h: float | None = None) -> GallerySpace:
    """Build a gallery space. `h` is only validated here; windows take their pitch when sampled."""
    if name not in _BUILDERS:
        raise ValueError(f"Unknown space: {name}. Use one of {SPACES}")
    if h is not None and not h > 0:
        raise ValueError(f"resolution must be positive, got {h}")
    space = _BUILDERS[name]()
    if name == "strip":
        space.cfc = strip_cfc()
    logger.info("built space %s", name)
    return space


__all__ = ["GallerySpace", "SPACES", "make_space", "warp_completion", "warp_space"]
