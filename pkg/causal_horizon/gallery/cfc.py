"""The strip as a conformal future compactification inside the Minkowski plane, and its endpoint checks."""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from causal_horizon.gallery.flat import minkowski2, strip, toward_boundary
from causal_horizon.ip.engine import CFCDescriptor, endpoint_map, realize
from causal_horizon.ip.handles import IPHandle, pip
from causal_horizon.limits.families import SetSequenceFamily
from causal_horizon.metrics.convergence import metric_verdict, tail_fit
from causal_horizon.schemas import RespectReport

logger = logging.getLogger(__name__)

RESPECT_HORIZON = 32


def strip_cfc() -> CFCDescriptor:
    """E: (0,1)^2 -> R^{1,1} the inclusion; the inverse sends p to I-(p) cut back to the strip."""
    source = strip().oracle
    target = minkowski2().oracle

    def inverse(p: Sequence[float]) -> IPHandle:
        p = np.asarray(p, dtype=float)
        if bool(np.asarray(source.admissible(p[None, :])).ravel()[0]):
            return pip(p)
        return toward_boundary(p, source.admissible)

    return CFCDescriptor(source=source, target=target, embed=lambda X: np.asarray(X, dtype=float), inverse=inverse)


def respect_handles() -> list[tuple[IPHandle, tuple[float, float]]]:
    """Six interior PIPs and six TIPs toward the future edge, each with its expected endpoint."""
    out = []
    for x in np.linspace(0.25, 0.75, 6):
        p = (0.5 + 0.3 * (x - 0.5), float(x))
        out.append((pip(p), p))
    for x in np.linspace(0.2, 0.8, 6):
        p = (1.0, float(x))
        out.append((toward_boundary(p, strip().oracle.admissible), p))
    return out


def respect_families() -> list[tuple[SetSequenceFamily, IPHandle]]:
    """Handle families paired with a candidate limit handle: three convergent, two not."""
    adm = strip().oracle.admissible
    H = RESPECT_HORIZON
    return [
        (SetSequenceFamily(lambda n: toward_boundary((1.0, 0.5 + 1 / (4 * n)), adm), "edge(1/4n)", horizon=H),
         toward_boundary((1.0, 0.5), adm)),
        (SetSequenceFamily(lambda n: pip((0.5, 0.5 + (-1) ** n / (4 * (n + 1)))), "zigzag", horizon=H),
         pip((0.5, 0.5))),
        (SetSequenceFamily(lambda n: pip((0.5 + 1 / (2 * (n + 1)), 0.5)), "descending", horizon=H),
         pip((0.5, 0.5))),
        (SetSequenceFamily(lambda n: toward_boundary((1.0, 0.3 if n % 2 else 0.7), adm), "edge-alternating",
                           horizon=H),
         toward_boundary((1.0, 0.5), adm)),
        (SetSequenceFamily(lambda n: pip((0.5, 0.3 if n % 2 else 0.7)), "alternating", horizon=H),
         pip((0.5, 0.5))),
    ]


def respect_check(h: float = 1 / 32, tol: float = 1e-3) -> RespectReport:
    """The endpoint map and its inverse are mutually inverse, and d1 convergence of handles
    matches Euclidean convergence of their endpoints."""
    cfc = strip_cfc()
    window = strip().window(h)
    errors, inverse_ok = [], True
    for handle, expected in respect_handles():
        end = endpoint_map(cfc, handle, window)
        errors.append(float(np.linalg.norm(np.asarray(end.point) - np.asarray(expected))))
        back = cfc.inverse(end.point)
        if not window.same(realize(back, window), realize(handle, window)):
            inverse_ok = False
            logger.warning("inverse endpoint of %s realizes a different set", handle.label)
        again = endpoint_map(cfc, cfc.inverse(expected))
        errors.append(float(np.linalg.norm(np.asarray(again.point) - np.asarray(expected))))

    agreement = []
    for family, candidate in respect_families():
        target = np.asarray(endpoint_map(cfc, candidate).point)
        ns = list(family.tail_range())
        gaps = [float(np.linalg.norm(np.asarray(endpoint_map(cfc, family(n)).point) - target)) for n in ns]
        endpoint_conv = tail_fit(ns, gaps, 0.0, tol).converges
        handle_conv = metric_verdict(family, [candidate], window, "d1", tol=tol).candidates == [0]
        agreement.append(endpoint_conv == handle_conv)
        logger.info("respect %s: endpoints %s, handles %s", family.label, endpoint_conv, handle_conv)

    max_err = max(errors)
    ok = inverse_ok and max_err <= 2 * h and all(agreement)
    return RespectReport(ok=ok, max_endpoint_error=max_err, inverse_ok=inverse_ok, convergence_agreement=agreement)
