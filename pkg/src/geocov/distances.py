"""Distance laws between the terminal and satellites on the orbit circle.

Five laws cover everything the coverage analysis needs:

* ``NEAREST_BPP``      distance to the nearest of N uniform satellites
* ``SERVING_BPP``      nearest distance conditioned on being visible
* ``INTERFERER_GIVEN_R0``  interferer distance given serving distance r0
* ``NEAREST_PPP``      Poisson-limit approximation of NEAREST_BPP
* ``SERVING_PPP``      Poisson-limit approximation of SERVING_BPP

All CDFs are expressible through the arc fraction psi(r, phi) and invert
in closed form, so quantiles and samplers need no root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from geocov import geometry
from geocov.geometry import GeometryContext

__all__ = ["DistanceKind", "DistanceLaw", "cdf", "pdf", "quantile", "sample"]


class DistanceKind(Enum):
    NEAREST_BPP = "nearest_bpp"
    SERVING_BPP = "serving_bpp"
    INTERFERER_GIVEN_R0 = "interferer_given_r0"
    NEAREST_PPP = "nearest_ppp"
    SERVING_PPP = "serving_ppp"


_NEEDS_VISIBILITY = {
    DistanceKind.SERVING_BPP,
    DistanceKind.SERVING_PPP,
    DistanceKind.INTERFERER_GIVEN_R0,
}


@dataclass(frozen=True)
class DistanceLaw:
    """One distance law bound to a geometry, latitude and satellite count.

    ``r0`` is required exactly for ``INTERFERER_GIVEN_R0`` (the serving
    distance being conditioned on) and must lie in the serving support.
    """

    kind: DistanceKind
    ctx: GeometryContext
    phi: float
    n_sats: int
    r0: float | None = None

    def __post_init__(self):
        if not isinstance(self.n_sats, (int, np.integer)) or self.n_sats < 1:
            raise ValueError("n_sats must be an integer >= 1")
        if not np.isfinite(self.phi) or abs(self.phi) > math.pi / 2:
            raise ValueError("phi must be finite and in [-pi/2, pi/2]")
        if self.kind in _NEEDS_VISIBILITY and abs(self.phi) >= self.ctx.phi_inv:
            raise ValueError(f"{self.kind.value}: no visible arc at |phi| >= phi_inv")
        if self.kind is DistanceKind.INTERFERER_GIVEN_R0:
            if self.r0 is None:
                raise ValueError("r0 is required for the interferer law")
            lo = geometry.r_min(self.ctx, self.phi)
            hi = self.ctx.r_vis_max
            tol = geometry.SUPPORT_RTOL * hi
            if not (lo - tol <= self.r0 <= hi + tol):
                raise ValueError("r0 outside the serving support")
        elif self.r0 is not None:
            raise ValueError("r0 only applies to the interferer law")

    @property
    def support(self) -> tuple[float, float]:
        lo = geometry.r_min(self.ctx, self.phi)
        if self.kind in (DistanceKind.NEAREST_BPP, DistanceKind.NEAREST_PPP):
            return lo, geometry.r_max(self.ctx, self.phi)
        if self.kind is DistanceKind.INTERFERER_GIVEN_R0:
            return float(self.r0), self.ctx.r_vis_max
        return lo, self.ctx.r_vis_max


def _psi(law: DistanceLaw, r):
    return np.asarray(geometry.psi(law.ctx, r, law.phi))


def _psi_span(law: DistanceLaw):
    """(psi at lower support end, psi at r_vis_max)."""
    psi_vis = geometry.psi(law.ctx, law.ctx.r_vis_max, law.phi)
    if law.kind is DistanceKind.INTERFERER_GIVEN_R0:
        return geometry.psi(law.ctx, law.r0, law.phi), psi_vis
    return 0.0, psi_vis


def cdf(law: DistanceLaw, r):
    """CDF of the law at distance ``r`` (km); 0 below and 1 above support."""
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("r must be finite")
    lo, hi = law.support
    inside = (arr >= lo) & (arr < hi)
    # clip so psi never sees out-of-support distances
    rc = np.clip(arr, lo, hi)
    n = law.n_sats
    if law.kind is DistanceKind.NEAREST_BPP:
        vals = 1.0 - (1.0 - _psi(law, rc)) ** n
    elif law.kind is DistanceKind.SERVING_BPP:
        denom = 1.0 - (1.0 - geometry.p_vis(law.ctx, law.phi)) ** n
        vals = (1.0 - (1.0 - _psi(law, rc)) ** n) / denom
    elif law.kind is DistanceKind.INTERFERER_GIVEN_R0:
        psi0, psi_vis = _psi_span(law)
        vals = (_psi(law, rc) - psi0) / (psi_vis - psi0)
    elif law.kind is DistanceKind.NEAREST_PPP:
        vals = 1.0 - np.exp(-n * _psi(law, rc))
    else:  # SERVING_PPP
        psi_vis = geometry.p_vis(law.ctx, law.phi)
        vals = -np.expm1(-n * _psi(law, rc)) / -np.expm1(-n * psi_vis)
    out = np.where(arr < lo, 0.0, np.where(inside, np.clip(vals, 0.0, 1.0), 1.0))
    return geometry._match(out, r)


def pdf(law: DistanceLaw, r):
    """Density (1/km) of the law at ``r``.

    Valid strictly inside the support.  Exactly at a support endpoint the
    kernel ``1/sqrt(v1 - (v2 - r^2)^2)`` is singular and a positive
    infinity sentinel is returned; integrate through the arc-fraction
    substitution instead of quadrature on ``r``.  Outside the support the
    density is 0.
    """
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("r must be finite")
    lo, hi = law.support
    inside = (arr > lo) & (arr < hi)
    at_edge = (arr == lo) | (arr == hi)
    rc = np.clip(arr, lo, hi)
    sqrt_v1 = law.ctx.sqrt_v1(law.phi)
    kernel_sq = np.maximum(sqrt_v1**2 - (law.ctx.v2 - rc**2) ** 2, 0.0)
    n = law.n_sats
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = 2.0 * rc / (math.pi * np.sqrt(kernel_sq))
        if law.kind is DistanceKind.NEAREST_BPP:
            vals = n * (1.0 - _psi(law, rc)) ** (n - 1) * kernel
        elif law.kind is DistanceKind.SERVING_BPP:
            denom = 1.0 - (1.0 - geometry.p_vis(law.ctx, law.phi)) ** n
            vals = n * (1.0 - _psi(law, rc)) ** (n - 1) * kernel / denom
        elif law.kind is DistanceKind.INTERFERER_GIVEN_R0:
            psi0, psi_vis = _psi_span(law)
            vals = kernel / (psi_vis - psi0)
        elif law.kind is DistanceKind.NEAREST_PPP:
            vals = n * np.exp(-n * _psi(law, rc)) * kernel
        else:  # SERVING_PPP
            psi_vis = geometry.p_vis(law.ctx, law.phi)
            vals = n * np.exp(-n * _psi(law, rc)) * kernel / -np.expm1(-n * psi_vis)
    vals = np.where(np.isnan(vals), np.inf, vals)
    out = np.where(inside, vals, np.where(at_edge, np.inf, 0.0))
    return geometry._match(out, r)


def quantile(law: DistanceLaw, u):
    """Closed-form inverse CDF: distance at probability level ``u``.

    Inverts through the arc fraction, ``r = sqrt(v2 - sqrt(v1)
    cos(pi * fraction))``.  For ``NEAREST_PPP`` the mass ``exp(-N)`` the
    approximation leaves beyond the circle is lumped at the upper support
    end, matching its piecewise CDF.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError("u must lie in [0, 1]")
    n = law.n_sats
    lo, hi = law.support
    if law.kind is DistanceKind.NEAREST_BPP:
        frac = 1.0 - (1.0 - arr) ** (1.0 / n)
    elif law.kind is DistanceKind.SERVING_BPP:
        top = 1.0 - (1.0 - geometry.p_vis(law.ctx, law.phi)) ** n
        frac = 1.0 - (1.0 - arr * top) ** (1.0 / n)
    elif law.kind is DistanceKind.INTERFERER_GIVEN_R0:
        psi0, psi_vis = _psi_span(law)
        frac = psi0 + arr * (psi_vis - psi0)
    elif law.kind is DistanceKind.NEAREST_PPP:
        with np.errstate(divide="ignore"):
            frac = np.minimum(-np.log1p(-arr) / n, 1.0)
    else:  # SERVING_PPP
        top = -np.expm1(-n * geometry.p_vis(law.ctx, law.phi))
        frac = -np.log1p(-arr * top) / n
    r = geometry.radius_at_arc_fraction(law.ctx, frac, law.phi)
    out = np.clip(np.asarray(r), lo, hi)
    return geometry._match(out, u)


def sample(law: DistanceLaw, rng: np.random.Generator, size=None):
    """Inverse-CDF sampling.  Deterministic for a fixed generator state."""
    return quantile(law, rng.random(size))
