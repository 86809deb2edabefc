"""Geometry of the geostationary circle as seen from a ground terminal.

A terminal at latitude ``phi`` sees only the part of the geostationary
circle above its local horizon (the visible arc).  This module provides
the visible-arc length, the probability that a uniformly placed satellite
lands in the visible arc, the nearest/farthest orbit distances, and the
arc-fraction function ``psi(r, phi)`` giving the fraction of the circle
within slant distance ``r`` of the terminal.

Conventions: angles in radians, lengths in kilometers.  Every function is
a pure function of immutable inputs and safe to call concurrently.
Functions accept scalars or numpy arrays for ``phi`` and ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryContext",
    "TerminalPosition",
    "visible_arc_length",
    "invisibility_latitude",
    "p_vis",
    "case_probabilities",
    "r_min",
    "r_max",
    "r_vis_max",
    "psi",
    "p_int",
    "radius_at_arc_fraction",
]

# relative slack for distance support-membership checks; slant distances
# typically arrive from trigonometric pipelines with rounding
SUPPORT_RTOL = 1e-9


@dataclass(frozen=True)
class GeometryContext:
    """Spherical Earth plus circular equatorial orbit constants.

    Derived quantities are computed once: ``orbit_radius = r_earth +
    altitude``, the latitude ``phi_inv`` beyond which the orbit is below
    the horizon, the latitude-independent maximum visible-satellite
    distance ``r_vis_max`` and ``v2 = orbit_radius**2 + r_earth**2``.
    The companion constant ``v1 = 4 * orbit_radius**2 * r_earth**2 *
    cos(phi)**2`` depends on latitude and is exposed as :meth:`v1`.
    """

    r_earth: float = 6378.0
    altitude: float = 35786.0
    orbit_radius: float = field(init=False)
    phi_inv: float = field(init=False)
    r_vis_max: float = field(init=False)
    v2: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.r_earth) and self.r_earth > 0):
            raise ValueError("r_earth must be positive and finite")
        if not (math.isfinite(self.altitude) and self.altitude > 0):
            raise ValueError("altitude must be positive and finite")
        radius = self.r_earth + self.altitude
        object.__setattr__(self, "orbit_radius", radius)
        object.__setattr__(self, "phi_inv", math.acos(self.r_earth / radius))
        object.__setattr__(
            self, "r_vis_max",
            math.sqrt(self.altitude**2 + 2.0 * self.altitude * self.r_earth),
        )
        object.__setattr__(self, "v2", radius**2 + self.r_earth**2)

    def sqrt_v1(self, phi):
        """2 (rE+a) rE cos(phi) in km^2, the exact square root of v1."""
        return 2.0 * self.orbit_radius * self.r_earth * np.cos(phi)

    def v1(self, phi):
        """4 (rE+a)^2 rE^2 cos(phi)^2 in km^4."""
        return self.sqrt_v1(phi) ** 2


@dataclass(frozen=True)
class TerminalPosition:
    """Terminal latitude/longitude and its 3D Cartesian embedding (km)."""

    latitude: float
    longitude: float
    cartesian: np.ndarray

    @classmethod
    def from_geodetic(cls, ctx: GeometryContext, latitude: float,
                      longitude: float) -> "TerminalPosition":
        lat = _validate_phi(latitude)
        if not np.isfinite(longitude):
            raise ValueError("longitude must be finite")
        lon = float(longitude) % (2.0 * math.pi)
        cart = ctx.r_earth * np.array([
            math.cos(lat) * math.cos(lon),
            math.cos(lat) * math.sin(lon),
            math.sin(lat),
        ])
        return cls(float(lat), lon, cart)


def _validate_phi(phi):
    arr = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("latitude must be finite")
    if np.any(np.abs(arr) > math.pi / 2 + 1e-12):
        raise ValueError("latitude must lie in [-pi/2, pi/2]")
    if arr.ndim == 0:
        return float(arr)
    return arr


def _match(value, template):
    """Return a python float when the input was scalar."""
    if np.ndim(template) == 0:
        return float(value)
    return value


def _half_visible_angle(ctx: GeometryContext, phi):
    """Half central angle of the visible arc, 0 where the orbit is hidden.

    Latitudes with ``|phi| >= phi_inv`` (including equality) count as
    invisible: the arc has measure zero there.
    """
    arr = np.asarray(phi, dtype=float)
    visible = np.abs(arr) < ctx.phi_inv
    ratio = ctx.r_earth / ctx.orbit_radius
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = 1.0 - (ratio / np.cos(arr)) ** 2
    arg = np.where(visible, arg, 0.0)
    # floating-point noise right at the visibility boundary
    arg = np.clip(arg, 0.0, 1.0)
    return np.where(visible, np.arcsin(np.sqrt(arg)), 0.0)


def visible_arc_length(ctx: GeometryContext, phi):
    """Length (km) of the orbit arc above the horizon at latitude ``phi``.

    ``2 (rE+a) asin(sqrt(1 - sec(phi)^2 / (1+a/rE)^2))`` for
    ``|phi| < phi_inv`` and exactly 0 otherwise.  Symmetric in the sign of
    ``phi`` and strictly decreasing in ``|phi|`` on the visible range.
    """
    phi = _validate_phi(phi)
    return _match(2.0 * ctx.orbit_radius * _half_visible_angle(ctx, phi), phi)


def invisibility_latitude(ctx: GeometryContext) -> float:
    """Latitude (rad) where the visible arc vanishes: acos(rE / (rE+a))."""
    return ctx.phi_inv


def p_vis(ctx: GeometryContext, phi):
    """Probability that a uniformly placed satellite is visible.

    Equals ``visible_arc_length / (2 pi orbit_radius)``; lies in [0, 1/2].
    """
    phi = _validate_phi(phi)
    return _match(_half_visible_angle(ctx, phi) / math.pi, phi)


def case_probabilities(ctx: GeometryContext, phi, n_sats: int):
    """Probabilities of seeing zero, one, or more than one satellite.

    The visible count is Bin(n_sats, p_vis), so the three cases have
    probabilities ``(1-p)^N``, ``N p (1-p)^(N-1)`` and the remainder.
    """
    if not isinstance(n_sats, (int, np.integer)) or n_sats < 1:
        raise ValueError("n_sats must be an integer >= 1")
    phi = _validate_phi(phi)
    p = np.asarray(p_vis(ctx, phi))
    p_none = (1.0 - p) ** n_sats
    p_one = n_sats * p * (1.0 - p) ** (n_sats - 1)
    p_many = np.clip(1.0 - p_none - p_one, 0.0, 1.0)
    return _match(p_none, phi), _match(p_one, phi), _match(p_many, phi)


def r_min(ctx: GeometryContext, phi):
    """Distance (km) from the terminal to the nearest point of the orbit."""
    phi = _validate_phi(phi)
    a = np.asarray(phi, dtype=float)
    d = np.hypot(ctx.orbit_radius - ctx.r_earth * np.cos(a),
                 ctx.r_earth * np.sin(a))
    return _match(d, phi)


def r_max(ctx: GeometryContext, phi):
    """Distance (km) from the terminal to the farthest point of the orbit."""
    phi = _validate_phi(phi)
    a = np.asarray(phi, dtype=float)
    d = np.hypot(ctx.orbit_radius + ctx.r_earth * np.cos(a),
                 ctx.r_earth * np.sin(a))
    return _match(d, phi)


def r_vis_max(ctx: GeometryContext) -> float:
    """Largest possible distance (km) to a visible satellite.

    ``sqrt(a^2 + 2 a rE)``, independent of latitude: the visible-arc
    endpoints lie on the intersection of the horizon plane with the orbit
    sphere.
    """
    return ctx.r_vis_max


def _check_support(r, lo, hi, what="r"):
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite")
    scale = max(abs(lo), abs(hi), 1.0)
    tol = SUPPORT_RTOL * scale
    if np.any(arr < lo - tol) or np.any(arr > hi + tol):
        raise ValueError(f"{what} outside [{lo:.6f}, {hi:.6f}] km")
    return arr


def psi(ctx: GeometryContext, r, phi):
    """Fraction of the geostationary circle within distance ``r``.

    ``acos((v2 - r^2) / sqrt(v1)) / pi`` by the law of cosines, monotone
    increasing from 0 at ``r_min(phi)`` to 1 at ``r_max(phi)``.  ``r``
    values that pass the support check (relative slack ``SUPPORT_RTOL``)
    have their acos argument clamped to [-1, 1]; anything farther out is
    rejected.
    """
    phi = _validate_phi(phi)
    if np.ndim(phi) != 0:
        raise ValueError("psi expects a scalar latitude")
    lo, hi = r_min(ctx, phi), r_max(ctx, phi)
    arr = _check_support(r, lo, hi)
    arg = (ctx.v2 - arr**2) / ctx.sqrt_v1(phi)
    frac = np.arccos(np.clip(arg, -1.0, 1.0)) / math.pi
    return _match(frac, r)


def radius_at_arc_fraction(ctx: GeometryContext, fraction, phi):
    """Inverse of :func:`psi`: the distance whose arc fraction is given.

    ``r = sqrt(v2 - sqrt(v1) cos(pi * fraction))`` for fraction in [0, 1].
    """
    phi = _validate_phi(phi)
    frac = np.asarray(fraction, dtype=float)
    if not np.all(np.isfinite(frac)) or np.any(frac < -1e-12) or np.any(frac > 1 + 1e-12):
        raise ValueError("arc fraction must lie in [0, 1]")
    frac = np.clip(frac, 0.0, 1.0)
    r = np.sqrt(ctx.v2 - ctx.sqrt_v1(phi) * np.cos(math.pi * frac))
    return _match(r, fraction)


def p_int(ctx: GeometryContext, r0, phi):
    """Probability that a non-serving satellite is a potential interferer.

    Given serving distance ``r0``, a satellite interferes when it falls in
    the visible arc beyond ``r0``:
    ``(psi(r_vis_max) - psi(r0)) / (1 - psi(r0))``.
    """
    phi = _validate_phi(phi)
    arr = _check_support(r0, r_min(ctx, phi), ctx.r_vis_max, what="r0")
    psi0 = np.asarray(psi(ctx, arr, phi))
    psi_vis = psi(ctx, ctx.r_vis_max, phi)
    frac = np.clip((psi_vis - psi0) / (1.0 - psi0), 0.0, 1.0)
    return _match(frac, r0)
