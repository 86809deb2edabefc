"""Analytical coverage engine: arc-measure quadrature, interference
Laplace transforms, and coverage probabilities.

Every integral over a distance law here contains the kernel
``(2 r / pi) / sqrt(v1 - (v2 - r^2)^2)``, which blows up like an inverse
square root at both ends of the support.  Substituting ``u = pi *
psi(r, phi)``, i.e. ``r(u) = sqrt(v2 - sqrt(v1) cos(u))``, turns that
kernel into exactly ``du / pi`` and leaves a smooth integrand, so all
quadrature happens on ``u`` with adaptive Gauss panels.  Naive quadrature
on ``r`` stalls on the singularities and is never used.

Computations are pure and reentrant; sweeps over thresholds or latitudes
can run in parallel with results independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from geocov import geometry
from geocov.channel import NetworkConfig, alzer_nu, config_digest, u_coefficient
from geocov.geometry import GeometryContext

__all__ = [
    "QuadratureSpec",
    "QuadratureConvergenceError",
    "CoverageMethod",
    "CoverageResult",
    "arc_integral",
    "omega1",
    "laplace_interference_bpp",
    "laplace_interference_ppp",
    "coverage_bpp",
    "coverage_rayleigh",
    "coverage_ppp",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-quadrature budget.

    ``nodes_per_panel`` must be odd; the embedded error estimate compares
    each panel against a half-order rule.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    nodes_per_panel: int = 15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.nodes_per_panel < 3 or self.nodes_per_panel % 2 == 0:
            raise ValueError("nodes_per_panel must be odd and >= 3")

    def tightened(self, factor: float = 10.0) -> "QuadratureSpec":
        """Spec for inner (nested) integrals, keeping the outer estimate honest."""
        return replace(self, rel_tol=self.rel_tol / factor,
                       abs_tol=self.abs_tol / factor)


class QuadratureConvergenceError(RuntimeError):
    """Tolerance not met within the subdivision budget.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, value: float, error_estimate: float):
        super().__init__(
            f"quadrature did not converge: value={value!r}, "
            f"error estimate={error_estimate!r}"
        )
        self.value = value
        self.error_estimate = error_estimate


class CoverageMethod(Enum):
    BPP_ANALYTIC = "bpp-analytic"
    PPP_ANALYTIC = "ppp-analytic"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class CoverageResult:
    threshold_db: float
    probability: float
    method: CoverageMethod
    quadrature_error_estimate: float
    config_snapshot: str
    no_visible_arc: bool = False

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if self.quadrature_error_estimate < 0.0:
            raise ValueError("error estimate must be nonnegative")


@lru_cache(maxsize=None)
def _gauss_rule(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def _panel(f, a, b, spec: QuadratureSpec):
    """Integrate one panel with an embedded half-order error estimate."""
    n_fine = spec.nodes_per_panel
    n_coarse = max(1, (n_fine - 1) // 2)
    xf, wf = _gauss_rule(n_fine)
    xc, wc = _gauss_rule(n_coarse)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    ys = f(np.concatenate([mid + half * xf, mid + half * xc]))
    fine = half * float(np.dot(wf, ys[:n_fine]))
    coarse = half * float(np.dot(wc, ys[n_fine:]))
    return fine, abs(fine - coarse)


def adaptive_integral(f, a: float, b: float, spec: QuadratureSpec,
                      initial_panels: int = 8):
    """Adaptive Gauss quadrature of a vectorized ``f`` on [a, b].

    Returns ``(value, error_estimate)``; raises
    :class:`QuadratureConvergenceError` when the budget runs out.
    """
    if b <= a:
        return 0.0, 0.0
    edges = np.linspace(a, b, initial_panels + 1)
    panels = [(edges[i], edges[i + 1], *_panel(f, edges[i], edges[i + 1], spec))
              for i in range(initial_panels)]
    for _ in range(spec.max_subdivisions):
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if err <= max(spec.rel_tol * abs(total), spec.abs_tol):
            return total, err
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        lo, hi, _, _ = panels[worst]
        mid = 0.5 * (lo + hi)
        panels[worst] = (lo, mid, *_panel(f, lo, mid, spec))
        panels.append((mid, hi, *_panel(f, mid, hi, spec)))
    total = sum(p[2] for p in panels)
    err = sum(p[3] for p in panels)
    raise QuadratureConvergenceError(total, err)


def arc_integral(ctx: GeometryContext, phi: float, r_lo: float, r_hi: float,
                 g, quad: QuadratureSpec | None = None):
    """Integral of ``g(r) * (2 r / pi) / sqrt(v1 - (v2 - r^2)^2)`` on [r_lo, r_hi].

    The kernel equals ``d psi / dr``, so with ``u = pi * psi(r, phi)`` the
    integral becomes ``(1/pi) * int g(r(u)) du`` with a smooth integrand.
    ``g`` must accept numpy arrays of distances.  Returns
    ``(value, error_estimate)``.
    """
    quad = quad or QuadratureSpec()
    lo_s, hi_s = geometry.r_min(ctx, phi), geometry.r_max(ctx, phi)
    tol = geometry.SUPPORT_RTOL * hi_s
    if r_lo < lo_s - tol or r_hi > hi_s + tol or r_lo > r_hi + tol:
        raise ValueError("integration bounds outside the orbit support")
    u_lo = math.pi * geometry.psi(ctx, r_lo, phi)
    u_hi = math.pi * geometry.psi(ctx, r_hi, phi)
    if u_hi <= u_lo:
        return 0.0, 0.0
    sqrt_v1, v2 = ctx.sqrt_v1(phi), ctx.v2

    def integrand(u):
        r = np.sqrt(v2 - sqrt_v1 * np.cos(u))
        return np.asarray(g(r), dtype=float) / math.pi

    return adaptive_integral(integrand, u_lo, u_hi, quad)


def omega1(ctx: GeometryContext, r, phi):
    """Antiderivative of ``r / sqrt(v1 - (v2 - r^2)^2)``.

    ``-(1/2) atan((v2 - r^2) / sqrt(v1 - (v2 - r^2)^2))``, evaluated with
    atan2 so the support endpoints (where the sqrt vanishes) map to
    -pi/4 and +pi/4 instead of dividing by zero.
    """
    w = ctx.v2 - np.asarray(r, dtype=float) ** 2
    root = np.sqrt(np.maximum(ctx.v1(phi) - w**2, 0.0))
    out = -0.5 * np.arctan2(w, root)
    return float(out) if np.ndim(r) == 0 else out


def _fading_laplace_factor(cfg: NetworkConfig, s: float, u_gain: float):
    """g(r) = (1 + s r^-alpha / (m u))^-m, the per-interferer fading factor."""
    m, alpha = cfg.m, cfg.alpha

    def g(r):
        return (1.0 + (s / (m * u_gain)) * r ** (-alpha)) ** (-m)

    return g


def laplace_interference_bpp(cfg: NetworkConfig, ctx: GeometryContext,
                             phi: float, r0: float, s: float,
                             quad: QuadratureSpec | None = None) -> float:
    """Laplace transform of aggregate interference, binomial constellation.

    Conditioned on serving distance ``r0``, each of the other N-1
    satellites independently lands in the interference arc with
    probability ``p_int`` and then contributes the fading factor
    ``J(s, r0)``, so the transform collapses via the binomial theorem to
    ``(1 - p_int + p_int J)**(N-1)``.  Equals 1 at s = 0 and is
    non-increasing in s.
    """
    if s < 0 or not np.isfinite(s):
        raise ValueError("s must be nonnegative and finite")
    quad = quad or QuadratureSpec()
    rvm = ctx.r_vis_max
    psi0 = geometry.psi(ctx, r0, phi)
    psi_vis = geometry.psi(ctx, rvm, phi)
    span = psi_vis - psi0
    if s == 0.0 or span <= 0.0:
        return 1.0
    pint = geometry.p_int(ctx, r0, phi)
    g = _fading_laplace_factor(cfg, s, u_coefficient(cfg, cfg.g_interferer))
    raw, _ = arc_integral(ctx, phi, r0, rvm, g, quad)
    j_factor = min(raw / span, 1.0)
    return (1.0 - pint + pint * j_factor) ** (cfg.n_sats - 1)


def laplace_interference_ppp(cfg: NetworkConfig, ctx: GeometryContext,
                             phi: float, r0: float, s: float,
                             quad: QuadratureSpec | None = None) -> float:
    """Laplace transform of aggregate interference, Poisson limit.

    ``exp(-(2N/pi) (omega1(rvm) - omega1(r0) - Omega2(s, r0)))`` where
    Omega2 integrates the fading factor against ``r dr / sqrt(v1 -
    (v2 - r^2)^2)``.  No distance distribution enters; the constellation
    acts only through its density.
    """
    if s < 0 or not np.isfinite(s):
        raise ValueError("s must be nonnegative and finite")
    quad = quad or QuadratureSpec()
    rvm = ctx.r_vis_max
    if s == 0.0 or r0 >= rvm * (1.0 - geometry.SUPPORT_RTOL):
        return 1.0
    d_omega1 = omega1(ctx, rvm, phi) - omega1(ctx, r0, phi)
    g = _fading_laplace_factor(cfg, s, u_coefficient(cfg, cfg.g_interferer))
    raw, _ = arc_integral(ctx, phi, r0, rvm, g, quad)
    omega2 = 0.5 * math.pi * raw
    exponent = -(2.0 * cfg.n_sats / math.pi) * (d_omega1 - omega2)
    return math.exp(min(exponent, 0.0))


def _no_arc_result(cfg: NetworkConfig, tau: float,
                   method: CoverageMethod) -> CoverageResult:
    return CoverageResult(
        threshold_db=10.0 * math.log10(tau), probability=0.0, method=method,
        quadrature_error_estimate=0.0, config_snapshot=config_digest(cfg),
        no_visible_arc=True,
    )


def _finalize_probability(value: float, err: float) -> float:
    """Clamp tiny quadrature excursions outside [0, 1]; reject real ones."""
    slack = max(1e-9, 2.0 * err)
    if value < -slack or value > 1.0 + slack:
        raise QuadratureConvergenceError(value, err)
    return min(max(value, 0.0), 1.0)


def _serving_density_factor(ctx, phi, n_sats):
    """N (1 - psi(r))^(N-1); against the arc kernel this is the
    unnormalized serving-distance density."""

    def factor(r):
        return n_sats * (1.0 - np.asarray(geometry.psi(ctx, r, phi))) ** (n_sats - 1)

    return factor


def coverage_bpp(cfg: NetworkConfig, ctx: GeometryContext, phi: float,
                 tau: float, quad: QuadratureSpec | None = None) -> CoverageResult:
    """Coverage probability, binomial constellation.

    Averages the fading tail over the serving distance and the
    interference transform,

        sum_{i=1..m} C(m,i) (-1)^(i+1) *
            int exp(-nu i u0 N0 W tau r^alpha)
                L_{I|r0=r}(nu i u0 tau r^alpha) f_R0(r) dr

    times the probability that at least one satellite is visible.  Exact
    for m = 1, an exponential-sum fading approximation otherwise.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    quad = quad or QuadratureSpec()
    method = CoverageMethod.BPP_ANALYTIC
    pvis = geometry.p_vis(ctx, phi)
    if pvis == 0.0:
        return _no_arc_result(cfg, tau, method)
    inner = quad.tightened()
    rmin, rvm = geometry.r_min(ctx, phi), ctx.r_vis_max
    nu = alzer_nu(cfg.m)
    u0 = u_coefficient(cfg, cfg.g_serving)
    noise = cfg.noise_power
    density = _serving_density_factor(ctx, phi, cfg.n_sats)

    total, err_total = 0.0, 0.0
    for i in range(1, cfg.m + 1):
        coeff = math.comb(cfg.m, i) * (-1.0) ** (i + 1)

        def g(r_arr, _si=nu * i * u0 * tau):
            vals = np.empty_like(r_arr)
            base = density(r_arr)
            for k, r in enumerate(r_arr):
                s = _si * r ** cfg.alpha
                lap = laplace_interference_bpp(cfg, ctx, phi, float(r), s, inner)
                vals[k] = math.exp(-s * noise) * lap
            return vals * base

        value, err = arc_integral(ctx, phi, rmin, rvm, g, quad)
        total += coeff * value
        err_total += abs(coeff) * err

    prob = _finalize_probability(total, err_total)
    return CoverageResult(10.0 * math.log10(tau), prob, method, err_total,
                          config_digest(cfg))


def coverage_rayleigh(cfg: NetworkConfig, ctx: GeometryContext, phi: float,
                      tau: float, quad: QuadratureSpec | None = None) -> CoverageResult:
    """Coverage probability under Rayleigh fading (m = 1), exact.

    Kept as an independent single-term assembly of

        P_vis * int exp(-u0 N0 W tau r^alpha)
                    L_{I|r0=r}(u0 tau r^alpha) f_R0(r) dr

    rather than delegating to :func:`coverage_bpp`; the two must agree.
    """
    if cfg.m != 1:
        raise ValueError("coverage_rayleigh requires m = 1")
    if not tau > 0:
        raise ValueError("tau must be positive")
    quad = quad or QuadratureSpec()
    method = CoverageMethod.BPP_ANALYTIC
    pvis = geometry.p_vis(ctx, phi)
    if pvis == 0.0:
        return _no_arc_result(cfg, tau, method)
    inner = quad.tightened()
    rmin, rvm = geometry.r_min(ctx, phi), ctx.r_vis_max
    u0 = u_coefficient(cfg, cfg.g_serving)
    noise = cfg.noise_power
    p_visible = 1.0 - (1.0 - pvis) ** cfg.n_sats
    n = cfg.n_sats

    def g(r_arr):
        vals = np.empty_like(r_arr)
        psi_vals = np.asarray(geometry.psi(ctx, r_arr, phi))
        serving_pdf = n * (1.0 - psi_vals) ** (n - 1) / p_visible
        for k, r in enumerate(r_arr):
            s = u0 * tau * r ** cfg.alpha
            lap = laplace_interference_bpp(cfg, ctx, phi, float(r), s, inner)
            vals[k] = math.exp(-s * noise) * lap
        return vals * serving_pdf

    value, err = arc_integral(ctx, phi, rmin, rvm, g, quad)
    prob = _finalize_probability(p_visible * value, err)
    return CoverageResult(10.0 * math.log10(tau), prob, method, err,
                          config_digest(cfg))


def coverage_ppp(cfg: NetworkConfig, ctx: GeometryContext, phi: float,
                 tau: float, quad: QuadratureSpec | None = None) -> CoverageResult:
    """Coverage probability, Poisson-limit constellation.

        (2N/pi) / (1 - exp(-N psi(rvm)))
            * sum_i C(m,i) (-1)^(i+1) Xi_i(tau)

    with ``Xi_i`` integrating ``r exp(-Theta_i) / sqrt(v1 - (v2-r^2)^2)``
    over the serving support; ``Theta_i`` collects the void exponent
    ``N psi(r)``, the noise exponent, and the interference exponent with
    the serving distance as conditioning point.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    quad = quad or QuadratureSpec()
    method = CoverageMethod.PPP_ANALYTIC
    pvis = geometry.p_vis(ctx, phi)
    if pvis == 0.0:
        return _no_arc_result(cfg, tau, method)
    inner = quad.tightened()
    rmin, rvm = geometry.r_min(ctx, phi), ctx.r_vis_max
    n = cfg.n_sats
    nu = alzer_nu(cfg.m)
    u0 = u_coefficient(cfg, cfg.g_serving)
    u_bar = u_coefficient(cfg, cfg.g_interferer)
    noise = cfg.noise_power
    omega1_vis = omega1(ctx, rvm, phi)

    total, err_total = 0.0, 0.0
    for i in range(1, cfg.m + 1):
        coeff = math.comb(cfg.m, i) * (-1.0) ** (i + 1)

        def g(r_arr, _si=nu * i * u0 * tau):
            vals = np.empty_like(r_arr)
            psi_vals = np.asarray(geometry.psi(ctx, r_arr, phi))
            for k, r in enumerate(r_arr):
                s = _si * r ** cfg.alpha
                d_omega1 = omega1_vis - omega1(ctx, float(r), phi)
                if s > 0.0 and r < rvm * (1.0 - geometry.SUPPORT_RTOL):
                    fading = _fading_laplace_factor(cfg, s, u_bar)
                    raw, _ = arc_integral(ctx, phi, float(r), rvm, fading, inner)
                    omega2 = 0.5 * math.pi * raw
                else:
                    omega2 = d_omega1
                theta = (n * psi_vals[k] + s * noise
                         + (2.0 * n / math.pi) * max(d_omega1 - omega2, 0.0))
                vals[k] = math.exp(-theta)
            return vals

        # Xi_i has kernel r/sqrt(...) = (pi/2) * arc kernel
        raw, err = arc_integral(ctx, phi, rmin, rvm, g, quad)
        total += coeff * 0.5 * math.pi * raw
        err_total += abs(coeff) * 0.5 * math.pi * err

    norm = (2.0 * n / math.pi) / -math.expm1(-n * pvis)
    prob = _finalize_probability(norm * total, norm * err_total)
    return CoverageResult(10.0 * math.log10(tau), prob, method,
                          norm * err_total, config_digest(cfg))
