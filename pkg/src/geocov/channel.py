"""Link budget and fading for the satellite downlink.

Path loss follows the free-space form with a tunable exponent,
``(c / (4 pi f_c))^2 * r**(-alpha)``.  Distances enter in kilometers;
with the S-band defaults below this calibration puts the serving link
around +27 dB SNR, the interference-limited regime the rest of the
analysis operates in.  Fading is Nakagami-m on the power gain, i.e. a
unit-mean gamma variable with integer shape m.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from geocov.units import db_to_linear, dbm_to_watts

__all__ = [
    "SPEED_OF_LIGHT",
    "NetworkConfig",
    "FadingLaw",
    "default_network_config",
    "path_loss",
    "u_coefficient",
    "nakagami_cdf",
    "nakagami_cdf_approx",
    "alzer_nu",
    "sample_fading",
    "sinr",
    "pt_from_eirp_density",
    "rician_k_to_m",
    "config_digest",
]

SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class NetworkConfig:
    """Constellation size plus the full link budget, all linear units.

    ``g_serving`` is the combined serving-link gain (satellite transmit
    times terminal receive); every interferer shares the single sidelobe
    gain ``g_interferer <= g_serving``.  ``m`` is the Nakagami shape and
    must be a positive integer (the fading CDF is a finite sum over m
    terms).
    """

    n_sats: int
    p_t: float            # transmit power, W
    f_c: float            # carrier frequency, Hz
    alpha: float          # path-loss exponent, >= 2
    g_serving: float      # serving-link gain, linear
    g_interferer: float   # common interferer gain, linear
    bandwidth: float      # Hz
    noise_density: float  # W/Hz
    m: int                # Nakagami shape

    def __post_init__(self):
        if not isinstance(self.n_sats, (int, np.integer)) or self.n_sats < 1:
            raise ValueError("n_sats must be an integer >= 1")
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError("m must be a positive integer")
        for name in ("p_t", "f_c", "bandwidth", "noise_density",
                     "g_serving", "g_interferer"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha < 2.0:
            raise ValueError("alpha must be >= 2")
        if self.g_serving < self.g_interferer:
            raise ValueError("g_serving must be >= g_interferer")

    @property
    def noise_power(self) -> float:
        return self.noise_density * self.bandwidth


@dataclass(frozen=True)
class FadingLaw:
    """Nakagami-m power-gain law; gamma(shape=m, rate=m), unit mean."""

    m: int
    mean_power: float = 1.0

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.mean_power != 1.0:
            raise ValueError("mean_power is fixed at 1")


def default_network_config(n_sats: int, alpha: float = 3.0,
                           gain_ratio_db: float = 20.0, m: int = 1,
                           eirp_density_dbw_mhz: float = 59.0,
                           g_t0_dbi: float = 51.0, g_r_dbi: float = 0.0,
                           f_c: float = 2.0e9, bandwidth: float = 30.0e6,
                           noise_density_dbm_hz: float = -174.0) -> NetworkConfig:
    """S-band handheld-terminal downlink defaults.

    Transmit power is derived from the EIRP density, and the interferer
    gain from the serving/interferer gain ratio in dB.
    """
    p_t = pt_from_eirp_density(eirp_density_dbw_mhz, g_t0_dbi, bandwidth)
    g_serving = float(db_to_linear(g_t0_dbi + g_r_dbi))
    g_interferer = g_serving / float(db_to_linear(gain_ratio_db))
    return NetworkConfig(
        n_sats=n_sats, p_t=p_t, f_c=f_c, alpha=alpha,
        g_serving=g_serving, g_interferer=g_interferer,
        bandwidth=bandwidth,
        noise_density=float(dbm_to_watts(noise_density_dbm_hz)),
        m=m,
    )


def path_loss(cfg: NetworkConfig, r):
    """Linear attenuation ``(c / (4 pi f_c))^2 * r**(-alpha)``, r in km."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("distance must be positive and finite")
    amp = (SPEED_OF_LIGHT / (4.0 * math.pi * cfg.f_c)) ** 2
    out = amp * arr ** (-cfg.alpha)
    return float(out) if np.ndim(r) == 0 else out


def u_coefficient(cfg: NetworkConfig, gain: float) -> float:
    """16 pi^2 f_c^2 / (P_t G c^2); satisfies P_t G l(r) = 1 / (u r^alpha)."""
    return 16.0 * math.pi**2 * cfg.f_c**2 / (cfg.p_t * gain * SPEED_OF_LIGHT**2)


def nakagami_cdf(law: FadingLaw, x):
    """Exact power-gain CDF: 1 - exp(-m x) * sum_{k<m} (m x)^k / k!."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("x must be nonnegative and finite")
    mx = law.m * arr
    total = np.zeros_like(arr)
    term = np.ones_like(arr)
    for k in range(law.m):
        if k > 0:
            term = term * mx / k
        total = total + term
    out = 1.0 - np.exp(-mx) * total
    return float(out) if np.ndim(x) == 0 else out


def alzer_nu(m: int) -> float:
    """Exponential-sum CDF rate: nu = m * (m!)**(-1/m); 1 when m = 1."""
    return m * math.factorial(m) ** (-1.0 / m)


def nakagami_cdf_approx(law: FadingLaw, x):
    """Exponential-sum approximation of the power-gain CDF.

    ``1 - sum_{i=1..m} C(m,i) (-1)^(i+1) exp(-nu i x)`` with ``nu``
    from :func:`alzer_nu`.  Exact for m = 1; a tight upper-tail match for
    small integer m.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("x must be nonnegative and finite")
    nu = alzer_nu(law.m)
    acc = np.zeros_like(arr)
    for i in range(1, law.m + 1):
        acc = acc + math.comb(law.m, i) * (-1.0) ** (i + 1) * np.exp(-nu * i * arr)
    out = 1.0 - acc
    return float(out) if np.ndim(x) == 0 else out


def sample_fading(law: FadingLaw, rng: np.random.Generator, size=None):
    """Unit-mean gamma(m, 1/m) power-gain draws."""
    return rng.gamma(shape=law.m, scale=1.0 / law.m, size=size)


def sinr(cfg: NetworkConfig, serving, interferers=()):
    """Received SINR per the three visibility cases.

    ``serving`` is a ``(gain, distance_km)`` pair or None when no
    satellite is visible (SINR 0).  ``interferers`` is a sequence of
    ``(gain, distance_km)`` pairs; with none the ratio is the plain SNR.
    """
    if serving is None:
        return 0.0
    h0, r0 = serving
    signal = cfg.p_t * cfg.g_serving * h0 * path_loss(cfg, r0)
    interference = 0.0
    for h, r in interferers:
        interference += cfg.p_t * cfg.g_interferer * h * path_loss(cfg, r)
    return signal / (interference + cfg.noise_power)


def pt_from_eirp_density(eirp_density_dbw_mhz: float, g_t0_dbi: float,
                         bandwidth_hz: float) -> float:
    """Transmit power (W) from an EIRP density in dBW/MHz.

    EIRP density is P_t * G_t0 / W, so in dB:
    P_t[dBW] = density + 10 log10(W[MHz]) - G_t0[dBi].
    """
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    p_t_dbw = eirp_density_dbw_mhz + 10.0 * math.log10(bandwidth_hz / 1e6) - g_t0_dbi
    return float(db_to_linear(p_t_dbw))


def rician_k_to_m(k_factor: float) -> int:
    """Nearest integer Nakagami shape for a Rician K factor.

    The exact mapping m = (K+1)^2 / (2K+1) is rarely an integer; the
    finite-sum fading CDF needs one, so the value is rounded with a
    warning when the adjustment is material.
    """
    if k_factor < 0:
        raise ValueError("K factor must be nonnegative")
    exact = (k_factor + 1.0) ** 2 / (2.0 * k_factor + 1.0)
    m = max(1, round(exact))
    if abs(m - exact) > 1e-9:
        warnings.warn(
            f"Nakagami shape {exact:.4f} rounded to integer {m}",
            stacklevel=2,
        )
    return m


def config_digest(cfg: NetworkConfig) -> str:
    """Short stable digest of a config, for tagging results."""
    import hashlib

    text = ",".join(f"{k}={getattr(cfg, k)!r}" for k in sorted(cfg.__dataclass_fields__))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
