"""Ground-truth link simulator for the binomial constellation.

Trials draw azimuths uniformly on the geostationary circle, apply the
Nakagami fading and path-loss model, classify the visibility case and
form the SINR.  Determinism is independent of the worker count: trials
are grouped into fixed-size batches and batch ``b`` of seed ``s`` always
uses the counter-based stream ``Philox(key = s * 2**64 + b)``, so the
aggregated integer counts of covered trials never depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from geocov import geometry
from geocov.analysis import CoverageMethod, CoverageResult
from geocov.channel import NetworkConfig, config_digest, path_loss
from geocov.geometry import GeometryContext, TerminalPosition

__all__ = [
    "BATCH_SIZE",
    "Constellation",
    "VisibilityCase",
    "TrialOutcome",
    "draw_constellation",
    "run_trial",
    "estimate",
    "estimate_curve",
    "sinr_samples",
]

# trials per deterministic substream; fixed so results never depend on
# how batches are scheduled across workers
BATCH_SIZE = 8192

_WILSON_Z = 1.959963984540054  # two-sided 95%


class VisibilityCase(Enum):
    NO_VISIBLE = 0
    ONE_VISIBLE = 1
    MANY_VISIBLE = 2


@dataclass(frozen=True)
class Constellation:
    """Azimuthal satellite angles (rad, in [0, 2 pi)) on one orbit circle."""

    azimuths: np.ndarray
    orbit_radius: float

    def __post_init__(self):
        az = np.asarray(self.azimuths, dtype=float)
        if az.ndim != 1 or az.size < 1:
            raise ValueError("azimuths must be a nonempty 1-D array")
        if np.any(az < 0.0) or np.any(az >= 2.0 * math.pi):
            raise ValueError("azimuths must lie in [0, 2 pi)")
        object.__setattr__(self, "azimuths", az)

    def positions(self) -> np.ndarray:
        """(N, 3) Cartesian satellite positions, km."""
        return np.column_stack([
            self.orbit_radius * np.cos(self.azimuths),
            self.orbit_radius * np.sin(self.azimuths),
            np.zeros_like(self.azimuths),
        ])


@dataclass(frozen=True)
class TrialOutcome:
    case: VisibilityCase
    serving_distance: float | None
    interferer_distances: np.ndarray
    sinr: float
    covered: bool


def draw_constellation(n_sats: int, rng: np.random.Generator,
                       orbit_radius: float = 6378.0 + 35786.0) -> Constellation:
    """N i.i.d. uniform azimuths on the circle."""
    if n_sats < 1:
        raise ValueError("n_sats must be >= 1")
    return Constellation(rng.uniform(0.0, 2.0 * math.pi, n_sats), orbit_radius)


def _batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) + batch_index))


def _distances_km(ctx: GeometryContext, terminal: TerminalPosition, azimuths):
    """Slant distances terminal -> satellites for azimuth array(s)."""
    delta = azimuths - terminal.longitude
    d_sq = ctx.v2 - ctx.sqrt_v1(terminal.latitude) * np.cos(delta)
    return np.sqrt(d_sq)


def run_trial(cfg: NetworkConfig, ctx: GeometryContext,
              terminal: TerminalPosition, tau: float,
              rng: np.random.Generator) -> TrialOutcome:
    """One constellation + fading draw through the full link model.

    Visibility is the distance test ``d <= r_vis_max`` (equivalent to a
    nonnegative elevation angle); the serving satellite is the nearest
    visible one, ties broken by lowest index.
    """
    constellation = draw_constellation(cfg.n_sats, rng, ctx.orbit_radius)
    d = _distances_km(ctx, terminal, constellation.azimuths)
    gains = rng.gamma(shape=cfg.m, scale=1.0 / cfg.m, size=cfg.n_sats)
    visible = d <= ctx.r_vis_max
    n_vis = int(np.count_nonzero(visible))
    if n_vis == 0:
        return TrialOutcome(VisibilityCase.NO_VISIBLE, None,
                            np.empty(0), 0.0, False)
    serving = int(np.argmin(np.where(visible, d, np.inf)))
    interferer_mask = visible.copy()
    interferer_mask[serving] = False
    signal = cfg.p_t * cfg.g_serving * gains[serving] * path_loss(cfg, d[serving])
    interference = float(np.sum(
        cfg.p_t * cfg.g_interferer * gains[interferer_mask]
        * path_loss(cfg, d[interferer_mask])
    )) if n_vis > 1 else 0.0
    value = signal / (interference + cfg.noise_power)
    case = VisibilityCase.ONE_VISIBLE if n_vis == 1 else VisibilityCase.MANY_VISIBLE
    return TrialOutcome(case, float(d[serving]), d[interferer_mask],
                        value, value >= tau)


def _batch_sinr(cfg: NetworkConfig, ctx: GeometryContext,
                terminal: TerminalPosition, n_trials: int,
                rng: np.random.Generator) -> np.ndarray:
    """Vectorized SINR samples for one batch (0 where nothing is visible)."""
    az = rng.uniform(0.0, 2.0 * math.pi, (n_trials, cfg.n_sats))
    gains = rng.gamma(shape=cfg.m, scale=1.0 / cfg.m, size=(n_trials, cfg.n_sats))
    d = _distances_km(ctx, terminal, az)
    visible = d <= ctx.r_vis_max
    rx = cfg.p_t * gains * path_loss(cfg, d) * visible
    serving = np.argmin(np.where(visible, d, np.inf), axis=1)
    rows = np.arange(n_trials)
    signal = cfg.g_serving * rx[rows, serving]
    interference = cfg.g_interferer * (rx.sum(axis=1) - rx[rows, serving])
    any_visible = visible.any(axis=1)
    with np.errstate(invalid="ignore"):
        out = np.where(any_visible,
                       signal / (interference + cfg.noise_power), 0.0)
    return out


def sinr_samples(cfg: NetworkConfig, ctx: GeometryContext,
                 terminal: TerminalPosition, n_trials: int, seed: int,
                 n_workers: int = 1) -> np.ndarray:
    """Deterministic SINR samples; identical for any worker count."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    counts = [min(BATCH_SIZE, n_trials - k)
              for k in range(0, n_trials, BATCH_SIZE)]

    def one(batch_index_count):
        b, cnt = batch_index_count
        return _batch_sinr(cfg, ctx, terminal, cnt, _batch_rng(seed, b))

    jobs = list(enumerate(counts))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(one, jobs))
    else:
        parts = [one(j) for j in jobs]
    return np.concatenate(parts)


def _wilson_half_width(successes: int, n: int, z: float = _WILSON_Z) -> float:
    p_hat = successes / n
    denom = 1.0 + z * z / n
    return z * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)) / denom


def estimate(cfg: NetworkConfig, ctx: GeometryContext,
             terminal: TerminalPosition, tau: float, n_trials: int,
             seed: int, n_workers: int = 1):
    """Coverage estimate at one threshold.

    Returns ``(CoverageResult, wilson_95_half_width)``.  The probability
    is an exact integer count divided by ``n_trials``, so reruns with the
    same seed are bit-identical regardless of ``n_workers``.
    """
    values = sinr_samples(cfg, ctx, terminal, n_trials, seed, n_workers)
    covered = int(np.count_nonzero(values >= tau))
    result = CoverageResult(
        threshold_db=10.0 * math.log10(tau),
        probability=covered / n_trials,
        method=CoverageMethod.MONTE_CARLO,
        quadrature_error_estimate=0.0,
        config_snapshot=config_digest(cfg),
    )
    return result, _wilson_half_width(covered, n_trials)


def estimate_curve(cfg: NetworkConfig, ctx: GeometryContext,
                   terminal: TerminalPosition, taus, n_trials: int,
                   seed: int, n_workers: int = 1):
    """Coverage estimates for a whole threshold grid from shared trials."""
    values = sinr_samples(cfg, ctx, terminal, n_trials, seed, n_workers)
    out = []
    digest = config_digest(cfg)
    for tau in np.asarray(taus, dtype=float):
        covered = int(np.count_nonzero(values >= tau))
        result = CoverageResult(
            threshold_db=10.0 * math.log10(tau),
            probability=covered / n_trials,
            method=CoverageMethod.MONTE_CARLO,
            quadrature_error_estimate=0.0,
            config_snapshot=digest,
        )
        out.append((result, _wilson_half_width(covered, n_trials)))
    return out
