import math

import numpy as np
import pytest
from scipy import stats

from geocov import geometry
from geocov.analysis import CoverageMethod, laplace_interference_bpp
from geocov.channel import u_coefficient
from geocov.distances import DistanceKind, DistanceLaw, cdf
from geocov.geometry import TerminalPosition, case_probabilities, p_vis
from geocov.montecarlo import (
    Constellation,
    VisibilityCase,
    draw_constellation,
    estimate,
    estimate_curve,
    run_trial,
    sinr_samples,
)
from tests import oracles
from tests.conftest import make_config


def terminal(ctx, phi_deg, lon_deg=137.0):
    return TerminalPosition.from_geodetic(
        ctx, math.radians(phi_deg), math.radians(lon_deg))


class TestDrawConstellation:
    def test_deterministic(self):
        a = draw_constellation(50, np.random.default_rng(3))
        b = draw_constellation(50, np.random.default_rng(3))
        np.testing.assert_array_equal(a.azimuths, b.azimuths)

    def test_uniformity_chi_square(self, rng):
        az = draw_constellation(1, rng).azimuths
        draws = rng.uniform(0, 2 * math.pi, 1_000_000)
        observed, _ = np.histogram(draws, bins=100, range=(0, 2 * math.pi))
        _, p_value = stats.chisquare(observed)
        assert p_value > 0.01
        assert 0.0 <= az[0] < 2 * math.pi

    def test_visible_count_matches_binomial_mean(self, ctx, rng):
        n_sats, n_draws = 391, 3000
        for phi_deg in (0.0, 30.0, 60.0):
            phi = math.radians(phi_deg)
            term = terminal(ctx, phi_deg)
            total = 0
            for _ in range(n_draws):
                c = draw_constellation(n_sats, rng, ctx.orbit_radius)
                d = np.linalg.norm(c.positions() - term.cartesian, axis=1)
                total += int((d <= ctx.r_vis_max).sum())
            mean = total / n_draws
            p = p_vis(ctx, phi)
            sigma = math.sqrt(n_sats * p * (1 - p) / n_draws)
            assert abs(mean - n_sats * p) <= 3 * sigma

    def test_validation(self, rng):
        with pytest.raises(ValueError):
            draw_constellation(0, rng)
        with pytest.raises(ValueError):
            Constellation(np.array([0.1, 7.0]), 42164.0)


class TestRunTrial:
    def test_polar_terminal_never_covered(self, ctx, rng):
        cfg = make_config(1)
        term = terminal(ctx, 85.0)
        for _ in range(50):
            out = run_trial(cfg, ctx, term, 1.0, rng)
            assert out.case is VisibilityCase.NO_VISIBLE
            assert out.sinr == 0.0 and not out.covered
            assert out.serving_distance is None

    def test_sinr_zero_iff_no_visible(self, ctx, rng):
        cfg = make_config(3)
        term = terminal(ctx, 60.0)
        for _ in range(300):
            out = run_trial(cfg, ctx, term, 1.0, rng)
            assert (out.sinr == 0.0) == (out.case is VisibilityCase.NO_VISIBLE)

    def test_distances_consistent_with_case(self, ctx, rng):
        cfg = make_config(12)
        term = terminal(ctx, 30.0)
        for _ in range(200):
            out = run_trial(cfg, ctx, term, 1.0, rng)
            if out.case is VisibilityCase.NO_VISIBLE:
                assert out.interferer_distances.size == 0
            else:
                assert out.serving_distance <= ctx.r_vis_max
                assert np.all(out.interferer_distances <= ctx.r_vis_max)
                assert np.all(out.interferer_distances >= out.serving_distance)
                expected_case = (VisibilityCase.ONE_VISIBLE
                                 if out.interferer_distances.size == 0
                                 else VisibilityCase.MANY_VISIBLE)
                assert out.case is expected_case

    def test_case_frequencies_match_binomial(self, ctx, rng):
        n_trials = 100_000
        term = terminal(ctx, 30.0)
        for n_sats in (2, 10):
            cfg = make_config(n_sats)
            tallies = {case: 0 for case in VisibilityCase}
            for _ in range(n_trials):
                tallies[run_trial(cfg, ctx, term, 1.0, rng).case] += 1
            expected = case_probabilities(ctx, term.latitude, n_sats)
            for case, expect in zip(VisibilityCase, expected):
                got = tallies[case] / n_trials
                assert abs(got - expect) <= oracles.binomial_3sigma(expect, n_trials)


class TestEstimate:
    def test_huge_threshold(self, ctx):
        cfg = make_config(10)
        res, half = estimate(cfg, ctx, terminal(ctx, 37.0), 1e30, 2000, seed=1)
        assert res.probability == 0.0
        assert res.method is CoverageMethod.MONTE_CARLO
        assert half < 0.01

    def test_tiny_threshold_gives_visibility_probability(self, ctx):
        cfg = make_config(10, m=1)
        res, half = estimate(cfg, ctx, terminal(ctx, 37.0), 1e-12, 100_000, seed=2)
        expect = 1.0 - (1.0 - p_vis(ctx, math.radians(37.0))) ** 10
        assert abs(res.probability - expect) <= max(3 * half, 1e-3)

    def test_worker_count_invariance(self, ctx):
        cfg = make_config(25, m=2)
        term = terminal(ctx, 37.0)
        res1, half1 = estimate(cfg, ctx, term, 1.0, 30_000, seed=11, n_workers=1)
        res8, half8 = estimate(cfg, ctx, term, 1.0, 30_000, seed=11, n_workers=8)
        assert res1.probability == res8.probability
        assert half1 == half8

    def test_curve_consistent_with_single_estimates(self, ctx):
        cfg = make_config(25)
        term = terminal(ctx, 37.0)
        taus = [0.1, 1.0, 10.0]
        curve = estimate_curve(cfg, ctx, term, taus, 20_000, seed=5)
        for tau, (res, half) in zip(taus, curve):
            single, _ = estimate(cfg, ctx, term, tau, 20_000, seed=5)
            assert res.probability == single.probability


class TestDistributionAgreement:
    def test_serving_cdf(self, ctx):
        # per-trial serving distances against the analytic law
        cfg = make_config(10)
        term = terminal(ctx, 30.0)
        servings = []
        rng = np.random.default_rng(99)
        for _ in range(30_000):
            out = run_trial(cfg, ctx, term, 1.0, rng)
            if out.case is not VisibilityCase.NO_VISIBLE:
                servings.append(out.serving_distance)
        law = DistanceLaw(DistanceKind.SERVING_BPP, ctx, term.latitude, 10)
        ks = oracles.ks_distance(np.array(servings), lambda r: cdf(law, r))
        assert ks < 0.01

    def test_interference_transform_agreement(self, ctx, rng):
        # E[exp(-s I)] from full constellation+fading trials conditioned
        # on the serving distance landing in a narrow band around r0
        from geocov.channel import path_loss
        from geocov.distances import quantile

        cfg = make_config(10, m=2)
        phi = math.radians(30.0)
        law = DistanceLaw(DistanceKind.SERVING_BPP, ctx, phi, 10)
        r0 = float(quantile(law, 0.75))
        band = 40.0
        u0 = u_coefficient(cfg, cfg.g_serving)
        s = u0 * 1.0 * r0**cfg.alpha
        values = []
        for _ in range(60):
            az = rng.uniform(0, 2 * math.pi, (8192, cfg.n_sats))
            d = np.sqrt(ctx.v2 - ctx.sqrt_v1(phi) * np.cos(az))
            vis = d <= ctx.r_vis_max
            serving = np.where(vis, d, np.inf).min(axis=1)
            ok = np.isfinite(serving) & (np.abs(serving - r0) <= band)
            h = rng.gamma(cfg.m, 1.0 / cfg.m, az.shape)
            power = np.where(vis & (d > serving[:, None]),
                             cfg.p_t * cfg.g_interferer * h * path_loss(cfg, d),
                             0.0)
            values.extend(np.exp(-s * power.sum(axis=1))[ok].tolist())
        values = np.array(values)
        sigma = 3 * values.std(ddof=1) / math.sqrt(values.size)
        analytic = laplace_interference_bpp(cfg, ctx, phi, r0, s)
        assert abs(values.mean() - analytic) <= max(sigma, 2e-3)


class TestElevationDistanceEquivalence:
    def test_every_trial_consistent(self, ctx, rng):
        cfg = make_config(8)
        term = terminal(ctx, 55.0)
        for _ in range(200):
            c = draw_constellation(cfg.n_sats, rng, ctx.orbit_radius)
            pos = c.positions()
            d = np.linalg.norm(pos - term.cartesian, axis=1)
            by_distance = d <= ctx.r_vis_max
            by_elevation = (pos - term.cartesian) @ term.cartesian >= 0
            assert np.array_equal(by_distance, by_elevation)
