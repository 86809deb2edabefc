import math

import numpy as np
import pytest

from geocov import geometry
from geocov.geometry import (
    GeometryContext,
    TerminalPosition,
    case_probabilities,
    invisibility_latitude,
    p_int,
    p_vis,
    psi,
    r_max,
    r_min,
    r_vis_max,
    radius_at_arc_fraction,
    visible_arc_length,
)
from tests import oracles

# frozen outputs of the 3D horizon-intersection oracle
# (tests.oracles.visible_half_angle_3d, default Earth/orbit constants)
ORACLE_ARC_30DEG = 117656.80958848176
ORACLE_ARC_55DEG = 109956.49100559113
# frozen outputs of the 3D embedding oracle at 37 degrees latitude
ORACLE_R_MIN_37DEG = 37268.49172574994
ORACLE_R_MAX_37DEG = 47413.321803979394
# invisibility latitude over pi
P_VIS_EQUATOR = 0.45166484309198457


class TestGeometryContext:
    def test_derived_constants(self, ctx):
        assert ctx.orbit_radius == ctx.r_earth + ctx.altitude
        assert ctx.phi_inv == pytest.approx(math.acos(ctx.r_earth / ctx.orbit_radius))
        assert ctx.r_vis_max**2 == pytest.approx(
            ctx.altitude**2 + 2 * ctx.altitude * ctx.r_earth, rel=1e-14)
        assert ctx.v2 == ctx.orbit_radius**2 + ctx.r_earth**2
        phi = 0.7
        assert ctx.v1(phi) == pytest.approx(
            4 * ctx.orbit_radius**2 * ctx.r_earth**2 * math.cos(phi) ** 2, rel=1e-14)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            GeometryContext(r_earth=-1.0)
        with pytest.raises(ValueError):
            GeometryContext(altitude=0.0)


class TestTerminalPosition:
    def test_cartesian_embedding_norm(self, ctx, rng):
        for _ in range(100):
            lat = rng.uniform(-math.pi / 2, math.pi / 2)
            lon = rng.uniform(0, 2 * math.pi)
            t = TerminalPosition.from_geodetic(ctx, lat, lon)
            assert np.linalg.norm(t.cartesian) == pytest.approx(ctx.r_earth, rel=1e-9)

    def test_matches_explicit_embedding(self, ctx):
        t = TerminalPosition.from_geodetic(ctx, math.radians(37), math.radians(137))
        expected = oracles.terminal_xyz(ctx.r_earth, math.radians(37),
                                        math.radians(137))
        np.testing.assert_allclose(t.cartesian, expected, rtol=1e-15)

    def test_rejects_bad_latitude(self, ctx):
        with pytest.raises(ValueError):
            TerminalPosition.from_geodetic(ctx, 2.0, 0.0)
        with pytest.raises(ValueError):
            TerminalPosition.from_geodetic(ctx, math.nan, 0.0)


class TestVisibleArc:
    def test_equator_value(self, ctx):
        assert visible_arc_length(ctx, 0.0) == pytest.approx(119_657.0, abs=1.0)

    def test_zero_at_and_beyond_invisibility(self, ctx):
        assert visible_arc_length(ctx, ctx.phi_inv) == 0.0
        assert visible_arc_length(ctx, math.radians(85)) == 0.0
        assert visible_arc_length(ctx, math.pi / 2) == 0.0

    def test_matches_3d_oracle(self, ctx):
        for phi_deg, frozen in ((30.0, ORACLE_ARC_30DEG), (55.0, ORACLE_ARC_55DEG)):
            phi = math.radians(phi_deg)
            got = visible_arc_length(ctx, phi)
            assert got == pytest.approx(frozen, rel=1e-9)
            live = 2 * ctx.orbit_radius * oracles.visible_half_angle_3d(
                ctx.r_earth, ctx.altitude, phi)
            assert got == pytest.approx(live, rel=1e-10)

    def test_symmetric_and_strictly_decreasing(self, ctx):
        grid = np.linspace(0.0, ctx.phi_inv - 1e-6, 400)
        vals = visible_arc_length(ctx, grid)
        assert np.all(np.diff(vals) < 0)
        np.testing.assert_array_equal(vals, visible_arc_length(ctx, -grid))

    def test_rejects_non_finite(self, ctx):
        with pytest.raises(ValueError):
            visible_arc_length(ctx, math.inf)


class TestInvisibilityLatitude:
    def test_default_constant(self, ctx):
        assert math.degrees(invisibility_latitude(ctx)) == pytest.approx(81.3, abs=0.05)

    def test_vanishing_altitude_limit(self):
        tiny = GeometryContext(altitude=1e-6)
        assert invisibility_latitude(tiny) < 1e-4

    def test_altitude_equal_radius(self):
        ctx = GeometryContext(r_earth=6378.0, altitude=6378.0)
        assert invisibility_latitude(ctx) == pytest.approx(math.acos(0.5))


class TestPVis:
    def test_beyond_invisibility(self, ctx):
        assert p_vis(ctx, math.radians(85)) == 0.0

    def test_equator(self, ctx):
        assert p_vis(ctx, 0.0) == pytest.approx(P_VIS_EQUATOR, abs=1e-12)
        assert p_vis(ctx, 0.0) == pytest.approx(ctx.phi_inv / math.pi, rel=1e-14)

    def test_brute_force_arc_sampling(self, ctx, rng):
        # fraction of uniform azimuths above the horizon
        n = 1_000_000
        az = rng.uniform(0, 2 * math.pi, n)
        t = oracles.terminal_xyz(ctx.r_earth, 0.0)
        sats = oracles.satellite_xyz(ctx.orbit_radius, az)
        frac = np.mean((sats - t) @ t >= 0)
        assert abs(frac - p_vis(ctx, 0.0)) < oracles.binomial_3sigma(P_VIS_EQUATOR, n)

    def test_consistency_with_psi(self, ctx):
        for phi_deg in (0.01, 15, 37, 60, 75, 81):
            phi = math.radians(phi_deg)
            assert p_vis(ctx, phi) == pytest.approx(
                psi(ctx, ctx.r_vis_max, phi), abs=1e-10)

    def test_bounded_by_half(self, ctx):
        grid = np.linspace(-math.pi / 2, math.pi / 2, 1001)
        vals = p_vis(ctx, grid)
        assert np.all(vals >= 0) and np.all(vals <= 0.5)


class TestCaseProbabilities:
    def test_invisible_latitude(self, ctx):
        assert case_probabilities(ctx, math.radians(85), 7) == (1.0, 0.0, 0.0)

    def test_two_satellites_closed_form(self, ctx):
        p = p_vis(ctx, 0.0)
        p1, p2, p3 = case_probabilities(ctx, 0.0, 2)
        assert p1 == pytest.approx((1 - p) ** 2, rel=1e-14)
        assert p2 == pytest.approx(2 * p * (1 - p), rel=1e-14)
        assert p3 == pytest.approx(p * p, rel=1e-12)

    def test_sum_to_one(self, ctx):
        for phi in np.linspace(0, math.pi / 2, 37):
            for n in (1, 2, 10, 100, 391):
                probs = case_probabilities(ctx, float(phi), n)
                assert abs(sum(probs) - 1.0) < 1e-12

    def test_rejects_empty_network(self, ctx):
        with pytest.raises(ValueError):
            case_probabilities(ctx, 0.3, 0)

    def test_monte_carlo_frequencies(self, ctx, rng, phi30):
        n_sats, n_draws, batch = 100, 1_000_000, 20_000
        tallies = np.zeros(3, dtype=np.int64)
        for _ in range(n_draws // batch):
            az = rng.uniform(0, 2 * math.pi, (batch, n_sats))
            d = oracles.slant_distances_3d(ctx.r_earth, ctx.altitude, phi30, az)
            counts = (d <= ctx.r_vis_max).sum(axis=1)
            tallies += [(counts == 0).sum(), (counts == 1).sum(), (counts > 1).sum()]
        freq = tallies / n_draws
        for got, expect in zip(freq, case_probabilities(ctx, phi30, n_sats)):
            assert abs(got - expect) <= oracles.binomial_3sigma(expect, n_draws)

    def test_invisible_probability_increases_with_latitude(self, ctx):
        # finite differences on the northern branch for fixed N
        grid = np.linspace(1e-4, ctx.phi_inv - 1e-4, 300)
        p1 = case_probabilities(ctx, grid, 25)[0]
        assert np.all(np.diff(p1) > 0)


class TestRadialBounds:
    def test_equator_closed_forms(self, ctx):
        assert r_min(ctx, 0.0) == pytest.approx(ctx.altitude, rel=1e-14)
        assert r_max(ctx, 0.0) == pytest.approx(2 * ctx.r_earth + ctx.altitude,
                                                rel=1e-14)

    def test_matches_3d_embedding_oracle(self, ctx, phi37):
        assert r_min(ctx, phi37) == pytest.approx(ORACLE_R_MIN_37DEG, rel=1e-12)
        assert r_max(ctx, phi37) == pytest.approx(ORACLE_R_MAX_37DEG, rel=1e-9)
        # live re-derivation: nearest/farthest azimuths are 0 and pi
        d = oracles.slant_distances_3d(ctx.r_earth, ctx.altitude, phi37,
                                       np.array([0.0, math.pi]))
        assert r_min(ctx, phi37) == pytest.approx(d[0], rel=1e-12)
        assert r_max(ctx, phi37) == pytest.approx(d[1], rel=1e-12)

    def test_ordering_inside_visibility(self, ctx):
        for phi in np.linspace(0, ctx.phi_inv - 1e-3, 50):
            assert r_min(ctx, phi) <= ctx.r_vis_max <= r_max(ctx, phi)

    def test_endpoint_algebra(self, ctx):
        # v2 - r_min^2 = +sqrt(v1) and v2 - r_max^2 = -sqrt(v1)
        for phi in np.linspace(0, math.pi / 2, 91):
            s = ctx.sqrt_v1(phi)
            assert ctx.v2 - r_min(ctx, float(phi)) ** 2 == pytest.approx(
                s, rel=1e-12, abs=1e-6)
            assert ctx.v2 - r_max(ctx, float(phi)) ** 2 == pytest.approx(
                -s, rel=1e-12, abs=1e-6)


class TestRVisMax:
    def test_constant_value(self, ctx):
        assert r_vis_max(ctx) == pytest.approx(41_679.0, abs=1.0)

    def test_vanishing_altitude(self):
        # sqrt(a^2 + 2 a rE) ~ sqrt(2 a rE) -> 0 with the altitude
        assert GeometryContext(altitude=1e-9).r_vis_max < 1e-2
        assert GeometryContext(altitude=1e-13).r_vis_max < 1e-4

    def test_arc_endpoint_distance_any_latitude(self, ctx):
        # distance to the visible-arc endpoint from the 3D oracle
        for phi_deg in (5, 30, 55, 78):
            phi = math.radians(phi_deg)
            half = oracles.visible_half_angle_3d(ctx.r_earth, ctx.altitude, phi)
            endpoint = oracles.satellite_xyz(ctx.orbit_radius, half)
            d = np.linalg.norm(endpoint - oracles.terminal_xyz(ctx.r_earth, phi))
            assert d == pytest.approx(r_vis_max(ctx), rel=1e-9)


class TestPsi:
    def test_endpoints(self, ctx, phi30):
        assert psi(ctx, r_min(ctx, phi30), phi30) == pytest.approx(0.0, abs=1e-7)
        assert psi(ctx, r_max(ctx, phi30), phi30) == pytest.approx(1.0, abs=1e-7)

    def test_monotone(self, ctx, phi30):
        grid = np.linspace(r_min(ctx, phi30), r_max(ctx, phi30), 1000)
        vals = psi(ctx, grid, phi30)
        assert np.all(np.diff(vals) > 0)

    def test_out_of_range_rejected(self, ctx, phi30):
        with pytest.raises(ValueError):
            psi(ctx, r_min(ctx, phi30) - 1.0, phi30)
        with pytest.raises(ValueError):
            psi(ctx, r_max(ctx, phi30) + 1.0, phi30)

    def test_monte_carlo_arc_fraction(self, ctx, rng, phi30):
        n = 1_000_000
        r_mid = 0.5 * (r_min(ctx, phi30) + r_max(ctx, phi30))
        az = rng.uniform(0, 2 * math.pi, n)
        d = oracles.slant_distances_3d(ctx.r_earth, ctx.altitude, phi30, az)
        frac = np.mean(d <= r_mid)
        expect = psi(ctx, r_mid, phi30)
        assert abs(frac - expect) <= oracles.binomial_3sigma(expect, n)

    def test_symmetry(self, ctx):
        r = 40_000.0
        assert psi(ctx, r, 0.4) == psi(ctx, r, -0.4)

    def test_inverse_roundtrip(self, ctx, phi30):
        for frac in np.linspace(0, 1, 21):
            r = radius_at_arc_fraction(ctx, float(frac), phi30)
            assert psi(ctx, r, phi30) == pytest.approx(float(frac), abs=1e-12)


class TestPInt:
    def test_no_room_at_r_vis_max(self, ctx, phi30):
        assert p_int(ctx, ctx.r_vis_max, phi30) == pytest.approx(0.0, abs=1e-7)

    def test_whole_visible_arc_at_r_min(self, ctx):
        phi = 1e-6
        assert p_int(ctx, r_min(ctx, phi), phi) == pytest.approx(
            psi(ctx, ctx.r_vis_max, phi), abs=1e-7)

    def test_conditioned_monte_carlo(self, ctx, rng, phi37):
        # among satellites beyond r0, the fraction landing inside the
        # visible remainder
        r0 = 0.5 * (r_min(ctx, phi37) + ctx.r_vis_max)
        n = 2_000_000
        az = rng.uniform(0, 2 * math.pi, n)
        d = oracles.slant_distances_3d(ctx.r_earth, ctx.altitude, phi37, az)
        beyond = d > r0
        frac = np.mean(d[beyond] <= ctx.r_vis_max)
        expect = p_int(ctx, r0, phi37)
        assert abs(frac - expect) <= oracles.binomial_3sigma(expect, int(beyond.sum()))

    def test_out_of_range_rejected(self, ctx, phi30):
        with pytest.raises(ValueError):
            p_int(ctx, ctx.r_vis_max + 5.0, phi30)


class TestVisibilityEquivalence:
    def test_elevation_iff_distance(self, ctx, rng):
        # nonnegative elevation exactly when within r_vis_max
        n = 100_000
        phi = rng.uniform(-math.pi / 2, math.pi / 2, n)
        az = rng.uniform(0, 2 * math.pi, n)
        sats = oracles.satellite_xyz(ctx.orbit_radius, az)
        t = np.stack([ctx.r_earth * np.cos(phi), np.zeros(n),
                      ctx.r_earth * np.sin(phi)], axis=1)
        elevation_ok = np.einsum("ij,ij->i", sats - t, t) >= 0
        distance_ok = np.linalg.norm(sats - t, axis=1) <= ctx.r_vis_max
        assert np.array_equal(elevation_ok, distance_ok)
