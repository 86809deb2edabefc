"""Command-line front end producing machine-readable figure data.

Subcommands sweep the analysis and the simulator over thresholds,
constellation sizes and latitudes, and write deterministic CSV (fixed
float format, LF endings, UTF-8) plus a JSON manifest describing each
run.  Reruns with the same config and seed are byte-identical regardless
of worker count.  Decibel/linear conversion happens here and nowhere
else downstream of the config.

Exit codes: 0 success, 2 config error, 3 numeric failure in strict mode,
4 input parse error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

import geocov
from geocov import analysis, distances, geometry, montecarlo, tle
from geocov.channel import default_network_config
from geocov.units import db_to_linear

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PARSE = 4

_DEFAULTS = {
    "geometry": {"earth_radius_km": "6378", "altitude_km": "35786"},
    "network": {
        "n_sats": "100",
        "alpha": "3.0",
        "m": "1",
        "gain_ratio_db": "20.0",
        "eirp_density_dbw_mhz": "59.0",
        "tx_gain_dbi": "51.0",
        "rx_gain_dbi": "0.0",
        "carrier_frequency_hz": "2e9",
        "bandwidth_hz": "30e6",
        "noise_density_dbm_hz": "-174.0",
    },
    "terminal": {"latitude_deg": "37.0", "longitude_deg": "137.0"},
    "run": {"seed": "12345", "trials": "100000", "workers": "1"},
}


class ConfigError(ValueError):
    pass


def _load_settings(config_path: str | None) -> dict:
    parser = configparser.ConfigParser()
    parser.read_dict(_DEFAULTS)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as err:
            raise ConfigError(f"bad config file: {err}") from err
    settings: dict = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            settings[f"{section}.{key}"] = value
    return settings


def _get(settings, key, cast=float):
    try:
        return cast(settings[key])
    except (KeyError, ValueError) as err:
        raise ConfigError(f"bad setting {key}: {err}") from err


def _context(settings) -> geometry.GeometryContext:
    return geometry.GeometryContext(
        r_earth=_get(settings, "geometry.earth_radius_km"),
        altitude=_get(settings, "geometry.altitude_km"),
    )


def _network(settings, n_sats=None, alpha=None, m=None, gain_ratio_db=None):
    return default_network_config(
        n_sats=int(n_sats if n_sats is not None else _get(settings, "network.n_sats", int)),
        alpha=float(alpha if alpha is not None else _get(settings, "network.alpha")),
        gain_ratio_db=float(gain_ratio_db if gain_ratio_db is not None
                            else _get(settings, "network.gain_ratio_db")),
        m=int(m if m is not None else _get(settings, "network.m", int)),
        eirp_density_dbw_mhz=_get(settings, "network.eirp_density_dbw_mhz"),
        g_t0_dbi=_get(settings, "network.tx_gain_dbi"),
        g_r_dbi=_get(settings, "network.rx_gain_dbi"),
        f_c=_get(settings, "network.carrier_frequency_hz"),
        bandwidth=_get(settings, "network.bandwidth_hz"),
        noise_density_dbm_hz=_get(settings, "network.noise_density_dbm_hz"),
    )


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError as err:
        raise ConfigError(f"bad grid '{spec}', expected lo:hi:step") from err
    if step <= 0 or hi < lo:
        raise ConfigError(f"bad grid '{spec}': need step > 0 and hi >= lo")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(out_dir: Path, command: str, settings: dict, seed: int,
                    outputs: list[Path], extra: dict | None = None) -> Path:
    digest_src = ",".join(
        f"{k}={v}" for k, v in sorted(settings.items())
        if not k.startswith("run.seed")
    )
    manifest = {
        "command": command,
        "config_digest": hashlib.sha256(digest_src.encode()).hexdigest()[:16],
        "seed": seed,
        "output_paths": [str(p) for p in outputs],
        "tool_version": geocov.__version__,
    }
    if extra:
        manifest.update(extra)
    path = out_dir / f"{command}.manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _cmd_visibility(args, settings) -> int:
    ctx = _context(settings)
    grid = _parse_grid(args.grid)
    n_list = [int(x) for x in args.n_sats_list.split(",")]
    if any(n < 1 for n in n_list):
        raise ConfigError("n_sats values must be >= 1")
    header = ["latitude_deg", "arc_length_km", "p_vis"]
    for n in n_list:
        header += [f"p_case1_n{n}", f"p_case2_n{n}", f"p_case3_n{n}"]
    rows = []
    for lat_deg in grid:
        phi = math.radians(lat_deg)
        row = [lat_deg, geometry.visible_arc_length(ctx, phi),
               geometry.p_vis(ctx, phi)]
        for n in n_list:
            row.extend(geometry.case_probabilities(ctx, phi, n))
        rows.append(row)
    out = Path(args.out) / "visibility.csv"
    _write_csv(out, header, rows)
    _write_manifest(Path(args.out), "visibility", settings, args.seed, [out])
    return EXIT_OK


def _empirical_distance_samples(ctx, phi, n_sats, r0, n_samples, seed):
    """Constellation-draw samples of nearest, serving, and conditioned
    interferer distances (the latter via a band around r0)."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    nearest, serving, interferer = [], [], []
    band = 0.005 * r0
    rvm = ctx.r_vis_max
    batch = 4096
    need = n_samples
    while min(len(nearest), len(serving), len(interferer)) < need:
        az = rng.uniform(0.0, 2.0 * math.pi, (batch, n_sats))
        d = np.sqrt(ctx.v2 - ctx.sqrt_v1(phi) * np.cos(az))
        dmin = d.min(axis=1)
        nearest.extend(dmin.tolist())
        vis = d <= rvm
        has_vis = vis.any(axis=1)
        dvis = np.where(vis, d, np.inf)
        smin = dvis.min(axis=1)
        serving.extend(smin[has_vis].tolist())
        in_band = has_vis & (np.abs(smin - r0) <= band)
        for i in np.flatnonzero(in_band):
            row = d[i][vis[i]]
            interferer.extend(row[row > smin[i]].tolist())
    return (np.array(nearest[:need]), np.array(serving[:need]),
            np.array(interferer[:need]))


def _ks_distance(samples: np.ndarray, cdf_values_at_sorted: np.ndarray) -> float:
    n = samples.size
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(np.maximum(np.abs(ecdf_hi - cdf_values_at_sorted),
                            np.abs(ecdf_lo - cdf_values_at_sorted)).max())


def _cmd_distances(args, settings) -> int:
    ctx = _context(settings)
    phi = math.radians(args.phi_deg if args.phi_deg is not None
                       else _get(settings, "terminal.latitude_deg"))
    n_sats = args.n_sats or _get(settings, "network.n_sats", int)
    laws = {
        "nearest_bpp": distances.DistanceLaw(distances.DistanceKind.NEAREST_BPP, ctx, phi, n_sats),
        "serving_bpp": distances.DistanceLaw(distances.DistanceKind.SERVING_BPP, ctx, phi, n_sats),
        "nearest_ppp": distances.DistanceLaw(distances.DistanceKind.NEAREST_PPP, ctx, phi, n_sats),
        "serving_ppp": distances.DistanceLaw(distances.DistanceKind.SERVING_PPP, ctx, phi, n_sats),
    }
    r0 = args.r0_km or float(distances.quantile(laws["serving_bpp"], 0.5))
    laws["interferer_given_r0"] = distances.DistanceLaw(
        distances.DistanceKind.INTERFERER_GIVEN_R0, ctx, phi, n_sats, r0=r0)
    grid = np.linspace(geometry.r_min(ctx, phi), geometry.r_max(ctx, phi),
                       args.r_points)
    header = ["r_km"] + [f"cdf_{name}" for name in laws]
    columns = [grid] + [np.asarray(distances.cdf(law, grid)) for law in laws.values()]
    out_dir = Path(args.out)
    outputs = []
    if args.samples > 0:
        near, serv, intf = _empirical_distance_samples(
            ctx, phi, n_sats, r0, args.samples, args.seed)
        for name, samples in (("nearest_bpp", near), ("serving_bpp", serv),
                              ("interferer_given_r0", intf)):
            s = np.sort(samples)
            ks = _ks_distance(s, np.asarray(distances.cdf(laws[name], s)))
            print(f"ks {name}: {ks:.5f}")
            header.append(f"ecdf_{name}")
            columns.append(np.searchsorted(s, grid, side="right") / s.size)
    out = out_dir / "distances.csv"
    _write_csv(out, header, np.column_stack(columns))
    outputs.append(out)
    _write_manifest(out_dir, "distances", settings, args.seed, outputs,
                    extra={"r0_km": r0, "n_sats": n_sats})
    return EXIT_OK


def _cmd_coverage(args, settings) -> int:
    ctx = _context(settings)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - {"bpp", "ppp", "mc"}
    if unknown:
        raise ConfigError(f"unknown methods: {sorted(unknown)}")
    grid = _parse_grid(args.grid)
    phi_default = math.radians(_get(settings, "terminal.latitude_deg"))
    lon = math.radians(_get(settings, "terminal.longitude_deg"))
    tau_default = float(db_to_linear(args.tau_db))
    trials = args.trials or _get(settings, "run.trials", int)
    workers = args.workers or _get(settings, "run.workers", int)
    quad = analysis.QuadratureSpec()

    if args.sweep == "tau":
        sweep_header = "tau_db"
        points = [(float(db_to_linear(v)), None, phi_default, v) for v in grid]
    elif args.sweep == "n":
        sweep_header = "n_sats"
        points = [(tau_default, int(v), phi_default, v) for v in grid]
    else:
        sweep_header = "latitude_deg"
        points = [(tau_default, None, math.radians(v), v) for v in grid]

    header = [sweep_header] + [f"p_cov_{m}" for m in methods]
    if "mc" in methods:
        header.append("mc_ci_half_width")
    rows, failures = [], 0
    max_quad_err = 0.0
    mc_half_max = 0.0
    for tau, n_override, phi, sweep_value in points:
        cfg = _network(settings, n_sats=n_override,
                       alpha=args.alpha, m=args.m,
                       gain_ratio_db=args.gain_ratio_db)
        row = [sweep_value]
        half = None
        for method in methods:
            try:
                if method == "bpp":
                    res = analysis.coverage_bpp(cfg, ctx, phi, tau, quad)
                elif method == "ppp":
                    res = analysis.coverage_ppp(cfg, ctx, phi, tau, quad)
                else:
                    terminal = geometry.TerminalPosition.from_geodetic(ctx, phi, lon)
                    res, half = montecarlo.estimate(
                        cfg, ctx, terminal, tau, trials, args.seed, workers)
                row.append(res.probability)
                max_quad_err = max(max_quad_err, res.quadrature_error_estimate)
            except analysis.QuadratureConvergenceError:
                failures += 1
                row.append(float("nan"))
        if "mc" in methods:
            row.append(half if half is not None else float("nan"))
            if half is not None:
                mc_half_max = max(mc_half_max, half)
        rows.append(row)
    out = Path(args.out) / "coverage.csv"
    _write_csv(out, header, rows)
    _write_manifest(Path(args.out), "coverage", settings, args.seed, [out],
                    extra={"sweep": args.sweep,
                           "max_quadrature_error": max_quad_err,
                           "max_mc_ci_half_width": mc_half_max,
                           "methods": methods})
    if failures and args.strict:
        print(f"{failures} quadrature failure(s)", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_tle(args, settings) -> int:
    ctx = _context(settings)
    path = Path(args.tle) if args.tle else tle.bundled_snapshot_path()
    try:
        text = Path(path).read_text(encoding="utf-8")
        records = tle.parse_tle(text, strict=args.strict)
        snapshot = tle.GeoSnapshot.from_records(records, args.inclination_max)
    except (OSError, tle.TleParseError, ValueError) as err:
        print(f"TLE input error: {err}", file=sys.stderr)
        return EXIT_PARSE
    out_dir = Path(args.out)
    lon_csv = out_dir / "tle_longitudes.csv"
    _write_csv(lon_csv, ["longitude_deg"],
               [[v] for v in np.degrees(np.sort(snapshot.longitudes))])
    grid = _parse_grid(args.lat_grid)
    rows = []
    for lat_deg in grid:
        phi = math.radians(lat_deg)
        rows.append([
            lat_deg,
            tle.average_visible_count(snapshot, ctx, phi),
            snapshot.count * geometry.p_vis(ctx, phi),
        ])
    vis_csv = out_dir / "tle_visibility.csv"
    _write_csv(vis_csv, ["latitude_deg", "avg_visible_actual", "avg_visible_bpp"], rows)
    _write_manifest(out_dir, "tle", settings, args.seed, [lon_csv, vis_csv],
                    extra={"filtered_count": snapshot.count,
                           "source_count": snapshot.source_count})
    return EXIT_OK


def _cmd_montecarlo(args, settings) -> int:
    ctx = _context(settings)
    cfg = _network(settings, n_sats=args.n_sats, alpha=args.alpha, m=args.m,
                   gain_ratio_db=args.gain_ratio_db)
    phi = math.radians(args.phi_deg if args.phi_deg is not None
                       else _get(settings, "terminal.latitude_deg"))
    lon = math.radians(_get(settings, "terminal.longitude_deg"))
    terminal = geometry.TerminalPosition.from_geodetic(ctx, phi, lon)
    tau = float(db_to_linear(args.tau_db))
    trials = args.trials or 1000
    rows = []
    for trial in range(trials):
        rng = np.random.Generator(np.random.Philox(key=(args.seed << 64) + trial))
        outcome = montecarlo.run_trial(cfg, ctx, terminal, tau, rng)
        rows.append([
            trial, outcome.case.value,
            outcome.serving_distance if outcome.serving_distance is not None
            else float("nan"),
            outcome.interferer_distances.size, outcome.sinr, outcome.covered,
        ])
    out = Path(args.out) / "montecarlo.csv"
    _write_csv(out, ["trial", "case", "serving_distance_km", "n_interferers",
                     "sinr", "covered"], rows)
    _write_manifest(Path(args.out), "montecarlo", settings, args.seed, [out],
                    extra={"tau_db": args.tau_db, "trials": trials})
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geocov",
        description="Coverage analysis of geostationary satellite networks.",
    )
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--strict", action="store_true",
                        help="nonzero exit on numeric/parse trouble")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", help="visible arc and case probabilities")
    p.add_argument("--grid", default="0:90:0.5", help="latitude grid, deg")
    p.add_argument("--n-sats-list", default="2,10,100")
    p.set_defaults(func=_cmd_visibility)

    p = sub.add_parser("distances", help="distance-law CDFs")
    p.add_argument("--phi-deg", type=float, default=None)
    p.add_argument("--n-sats", type=int, default=None)
    p.add_argument("--r-points", type=int, default=512)
    p.add_argument("--samples", type=int, default=0,
                   help="empirical sample count (0 disables)")
    p.add_argument("--r0-km", type=float, default=None,
                   help="conditioning serving distance (default: median)")
    p.set_defaults(func=_cmd_distances)

    p = sub.add_parser("coverage", help="coverage probability sweeps")
    p.add_argument("--sweep", choices=["tau", "n", "phi"], default="tau")
    p.add_argument("--grid", default="-10:20:1")
    p.add_argument("--methods", default="bpp,ppp,mc")
    p.add_argument("--tau-db", type=float, default=0.0,
                   help="threshold for n/phi sweeps")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--gain-ratio-db", type=float, default=None)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("tle", help="two-line-element snapshot comparison")
    p.add_argument("--tle", default=None, help="TLE file (default: bundled)")
    p.add_argument("--inclination-max", type=float, default=1.0)
    p.add_argument("--lat-grid", default="0:90:1")
    p.set_defaults(func=_cmd_tle)

    p = sub.add_parser("montecarlo", help="raw trial dump")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--tau-db", type=float, default=0.0)
    p.add_argument("--phi-deg", type=float, default=None)
    p.add_argument("--n-sats", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--gain-ratio-db", type=float, default=None)
    p.set_defaults(func=_cmd_montecarlo)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _load_settings(args.config)
        if args.seed is None:
            args.seed = _get(settings, "run.seed", int)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return args.func(args, settings)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
