"""Regenerate the pinned geostationary TLE snapshot.

Writes src/geocov/data/geo_snapshot.tle: a deterministic, format-valid
snapshot of the geosynchronous belt as of 2023-10-21 containing exactly
391 satellites with inclination below 1 degree plus 40 inclined
geosynchronous satellites that the filter must drop.  Longitudes are
thinned over 180-220 degrees East, the sparsely served Pacific band.

Run from the repository root:  python tools/make_geo_fixture.py
"""

import math
import pathlib
from datetime import datetime, timedelta

import numpy as np

from geocov.tle import gmst, line_checksum

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "geocov" / "data" / "geo_snapshot.tle"

N_GEO = 391
N_INCLINED = 40
EPOCH_YEAR = 2023
EPOCH_DAY = 294.5  # Oct 21, 12:00 UTC
SPARSE_BAND = (180.0, 220.0)
SPARSE_WEIGHT = 0.12


def sample_longitudes(rng, n):
    """Uniform belt occupancy with the Pacific band thinned."""
    out = []
    while len(out) < n:
        lon = rng.uniform(0.0, 360.0)
        if SPARSE_BAND[0] <= lon < SPARSE_BAND[1] and rng.random() > SPARSE_WEIGHT:
            continue
        out.append(lon)
    return np.array(out)


def format_line1(satnum, intl, epoch_yy, epoch_day):
    body = (f"1 {satnum:05d}U {intl:<8s} {epoch_yy:02d}{epoch_day:012.8f} "
            f" .00000000  00000-0  00000-0 0  999")
    assert len(body) == 68, len(body)
    return body + str(line_checksum(body))


def format_line2(satnum, inc, raan, ecc, argp, ma, mm, rev):
    ecc_field = f"{ecc:.7f}"[2:]
    body = (f"2 {satnum:05d} {inc:8.4f} {raan:8.4f} {ecc_field} {argp:8.4f} "
            f"{ma:8.4f} {mm:11.8f}{rev:5d}")
    assert len(body) == 68, len(body)
    return body + str(line_checksum(body))


def main():
    rng = np.random.default_rng(20231021)
    epoch = datetime(EPOCH_YEAR, 1, 1) + timedelta(days=EPOCH_DAY - 1.0)
    gmst_deg = math.degrees(gmst(epoch))

    lines = []
    satnum = 26000
    lons = sample_longitudes(rng, N_GEO)
    incs = np.minimum(np.abs(rng.normal(0.04, 0.12, N_GEO + N_INCLINED)), 0.985)
    inclined = rng.uniform(1.2, 14.0, N_INCLINED)
    kinds = np.array([True] * N_GEO + [False] * N_INCLINED)
    rng.shuffle(kinds)

    geo_i = inclined_i = 0
    for k, is_geo in enumerate(kinds):
        satnum += int(rng.integers(2, 40))
        launch_year = int(rng.integers(1985, 2023))
        intl = f"{launch_year % 100:02d}{int(rng.integers(1, 99)):03d}A"
        name = f"GEOSAT {satnum}" if is_geo else f"GEOSYNC-INC {satnum}"
        if is_geo:
            inc = float(incs[geo_i])
            lon = float(lons[geo_i])
            geo_i += 1
        else:
            inc = float(inclined[inclined_i])
            lon = float(rng.uniform(0.0, 360.0))
            inclined_i += 1
        raan = float(rng.uniform(0.0, 360.0))
        argp = float(rng.uniform(0.0, 360.0))
        ma = (gmst_deg + lon - raan - argp) % 360.0
        ecc = float(rng.uniform(1e-5, 6e-4))
        mm = float(np.clip(rng.normal(1.00271, 0.0015), 1.0027 - 0.009, 1.0027 + 0.009))
        day = EPOCH_DAY + float(rng.uniform(-0.4, 0.4))
        # the longitude was set against the nominal epoch; a shifted epoch
        # stamp must keep the same Earth-fixed longitude
        ma = (ma + math.degrees(
            gmst(datetime(EPOCH_YEAR, 1, 1) + timedelta(days=day - 1.0))) - gmst_deg
        ) % 360.0
        lines.append(name)
        lines.append(format_line1(satnum, intl, EPOCH_YEAR % 100, day))
        lines.append(format_line2(satnum, inc, raan, ecc, argp, ma, mm,
                                  int(rng.integers(1000, 9999))))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    print(f"wrote {OUT} ({N_GEO} near-GEO + {N_INCLINED} inclined records)")


if __name__ == "__main__":
    main()
