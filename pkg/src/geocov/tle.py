"""Two-line element ingestion for geostationary snapshots.

Parses standard TLE text (2-line groups, optionally preceded by a name
line), filters near-geostationary records by inclination, and extracts
coarse sub-satellite longitudes good to a fraction of a degree.  That is
all the visibility comparison consumes; full orbit propagation is out of
scope since above-horizon membership is a tens-of-degrees criterion and a
sub-degree longitude error cannot flip it outside a negligible band.
Satellites are projected onto the ideal geostationary circle regardless
of their actual semi-major axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timedelta
from importlib import resources

import numpy as np

from geocov.geometry import GeometryContext

__all__ = [
    "TleRecord",
    "TleParseError",
    "GeoSnapshot",
    "line_checksum",
    "parse_tle",
    "gmst",
    "subsatellite_longitude",
    "average_visible_count",
    "bundled_snapshot_path",
    "fetch_tle",
]

LINE_LENGTH = 69
GEO_MEAN_MOTION = 1.0027  # rev/day
GEO_MEAN_MOTION_TOL = 0.01


class TleParseError(ValueError):
    pass


@dataclass(frozen=True)
class TleRecord:
    """Orbital elements of one satellite at an epoch (angles in degrees)."""

    name: str
    satnum: int
    epoch: datetime
    inclination: float
    raan: float
    eccentricity: float
    arg_perigee: float
    mean_anomaly: float
    mean_motion: float  # rev/day

    def __post_init__(self):
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError("eccentricity must lie in [0, 1)")


def line_checksum(line: str) -> int:
    """Modulo-10 TLE checksum: digits count face value, '-' counts 1."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _parse_epoch(yy: str, day: str) -> datetime:
    year = int(yy)
    year += 2000 if year < 57 else 1900
    return datetime(year, 1, 1) + timedelta(days=float(day) - 1.0)


def _validate_line(line: str, expected_first: str, lineno: int):
    if len(line) != LINE_LENGTH:
        raise TleParseError(f"line {lineno}: length {len(line)}, expected 69")
    if line[0] != expected_first:
        raise TleParseError(f"line {lineno}: expected a '{expected_first} ' line")
    if line_checksum(line) != int(line[68]):
        raise TleParseError(
            f"line {lineno}: checksum {line_checksum(line)} != recorded {line[68]}"
        )


def _parse_group(name: str, line1: str, line2: str, lineno1: int) -> TleRecord:
    _validate_line(line1, "1", lineno1)
    _validate_line(line2, "2", lineno1 + 1)
    if line1[2:7] != line2[2:7]:
        raise TleParseError(
            f"line {lineno1}: catalog numbers differ between the two lines"
        )
    return TleRecord(
        name=name.strip() or line1[2:7].strip(),
        satnum=int(line1[2:7]),
        epoch=_parse_epoch(line1[18:20], line1[20:32]),
        inclination=float(line2[8:16]),
        raan=float(line2[17:25]),
        eccentricity=float("0." + line2[26:33].strip()),
        arg_perigee=float(line2[34:42]),
        mean_anomaly=float(line2[43:51]),
        mean_motion=float(line2[52:63]),
    )


def parse_tle(text: str, strict: bool = True) -> list[TleRecord]:
    """Parse 2- or 3-line TLE groups from text.

    Malformed groups raise :class:`TleParseError` naming the offending
    line when ``strict``; otherwise they are skipped with a warning.
    """
    raw = text.splitlines()
    records: list[TleRecord] = []
    pending_name = ""
    i = 0
    while i < len(raw):
        line = raw[i].rstrip("\r\n")
        if not line.strip():
            pending_name = ""
            i += 1
            continue
        if line.startswith("1 ") or (line[:1] == "1" and len(line) == LINE_LENGTH):
            if i + 1 >= len(raw):
                err = TleParseError(f"line {i + 1}: truncated group, missing line 2")
                if strict:
                    raise err
                warnings.warn(str(err), stacklevel=2)
                break
            try:
                records.append(
                    _parse_group(pending_name, line, raw[i + 1].rstrip("\r\n"), i + 1)
                )
            except (TleParseError, ValueError) as err:
                if strict:
                    if isinstance(err, TleParseError):
                        raise
                    raise TleParseError(f"line {i + 1}: {err}") from err
                warnings.warn(f"skipping TLE group at line {i + 1}: {err}",
                              stacklevel=2)
            pending_name = ""
            i += 2
        else:
            pending_name = line
            i += 1
    return records


def _julian_date(epoch: datetime) -> float:
    return 2451545.0 + (epoch - datetime(2000, 1, 1, 12)).total_seconds() / 86400.0


def gmst(epoch: datetime) -> float:
    """Greenwich Mean Sidereal Time (rad), 1982 polynomial, UT1 ~ UTC."""
    d = _julian_date(epoch) - 2451545.0
    t = d / 36525.0
    deg = (280.46061837 + 360.98564736629 * d
           + 0.000387933 * t**2 - t**3 / 38710000.0)
    return math.radians(deg % 360.0)


def subsatellite_longitude(rec: TleRecord,
                           inclination_threshold_deg: float = 1.0) -> float:
    """Earth-fixed longitude (rad, in [0, 2 pi)) of a near-GEO satellite.

    For a near-circular equatorial orbit the inertial angle of the
    satellite is raan + arg_perigee + mean_anomaly, so the longitude is
    that angle minus GMST at the epoch.  Accuracy is ~0.5 degrees, plenty
    for above-horizon membership.
    """
    if rec.inclination >= inclination_threshold_deg:
        raise ValueError(
            f"{rec.name}: inclination {rec.inclination} deg is not near-GEO"
        )
    if abs(rec.mean_motion - GEO_MEAN_MOTION) > GEO_MEAN_MOTION_TOL:
        raise ValueError(
            f"{rec.name}: mean motion {rec.mean_motion} rev/day is not near-GEO"
        )
    inertial = math.radians(rec.raan + rec.arg_perigee + rec.mean_anomaly)
    return (inertial - gmst(rec.epoch)) % (2.0 * math.pi)


@dataclass(frozen=True)
class GeoSnapshot:
    """Sub-satellite longitudes of the retained near-GEO satellites."""

    longitudes: np.ndarray  # rad
    source_count: int
    inclination_threshold_deg: float

    def __post_init__(self):
        lon = np.asarray(self.longitudes, dtype=float)
        object.__setattr__(self, "longitudes", lon)

    @property
    def count(self) -> int:
        return int(self.longitudes.size)

    @classmethod
    def from_records(cls, records, inclination_threshold_deg: float = 1.0
                     ) -> "GeoSnapshot":
        kept = [r for r in records if r.inclination < inclination_threshold_deg]
        lons = np.array(
            [subsatellite_longitude(r, inclination_threshold_deg) for r in kept]
        )
        return cls(lons, len(records), inclination_threshold_deg)


def average_visible_count(snapshot: GeoSnapshot, ctx: GeometryContext,
                          phi: float, lon_step_deg: float = 1.0) -> float:
    """Mean number of snapshot satellites above the horizon at latitude phi.

    Averages over a terminal-longitude grid; visibility is the distance
    test against ``r_vis_max`` with every satellite projected onto the
    ideal geostationary circle.
    """
    if snapshot.count == 0:
        raise ValueError("snapshot is empty")
    thetas = np.radians(np.arange(0.0, 360.0, lon_step_deg))
    delta = snapshot.longitudes[None, :] - thetas[:, None]
    d_sq = ctx.v2 - ctx.sqrt_v1(phi) * np.cos(delta)
    visible = d_sq <= ctx.r_vis_max**2
    return float(visible.sum(axis=1).mean())


def bundled_snapshot_path():
    """Path to the pinned geostationary snapshot shipped with the package."""
    return resources.files("geocov.data") / "geo_snapshot.tle"


def fetch_tle(url: str, dest: str) -> str:
    """Download a TLE file (convenience only; tests use the pinned fixture)."""
    from urllib.request import urlretrieve

    path, _ = urlretrieve(url, dest)
    return path
