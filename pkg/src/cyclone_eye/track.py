"""Storm tracks, reference comparison and the coordinate error-percentage metric.

The metric is a signed relative difference per coordinate,
``(candidate - reference) / reference * 100``. It depends on where the storm
is (a 0.1 deg miss near the equator is a large percentage); it is kept
because it is how the reference tables are expressed, not because it is a
good distance measure.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AlignmentError, OrderingError, RangeError, UndefinedErrorPercentage
from .geo import GeoPoint

SOURCES = ("IMD", "CIMSS", "METHOD")
QUALITIES = ("normal", "degraded")
KNOT_MPS = 1852.0 / 3600.0


def knots_to_mps(v: float) -> float:
    if v < 0:
        raise RangeError(f"speed must be non-negative, got {v}")
    return v * KNOT_MPS


def mps_to_knots(v: float) -> float:
    if v < 0:
        raise RangeError(f"speed must be non-negative, got {v}")
    return v / KNOT_MPS


@dataclass(frozen=True)
class TrackPoint:
    timestamp: str
    position: GeoPoint
    source: str = "METHOD"
    quality: str = "normal"
    prior_center: GeoPoint | None = None

    def __post_init__(self):
        if self.quality not in QUALITIES:
            raise RangeError(f"quality must be one of {QUALITIES}, got {self.quality!r}")


def _sort_keys(stamps: Sequence[str]):
    try:
        return [datetime.fromisoformat(s) for s in stamps]
    except ValueError:
        return list(stamps)


def _check_order(stamps: Sequence[str]) -> None:
    keys = _sort_keys(stamps)
    for k in range(1, len(keys)):
        if not keys[k - 1] < keys[k]:
            raise OrderingError(f"timestamps not strictly increasing at {stamps[k - 1]!r} -> {stamps[k]!r}")


@dataclass(frozen=True)
class Track:
    points: tuple[TrackPoint, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        _check_order([p.timestamp for p in self.points])

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k):
        return self.points[k]

    @property
    def links(self) -> list[tuple[str, str]]:
        """(seeding timestamp, seeded timestamp) for each prior-center hand-off."""
        return [(a.timestamp, b.timestamp) for a, b in zip(self.points, self.points[1:])
                if b.prior_center is not None and b.prior_center == a.position]


@dataclass(frozen=True)
class LocatedEye:
    timestamp: str
    position: GeoPoint
    quality: str = "normal"
    prior_center: GeoPoint | None = None


def assemble_track(located: Sequence[LocatedEye], name: str = "") -> Track:
    if not located:
        raise ValueError("a track needs at least one located eye")
    _check_order([e.timestamp for e in located])
    return Track(tuple(TrackPoint(e.timestamp, e.position, "METHOD", e.quality, e.prior_center)
                       for e in located), name)


@dataclass(frozen=True)
class TrackErrorRow:
    reference: GeoPoint
    candidate: GeoPoint
    lat_err_pct: float
    lon_err_pct: float


def error_percentage(reference: GeoPoint, candidate: GeoPoint) -> TrackErrorRow:
    if reference.lat == 0.0 or reference.lon == 0.0:
        raise UndefinedErrorPercentage(f"reference {reference} has a zero coordinate")
    return TrackErrorRow(
        reference,
        candidate,
        (candidate.lat - reference.lat) / reference.lat * 100.0,
        (candidate.lon - reference.lon) / reference.lon * 100.0,
    )


@dataclass(frozen=True)
class TrackComparison:
    rows: tuple[TrackErrorRow, ...]
    timestamps: tuple[str, ...] = ()

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    @property
    def summary(self) -> dict:
        lat = [abs(r.lat_err_pct) for r in self.rows]
        lon = [abs(r.lon_err_pct) for r in self.rows]
        if not self.rows:
            return {"count": 0, "mean_abs_lat_pct": 0.0, "max_abs_lat_pct": 0.0,
                    "mean_abs_lon_pct": 0.0, "max_abs_lon_pct": 0.0}
        return {
            "count": len(self.rows),
            "mean_abs_lat_pct": sum(lat) / len(lat),
            "max_abs_lat_pct": max(lat),
            "mean_abs_lon_pct": sum(lon) / len(lon),
            "max_abs_lon_pct": max(lon),
        }


def compare_tracks(reference: Track, candidate: Track, match: str = "timestamp") -> TrackComparison:
    """Pair points by ``"timestamp"`` or by ``"order"`` and compute per-pair errors."""
    if match == "order":
        if len(reference) != len(candidate):
            n = min(len(reference), len(candidate))
            orphans = [p.timestamp for p in reference.points[n:]] + [p.timestamp for p in candidate.points[n:]]
            raise AlignmentError(f"track lengths differ ({len(reference)} vs {len(candidate)})", orphans)
        pairs = list(zip(reference.points, candidate.points))
    elif match == "timestamp":
        cand = {p.timestamp: p for p in candidate.points}
        ref_stamps = {p.timestamp for p in reference.points}
        orphans = [p.timestamp for p in reference.points if p.timestamp not in cand]
        orphans += [p.timestamp for p in candidate.points if p.timestamp not in ref_stamps]
        if orphans:
            raise AlignmentError(f"unmatched timestamps: {orphans}", orphans)
        pairs = [(p, cand[p.timestamp]) for p in reference.points]
    else:
        raise ValueError(f"match must be 'timestamp' or 'order', got {match!r}")
    rows = tuple(error_percentage(r.position, c.position) for r, c in pairs)
    return TrackComparison(rows, tuple(r.timestamp for r, _ in pairs))


# --- CSV / GeoJSON ---------------------------------------------------------

CSV_HEADER = ("timestamp", "lat", "lon", "source")


def _data_lines(lines: Iterable[str]):
    return (ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#"))


def read_track_csv(path, source: str | None = None, name: str = "") -> Track:
    """Best-track CSV with header ``timestamp,lat,lon,source``.

    An optional ``quality`` column is honoured. ``source`` filters rows when
    a file mixes agencies.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(_data_lines(fh))
        missing = [c for c in CSV_HEADER if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        pts = [
            TrackPoint(row["timestamp"], GeoPoint(float(row["lat"]), float(row["lon"])),
                       row["source"], row.get("quality") or "normal")
            for row in reader
            if source is None or row["source"] == source
        ]
    return Track(tuple(pts), name or Path(path).stem)


def track_to_csv(track: Track) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((*CSV_HEADER, "quality"))
    for p in track:
        w.writerow((p.timestamp, repr(p.position.lat), repr(p.position.lon), p.source, p.quality))
    return buf.getvalue()


def track_to_geojson(track: Track) -> dict:
    """FeatureCollection: one LineString (when >= 2 points) plus one Point per fix."""
    features = []
    coords = [[p.position.lon, p.position.lat] for p in track]
    if len(coords) >= 2:
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": {
                "name": track.name,
                "timestamps": [p.timestamp for p in track],
                "quality": [p.quality for p in track],
            },
        })
    for p in track:
        props = {"timestamp": p.timestamp, "quality": p.quality, "source": p.source}
        if p.prior_center is not None:
            props["prior_center"] = p.prior_center.to_dict()
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [p.position.lon, p.position.lat]},
            "properties": props,
        })
    return {"type": "FeatureCollection", "features": features}


def comparison_to_csv(cmp: TrackComparison) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("timestamp", "ref_lat", "ref_lon", "cand_lat", "cand_lon", "lat_err_pct", "lon_err_pct"))
    stamps = cmp.timestamps or ("",) * len(cmp)
    for t, r in zip(stamps, cmp.rows):
        w.writerow((t, r.reference.lat, r.reference.lon, r.candidate.lat, r.candidate.lon,
                    f"{r.lat_err_pct:.4f}", f"{r.lon_err_pct:.4f}"))
    return buf.getvalue()


# --- published tables ------------------------------------------------------

FIXTURES = ("tauktae", "yaas")

_FIXTURE_COLS = ("imd_lat", "imd_lon", "cimss_lat", "cimss_lon", "method_lat", "method_lon",
                 "a_lat", "a_lon", "b_lat", "b_lon")


@dataclass(frozen=True)
class FixtureTable:
    """A published comparison table: coordinates plus the printed error columns.

    ``a_*`` compare CIMSS against IMD, ``b_*`` the method against IMD.
    """

    name: str
    rows: tuple[dict, ...]
    notes: tuple[str, ...] = field(default=())

    def track(self, which: str) -> Track:
        prefix = {"IMD": "imd", "CIMSS": "cimss", "METHOD": "method"}[which]
        return Track(tuple(
            TrackPoint(f"row{k:02d}", GeoPoint(r[f"{prefix}_lat"], r[f"{prefix}_lon"]), which)
            for k, r in enumerate(self.rows, 1)
        ), f"{self.name}-{which}")

    def printed(self, column: str) -> list[float]:
        return [r[column] for r in self.rows]


def load_fixture(name: str) -> FixtureTable:
    name = name.lower()
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    text = resources.files("cyclone_eye.fixtures").joinpath(f"{name}.csv").read_text()
    notes = tuple(ln.lstrip("# ").rstrip() for ln in text.splitlines() if ln.startswith("#"))
    reader = csv.DictReader(_data_lines(text.splitlines()))
    rows = tuple({c: float(rec[c]) for c in _FIXTURE_COLS} for rec in reader)
    return FixtureTable(name, rows, notes)


def fixture_table_csv(table: FixtureTable) -> str:
    """Recompute both error-column pairs in the printed table layout."""
    imd, cimss, method = (table.track(s) for s in SOURCES)
    a = compare_tracks(imd, cimss, match="order")
    b = compare_tracks(imd, method, match="order")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_FIXTURE_COLS)
    for r, ra, rb in zip(table.rows, a, b):
        w.writerow((r["imd_lat"], r["imd_lon"], r["cimss_lat"], r["cimss_lon"], r["method_lat"], r["method_lon"],
                    f"{ra.lat_err_pct:.2f}", f"{ra.lon_err_pct:.2f}", f"{rb.lat_err_pct:.2f}", f"{rb.lon_err_pct:.2f}"))
    return buf.getvalue()


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
