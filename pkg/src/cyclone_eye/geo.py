"""Geographic primitives shared by the locator and track tools."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RangeError

EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise RangeError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise RangeError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise RangeError(f"longitude {lon} outside [-180, 180]")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)

    @classmethod
    def parse(cls, text: str) -> "GeoPoint":
        """Parse ``"lat,lon"``."""
        try:
            lat, lon = (float(p) for p in text.split(","))
        except ValueError:
            raise RangeError(f"expected 'lat,lon', got {text!r}") from None
        return cls(lat, lon)

    def to_dict(self) -> dict:
        return {"lat": self.lat, "lon": self.lon}


@dataclass(frozen=True)
class GeoBounds:
    south: float
    north: float
    west: float
    east: float

    def __post_init__(self):
        if not (self.south < self.north and self.west < self.east):
            raise RangeError(f"degenerate bounds {self}")

    def contains(self, p: GeoPoint, tol: float = 1e-9) -> bool:
        return (self.south - tol <= p.lat <= self.north + tol
                and self.west - tol <= p.lon <= self.east + tol)

    def intersect(self, other: "GeoBounds") -> "GeoBounds":
        return GeoBounds(max(self.south, other.south), min(self.north, other.north),
                         max(self.west, other.west), min(self.east, other.east))

    @property
    def center(self) -> GeoPoint:
        return GeoPoint((self.south + self.north) / 2, (self.west + self.east) / 2)

    def to_dict(self) -> dict:
        return {"south": self.south, "north": self.north, "west": self.west, "east": self.east}

    @classmethod
    def from_dict(cls, d) -> "GeoBounds":
        return cls(float(d["south"]), float(d["north"]), float(d["west"]), float(d["east"]))


def great_circle_km(a: GeoPoint, b: GeoPoint) -> float:
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dp, dl = p2 - p1, math.radians(b.lon - a.lon)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))
