"""Great-circle geometry: coordinates, distances, centroids, bounding boxes.

Distances are great-circle on a sphere with the IUGG mean Earth radius.
Centroids are arithmetic means of latitude/longitude, which is accurate for
city-scale point sets away from the poles and the antimeridian; ingestion
rejects regions that would break this assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

EARTH_RADIUS_KM = 6371.0088  # IUGG mean radius
KM_PER_DEG_LAT = 2.0 * math.pi * EARTH_RADIUS_KM / 360.0

# Below this diagonal a bounding box is treated as degenerate (about 1 m).
DEGENERATE_KM = 1e-3


@dataclass(frozen=True, order=True)
class Coordinate:
    """A latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon}")


def haversine_km(a: Coordinate, b: Coordinate) -> float:
    """Great-circle distance between two coordinates in kilometers.

    Symmetric, non-negative, and zero iff the points coincide on the sphere.
    """
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon) - math.radians(a.lon)
    sin_lat = math.sin(dlat * 0.5)
    sin_lon = math.sin(dlon * 0.5)
    h = sin_lat * sin_lat + math.cos(lat1) * math.cos(lat2) * sin_lon * sin_lon
    return 2.0 * EARTH_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(max(0.0, 1.0 - h)))


def centroid(points: Sequence[Coordinate] | Iterable[Coordinate]) -> Coordinate:
    """Arithmetic mean of latitudes and longitudes of a nonempty point set."""
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    lat = sum(p.lat for p in pts) / len(pts)
    lon = sum(p.lon for p in pts) / len(pts)
    return Coordinate(lat, lon)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned lat/lon box. The south-west corner must not exceed the
    north-east corner on either axis, so antimeridian-crossing boxes are
    rejected at construction."""

    sw: Coordinate
    ne: Coordinate

    def __post_init__(self) -> None:
        if self.sw.lat > self.ne.lat or self.sw.lon > self.ne.lon:
            raise ValueError(
                f"south-west corner must be <= north-east corner: sw={self.sw}, ne={self.ne}"
            )

    def contains(self, c: Coordinate) -> bool:
        return self.sw.lat <= c.lat <= self.ne.lat and self.sw.lon <= c.lon <= self.ne.lon

    def diagonal_km(self) -> float:
        """Corner-to-corner great-circle distance, the maximal distance
        between points of the box for city-scale regions."""
        return haversine_km(self.sw, self.ne)
