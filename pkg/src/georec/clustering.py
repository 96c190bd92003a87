"""Density clustering of geotagged items into recommendable POI regions.

Classic DBSCAN under the haversine metric with exact, deterministic
semantics: points are visited in ascending item index, a point's
eps-neighborhood includes the point itself, neighborhood membership is
distance <= max_radius_km, and a border point reachable from several
clusters joins the first cluster to claim it in visit order. Neighborhood
queries go through a lat/lon grid index but are always distance-exact.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ConfigError
from .geo import EARTH_RADIUS_KM, KM_PER_DEG_LAT, Coordinate, centroid

NOISE = -1

# Grid binning assumes a usable km-per-degree-of-longitude scale; past this
# latitude (or across the antimeridian) fall back to exhaustive scans.
_MAX_GRID_LAT = 85.0


@dataclass
class Clustering:
    """Result of one DBSCAN run over (item, coordinate) points."""

    assignment: dict[int, int]
    members: dict[int, list[int]]
    centroids: dict[int, Coordinate]
    core_items: frozenset[int]
    max_radius_km: float
    min_points: int
    item_coord: dict[int, Coordinate] = field(default_factory=dict)
    _core_index: "_NearestCore | None" = field(
        default=None, init=False, repr=False, compare=False
    )

    @property
    def n_clusters(self) -> int:
        return len(self.members)

    def unit_of(self, item: int) -> int | None:
        """Cluster id of an item; None for noise or unknown items."""
        cid = self.assignment.get(item, NOISE)
        return None if cid == NOISE else cid

    def predict(self, coord: Coordinate) -> int | None:
        """Cluster a held-out coordinate the way DBSCAN would claim a border
        point: the cluster of the nearest core point within max_radius_km,
        or None if no core point is that close."""
        if self._core_index is None:
            self._core_index = _NearestCore(self)
        item = self._core_index.query(coord)
        return None if item is None else self.assignment[item]


class _NearestCore:
    """Grid-accelerated nearest-core-point lookup for one clustering.
    Comparisons happen in haversine space, which orders distances exactly;
    ties break by (cluster id, item) so the result is total-order stable."""

    def __init__(self, clustering: Clustering):
        self.assignment = clustering.assignment
        pts = [(i, clustering.item_coord[i]) for i in sorted(clustering.core_items)]
        self.pts = pts
        self.grid = _GridIndex(pts, clustering.max_radius_km)
        if pts:
            lons = [c.lon for _, c in pts]
            if max(lons) - min(lons) > 300.0:
                self.grid.exhaustive = True
        self.phi = [math.radians(c.lat) for _, c in pts]
        self.lam = [math.radians(c.lon) for _, c in pts]
        self.cph = [math.cos(x) for x in self.phi]
        self.h_eps = (
            math.sin(min(clustering.max_radius_km / (2.0 * EARTH_RADIUS_KM),
                         math.pi / 2.0)) ** 2
        )

    def query(self, coord: Coordinate) -> int | None:
        q_phi = math.radians(coord.lat)
        q_lam = math.radians(coord.lon)
        q_cos = math.cos(q_phi)
        sin = math.sin
        best: tuple[float, int, int] | None = None
        for j in self.grid.candidates(coord):
            s1 = sin((self.phi[j] - q_phi) * 0.5)
            s2 = sin((self.lam[j] - q_lam) * 0.5)
            h = s1 * s1 + q_cos * self.cph[j] * s2 * s2
            if h <= self.h_eps:
                item = self.pts[j][0]
                key = (h, self.assignment[item], item)
                if best is None or key < best:
                    best = key
        return None if best is None else best[2]


class _GridIndex:
    """Uniform lat/lon grid for eps-neighborhood candidate generation."""

    def __init__(self, points: Sequence[tuple[int, Coordinate]], eps_km: float):
        max_abs_lat = max((abs(c.lat) for _, c in points), default=0.0)
        self.exhaustive = max_abs_lat > _MAX_GRID_LAT
        self.points = points
        if self.exhaustive:
            return
        self.lat_cell = eps_km / KM_PER_DEG_LAT
        cos_min = math.cos(math.radians(min(max_abs_lat + self.lat_cell, 89.9)))
        # 1.05 covers the small-angle error of the planar lon bound, so an
        # eps-neighbor is never more than one cell away.
        self.lon_cell = 1.05 * eps_km / (KM_PER_DEG_LAT * max(cos_min, 1e-6))
        self.cells: dict[tuple[int, int], list[int]] = {}
        for idx, (_, c) in enumerate(points):
            self.cells.setdefault(self._cell(c), []).append(idx)

    def _cell(self, c: Coordinate) -> tuple[int, int]:
        return (math.floor(c.lat / self.lat_cell), math.floor(c.lon / self.lon_cell))

    def candidates(self, c: Coordinate) -> Iterable[int]:
        if self.exhaustive:
            return range(len(self.points))
        row, col = self._cell(c)
        out: list[int] = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                out.extend(self.cells.get((row + dr, col + dc), ()))
        return out


def dbscan(
    points: Iterable[tuple[int, Coordinate]] | Mapping[int, Coordinate],
    max_radius_km: float,
    min_points: int,
) -> Clustering:
    """Cluster (item, coordinate) points with DBSCAN.

    max_radius_km is the eps radius under haversine distance; a point is a
    core point when at least min_points points (itself included) lie within
    that radius. Cluster ids are contiguous from 0 in discovery order.
    """
    if max_radius_km <= 0:
        raise ConfigError(f"max_radius_km must be positive: {max_radius_km}")
    if min_points < 1:
        raise ConfigError(f"min_points must be >= 1: {min_points}")

    if isinstance(points, Mapping):
        points = points.items()
    pts = sorted(points, key=lambda p: p[0])
    for k in range(1, len(pts)):
        if pts[k][0] == pts[k - 1][0]:
            raise ConfigError(f"duplicate item in point set: {pts[k][0]}")
    if not pts:
        return Clustering({}, {}, {}, frozenset(), max_radius_km, min_points)

    # lon spans close to 360 degrees may wrap the antimeridian; grid cells
    # do not, so take the exact path.
    lons = [c.lon for _, c in pts]
    index = _GridIndex(pts, max_radius_km)
    if max(lons) - min(lons) > 300.0:
        index.exhaustive = True

    # Hot loop: compare in haversine space (monotone in distance), with
    # radians and cos(lat) hoisted out, instead of calling haversine_km per
    # pair. d <= eps exactly when hav <= sin^2(eps / 2R).
    sin = math.sin
    phi = [math.radians(c.lat) for _, c in pts]
    lam = [math.radians(c.lon) for _, c in pts]
    cph = [math.cos(x) for x in phi]
    h_eps = sin(min(max_radius_km / (2.0 * EARTH_RADIUS_KM), math.pi / 2.0)) ** 2

    def neighborhood(idx: int) -> list[int]:
        p_phi = phi[idx]
        p_lam = lam[idx]
        p_cos = cph[idx]
        hits = []
        for j in index.candidates(pts[idx][1]):
            s1 = sin((phi[j] - p_phi) * 0.5)
            s2 = sin((lam[j] - p_lam) * 0.5)
            if s1 * s1 + p_cos * cph[j] * s2 * s2 <= h_eps:
                hits.append(j)
        hits.sort()
        return hits

    UNVISITED = -2
    labels = [UNVISITED] * len(pts)
    core: list[bool] = [False] * len(pts)
    next_cluster = 0

    for seed in range(len(pts)):
        if labels[seed] != UNVISITED:
            continue
        seed_neighbors = neighborhood(seed)
        if len(seed_neighbors) < min_points:
            labels[seed] = NOISE
            continue
        cid = next_cluster
        next_cluster += 1
        core[seed] = True
        labels[seed] = cid
        queue = list(seed_neighbors)
        qi = 0
        while qi < len(queue):
            j = queue[qi]
            qi += 1
            if labels[j] == NOISE:
                labels[j] = cid  # border point claimed by this cluster
            if labels[j] != UNVISITED:
                continue
            labels[j] = cid
            j_neighbors = neighborhood(j)
            if len(j_neighbors) >= min_points:
                core[j] = True
                queue.extend(j_neighbors)

    assignment: dict[int, int] = {}
    members: dict[int, list[int]] = {}
    for idx, (item, _) in enumerate(pts):
        cid = labels[idx]
        assignment[item] = cid
        if cid != NOISE:
            members.setdefault(cid, []).append(item)
    item_coord = {item: c for item, c in pts}
    centroids = {
        cid: centroid([item_coord[i] for i in items]) for cid, items in members.items()
    }
    core_items = frozenset(pts[idx][0] for idx in range(len(pts)) if core[idx])
    return Clustering(
        assignment=assignment,
        members=members,
        centroids=centroids,
        core_items=core_items,
        max_radius_km=max_radius_km,
        min_points=min_points,
        item_coord=item_coord,
    )


def item_to_unit(clustering: Clustering, item: int) -> int | None:
    """Map an item to its recommendation unit; None for noise or unknown."""
    return clustering.unit_of(item)
