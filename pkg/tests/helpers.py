"""Shared test utilities: naive reference implementations and fixture builders.

The naive implementations deliberately mirror the pinned iteration orders of
the real code (ascending ids everywhere) so comparisons can be exact, not
approximate.
"""
from __future__ import annotations

import random

from georec.clustering import NOISE
from georec.data import Dataset, EventRecord, GeoContext, ingest
from georec.geo import BoundingBox, Coordinate, haversine_km
from georec.graph import NodeRef, RelationalGraph
from georec.partonomy import Partonomy, PartonomyNode
from georec.units import UnitIndex


def box(s: float, w: float, n: float, e: float) -> BoundingBox:
    return BoundingBox(Coordinate(s, w), Coordinate(n, e))


def city(cid: str, s: float, w: float, n: float, e: float) -> GeoContext:
    return GeoContext(cid, name=cid, region=box(s, w, n, e))


def ev(user: str, item: str, lat: float, lon: float, context: str | None = None) -> EventRecord:
    return EventRecord(user=user, item=item, location=Coordinate(lat, lon), context=context)


def brute_dbscan(points, eps: float, min_points: int) -> dict[int, int]:
    """Textbook DBSCAN by exhaustive pairwise distances, visiting seeds in
    ascending id order and letting the first expanding cluster keep any
    shared border point. Returns the full assignment including noise."""
    coord = dict(points)
    ids = sorted(coord)
    neigh = {
        i: [j for j in ids if haversine_km(coord[i], coord[j]) <= eps]
        for i in ids
    }
    labels: dict[int, int] = {}
    cid = 0
    for i in ids:
        if i in labels or len(neigh[i]) < min_points:
            continue
        labels[i] = cid
        queue = [j for j in neigh[i] if j != i]
        while queue:
            j = queue.pop(0)
            if j in labels:
                continue
            labels[j] = cid
            if len(neigh[j]) >= min_points:
                queue.extend(k for k in neigh[j] if k not in labels)
        cid += 1
    return {i: labels.get(i, NOISE) for i in ids}


def check_density_valid(points, eps: float, min_points: int, assignment) -> None:
    """Structural DBSCAN postconditions that hold regardless of border ties."""
    coord = dict(points)
    ids = sorted(coord)
    neigh = {
        i: [j for j in ids if haversine_km(coord[i], coord[j]) <= eps]
        for i in ids
    }
    cores = {i for i in ids if len(neigh[i]) >= min_points}
    for i in ids:
        label = assignment[i]
        core_hits = [j for j in neigh[i] if j in cores]
        if label == NOISE:
            assert not core_hits, f"noise point {i} sits within eps of a core point"
        else:
            assert any(assignment[j] == label for j in core_hits), (
                f"point {i} in cluster {label} has no core of that cluster within eps"
            )
    for i in cores:
        assert assignment[i] != NOISE, f"core point {i} labelled noise"


def naive_recommend(
    graph: RelationalGraph,
    dataset: Dataset,
    unit_index: UnitIndex,
    scheme,
    v: NodeRef,
    n: int,
    backfill: bool,
) -> list[tuple[int, float, bool]]:
    """Verbatim scoring loop: accumulate each neighbor's edge weight onto
    every unit of that neighbor, drop the querying node's own units and
    non-positive scores, rank, then optionally backfill by popularity."""
    scores: dict[int, float] = {}
    for v2 in graph.neighbors(v):
        w = scheme.weight(v, v2)
        for unit in unit_index.user_units_sorted(v2.user, v2.context):
            scores[unit] = scores.get(unit, 0.0) + w
    own = unit_index.user_units(v.user, v.context)
    scored = [u for u, s in scores.items() if s > 0.0 and u not in own]
    scored.sort(key=lambda u: (-scores[u], -unit_index.global_popularity(u), u))
    out = [(u, scores[u], False) for u in scored[:n]]
    if backfill and len(out) < n:
        listed = {u for u, _, _ in out}
        pool = [
            u
            for u in unit_index.units_in_context(v.context)
            if u not in own and u not in listed
        ]
        pool.sort(
            key=lambda u: (
                -unit_index.context_popularity(v.context, u),
                -unit_index.global_popularity(u),
                u,
            )
        )
        out.extend((u, 0.0, True) for u in pool[: n - len(out)])
    return out


def popularity_rank(unit_index: UnitIndex, context: int, own: frozenset[int]) -> list[int]:
    """Context-popularity ranking over units the user does not already hold."""
    pool = [u for u in unit_index.units_in_context(context) if u not in own]
    pool.sort(
        key=lambda u: (
            -unit_index.context_popularity(context, u),
            -unit_index.global_popularity(u),
            u,
        )
    )
    return pool


class FixedWeight:
    """Every neighbor gets the same constant weight."""

    scheme = "fixed"
    symmetric = True

    def __init__(self, value: float) -> None:
        self.value = value

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        return self.value


class RandomWeight:
    """Deterministic pseudo-random weight per ordered node pair."""

    scheme = "rand"
    symmetric = False

    def __init__(self, seed: int) -> None:
        self.seed = seed

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        r = random.Random(f"{self.seed}:{v.user}:{v.context}:{v2.user}:{v2.context}")
        return r.random()


class ScaledWeight:
    """Wraps another weight function, multiplying every value by a constant."""

    def __init__(self, inner, factor: float) -> None:
        self.inner = inner
        self.factor = factor
        self.scheme = f"{inner.scheme}*{factor}"
        self.symmetric = inner.symmetric

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        return self.inner.weight(v, v2) * self.factor


def two_level_partonomy(context_ids: list[str], root: str = "world") -> Partonomy:
    """Root at layer 2 with one layer-1 node per context id."""
    p = Partonomy()
    p.add_node(PartonomyNode(root, root, 2))
    for cid in context_ids:
        p.add_node(PartonomyNode(cid, cid, 1))
        p.add_edge(root, cid)
    p.finalize()
    return p


def random_instance(rng: random.Random, max_users: int = 20, max_units: int = 15):
    """Small random dataset for oracle comparisons.

    Returns (dataset, partonomy, cluster_mode). In cluster mode the items
    are unique per event and scatter tightly around a few well-separated
    sites, so DBSCAN at 1 km recovers one unit per busy site. In item mode
    a small item pool is reused across users.
    """
    n_ctx = rng.choice([1, 2])
    contexts = [city(f"g{j}", -0.5, 4.0 * j - 0.5, 0.5, 4.0 * j + 0.5) for j in range(n_ctx)]
    cluster_mode = rng.random() < 0.5
    n_users = rng.randint(2, max_users)
    events: list[EventRecord] = []
    sites: dict[int, list[tuple[float, float]]] = {}
    pools: dict[int, list[str]] = {}
    for j in range(n_ctx):
        if cluster_mode:
            k = rng.randint(2, min(6, max_units))
            sites[j] = [(0.0, 4.0 * j - 0.4 + 0.1 * s) for s in range(k)]
        else:
            k = rng.randint(2, max_units)
            pools[j] = [f"i{j}_{s}" for s in range(k)]
    serial = 0
    for u in range(n_users):
        for j in range(n_ctx):
            if u > 0 and n_ctx > 1 and rng.random() < 0.25:
                continue
            for _ in range(rng.randint(1, 5)):
                if cluster_mode:
                    lat0, lon0 = rng.choice(sites[j])
                    lat = lat0 + rng.uniform(-0.002, 0.002)
                    lon = lon0 + rng.uniform(-0.002, 0.002)
                    events.append(ev(f"u{u}", f"p{serial}", lat, lon))
                    serial += 1
                else:
                    item = rng.choice(pools[j])
                    events.append(ev(f"u{u}", item, 0.0, 4.0 * j))
    dataset = ingest(events, contexts)
    partonomy = two_level_partonomy([c.id for c in contexts])
    return dataset, partonomy, cluster_mode
