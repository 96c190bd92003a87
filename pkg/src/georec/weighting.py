"""Edge-weight schemes for the relational graph.

Every recommender variant is the same voting algorithm with a different
w(v,v') plugged in; this module holds the weight functions. All weights are
non-negative and, apart from the cold-start switch, symmetric in their two
arguments (bit-exact: pair terms commute and sums run in sorted key order).
"""

from __future__ import annotations

import math
from typing import Callable

from . import partonomy as pt
from .data import Dataset
from .errors import ConfigError
from .geo import Coordinate, centroid, haversine_km
from .graph import NodeRef
from .units import CLUSTER_UNITS, UnitIndex

CF_SCOPE_CONTEXT = "context"
CF_SCOPE_ALL = "all"

SCHEMES = ("mp", "cf", "geo", "ic", "tl", "cf-tl")
# geo is a building block of ic and rarely useful standalone, so the CLI
# exposes the other five.
CLI_SCHEMES = ("mp", "cf", "ic", "tl", "cf-tl")


class EdgeWeightFn:
    """One weighting scheme bound to the structures it needs. Instances are
    immutable after construction apart from internal memo tables, so they
    may be shared across threads evaluating different neighbors."""

    scheme: str = "?"
    symmetric: bool = True

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        raise NotImplementedError


class UniformWeight(EdgeWeightFn):
    """Every neighbor counts the same; voting reduces to in-context
    popularity."""

    scheme = "mp"

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        return 1.0


class CosineWeight(EdgeWeightFn):
    """Cosine similarity of the two users' unit preference vectors, built
    either from the node's own context only or from all contexts."""

    scheme = "cf"

    def __init__(self, unit_index: UnitIndex, scope: str = CF_SCOPE_ALL,
                 binary: bool = True):
        if scope not in (CF_SCOPE_CONTEXT, CF_SCOPE_ALL):
            raise ConfigError(f"unknown profile scope: {scope!r}")
        self.unit_index = unit_index
        self.scope = scope
        self.binary = binary
        self._counts: dict[tuple[int, int] | int, dict[int, float]] | None = None
        self._norms: dict[tuple[int, int] | int, float] = {}

    def _profile_key(self, v: NodeRef) -> tuple[int, int] | int:
        return (v.user, v.context) if self.scope == CF_SCOPE_CONTEXT else v.user

    def _count_profiles(self) -> dict:
        if self._counts is None:
            # one pass over the dataset instead of a scan per query
            d = self.unit_index.dataset
            counts: dict[tuple[int, int] | int, dict[int, float]] = {}
            for (u, g, i), n in d.triple_counts.items():
                unit = self.unit_index.unit_of_item(i)
                if unit is None:
                    continue
                key = (u, g) if self.scope == CF_SCOPE_CONTEXT else u
                vec = counts.setdefault(key, {})
                vec[unit] = vec.get(unit, 0.0) + n
            self._counts = counts
        return self._counts

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        if self.binary:
            return self._binary(v, v2)
        return self._count(v, v2)

    def _units(self, v: NodeRef) -> frozenset[int]:
        if self.scope == CF_SCOPE_CONTEXT:
            return self.unit_index.user_units(v.user, v.context)
        return self.unit_index.user_units_all(v.user)

    def _binary(self, v: NodeRef, v2: NodeRef) -> float:
        a = self._units(v)
        b = self._units(v2)
        if not a or not b:
            return 0.0
        shared = len(a & b)
        if shared == 0:
            return 0.0
        return shared / math.sqrt(len(a) * len(b))

    def _count(self, v: NodeRef, v2: NodeRef) -> float:
        profiles = self._count_profiles()
        a = profiles.get(self._profile_key(v))
        b = profiles.get(self._profile_key(v2))
        if not a or not b:
            return 0.0
        dot = sum(a[k] * b[k] for k in sorted(a.keys() & b.keys()))
        if dot == 0.0:
            return 0.0
        return dot / (self._norm(self._profile_key(v), a) * self._norm(self._profile_key(v2), b))

    def _norm(self, key, vec: dict[int, float]) -> float:
        n = self._norms.get(key)
        if n is None:
            n = math.sqrt(sum(vec[k] * vec[k] for k in sorted(vec)))
            self._norms[key] = n
        return n


class GeoWeight(EdgeWeightFn):
    """Proximity of the two users' in-context activity centroids, scaled by
    the context's corner-to-corner extent and clamped to [0,1]."""

    scheme = "geo"

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._centroids: dict[tuple[int, int], Coordinate | None] = {}
        self._d_max: dict[int, float] = {}

    def _centroid(self, user: int, context: int) -> Coordinate | None:
        key = (user, context)
        if key not in self._centroids:
            items = self.dataset.user_context_items.get(key)
            if not items:
                self._centroids[key] = None
            else:
                coords = [self.dataset.item_coord[i] for i in sorted(items)]
                self._centroids[key] = centroid(coords)
        return self._centroids[key]

    def _context_d_max(self, context: int) -> float:
        if context not in self._d_max:
            self._d_max[context] = self.dataset.context_scale_km(context)
        return self._d_max[context]

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        a = self._centroid(v.user, v.context)
        b = self._centroid(v2.user, v2.context)
        if a is None or b is None:
            return 0.0
        d_max = self._context_d_max(v.context)
        w = 1.0 - haversine_km(a, b) / d_max
        return min(1.0, max(0.0, w))


class IntraClusterWeight(EdgeWeightFn):
    """Per-cluster centroid proximity summed over clusters both users
    visited, normalized by the number of clusters in the context. Two users
    hitting the same spots in every cluster score shared/total."""

    scheme = "ic"

    def __init__(self, dataset: Dataset, unit_index: UnitIndex):
        if unit_index.mode != CLUSTER_UNITS:
            raise ConfigError("intra-cluster weighting needs cluster units")
        self.dataset = dataset
        self.unit_index = unit_index
        assert unit_index.clustering is not None
        self.d_max_km = 2.0 * unit_index.clustering.max_radius_km
        self._centroids: dict[tuple[int, int], dict[int, Coordinate]] = {}

    def _cluster_centroids(self, user: int, context: int) -> dict[int, Coordinate]:
        key = (user, context)
        cached = self._centroids.get(key)
        if cached is None:
            by_cluster: dict[int, list[Coordinate]] = {}
            for i in sorted(self.dataset.user_context_items.get(key, ())):
                unit = self.unit_index.unit_of_item(i)
                if unit is None:
                    continue
                by_cluster.setdefault(unit, []).append(self.dataset.item_coord[i])
            cached = {c: centroid(pts) for c, pts in by_cluster.items()}
            self._centroids[key] = cached
        return cached

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        total = len(self.unit_index.units_in_context(v.context))
        if total == 0:
            return 0.0
        a = self._cluster_centroids(v.user, v.context)
        b = self._cluster_centroids(v2.user, v2.context)
        if not a or not b:
            return 0.0
        acc = 0.0
        for c in sorted(a.keys() & b.keys()):
            w = 1.0 - haversine_km(a[c], b[c]) / self.d_max_km
            acc += min(1.0, max(0.0, w))
        return acc / total


class TwoLayerWeight(EdgeWeightFn):
    """Partonomy footprint similarity at a fixed layer; rarely-shared
    regions weigh more via inverse-popularity information."""

    scheme = "tl"

    def __init__(self, partonomy: pt.Partonomy, footprints: pt.UserFootprint,
                 layer_index: int = 1):
        if layer_index < 1 or layer_index > partonomy.max_layer:
            raise ConfigError(
                f"layer index must be within [1, {partonomy.max_layer}]: {layer_index}"
            )
        self.partonomy = partonomy
        self.footprints = footprints
        self.layer_index = layer_index
        self._memo: dict[tuple[int, int], float] = {}

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        key = (v.user, v2.user) if v.user <= v2.user else (v2.user, v.user)
        w = self._memo.get(key)
        if w is None:
            w = pt.sim_two_layer(
                key[0], key[1], self.layer_index, self.partonomy, self.footprints
            )
            self._memo[key] = w
        return w


class ColdStartSwitchWeight(EdgeWeightFn):
    """Footprint similarity when the query user has no history in the query
    context, plain all-context cosine otherwise. Asymmetric by design: the
    branch depends on the first argument."""

    scheme = "cf-tl"
    symmetric = False

    def __init__(self, dataset: Dataset, warm: CosineWeight, cold: TwoLayerWeight):
        self.dataset = dataset
        self.warm = warm
        self.cold = cold

    def weight(self, v: NodeRef, v2: NodeRef) -> float:
        if self.dataset.user_items(v.user, v.context):
            return self.warm.weight(v, v2)
        return self.cold.weight(v, v2)


def build_scheme(
    name: str,
    dataset: Dataset,
    unit_index: UnitIndex,
    partonomy: pt.Partonomy | None = None,
    footprints: pt.UserFootprint | None = None,
    cf_scope: str = CF_SCOPE_ALL,
    binary_profiles: bool = True,
    tl_layer: int = 1,
) -> EdgeWeightFn:
    """Construct a weighting scheme by id, checking that the structures it
    relies on were supplied."""
    if name == "mp":
        return UniformWeight()
    if name == "cf":
        return CosineWeight(unit_index, scope=cf_scope, binary=binary_profiles)
    if name == "geo":
        return GeoWeight(dataset)
    if name == "ic":
        return IntraClusterWeight(dataset, unit_index)
    if name in ("tl", "cf-tl"):
        if partonomy is None or footprints is None:
            raise ConfigError(
                f"scheme {name!r} needs a partonomy and user footprints"
            )
        tl = TwoLayerWeight(partonomy, footprints, layer_index=tl_layer)
        if name == "tl":
            return tl
        warm = CosineWeight(unit_index, scope=CF_SCOPE_ALL, binary=binary_profiles)
        return ColdStartSwitchWeight(dataset, warm, tl)
    raise ConfigError(f"unknown weighting scheme: {name!r}")
