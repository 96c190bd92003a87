"""One built model over one dataset, answering recommendation queries.

Bundles the clustering, unit index, graph, partonomy weights and a cache of
weighting schemes so callers (CLI, service) deal in external ids only.
Unknown users are served as cold-start queries against the requested
context instead of erroring: they carry no history, so history-based
weights degrade gracefully and backfill still produces a list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .clustering import Clustering, dbscan
from .data import Dataset
from .errors import ConfigError
from .graph import NodeRef, RelationalGraph, build_graph
from .partonomy import (
    Partonomy,
    UserFootprint,
    attach_clusters,
    build_footprints,
    build_information,
)
from .recommend import recommend
from .units import UnitIndex
from .weighting import SCHEMES, EdgeWeightFn, build_scheme

UNKNOWN_USER = -1


@dataclass
class Engine:
    dataset: Dataset
    unit_index: UnitIndex
    graph: RelationalGraph
    clustering: Clustering | None = None
    partonomy: Partonomy | None = None
    footprints: UserFootprint | None = None
    cf_scope: str = "all"
    binary_profiles: bool = True
    tl_layer: int = 1
    _schemes: dict[str, EdgeWeightFn] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        dataset: Dataset,
        cluster_units: bool = True,
        max_radius_km: float = 1.0,
        min_points: int = 3,
        partonomy: Partonomy | None = None,
        cf_scope: str = "all",
        binary_profiles: bool = True,
        tl_layer: int = 1,
    ) -> "Engine":
        clustering = None
        if cluster_units:
            clustering = dbscan(
                dict(dataset.item_coord),
                max_radius_km=max_radius_km,
                min_points=min_points,
            )
        unit_index = UnitIndex(dataset, clustering)
        footprints = None
        p = None
        if partonomy is not None:
            p = partonomy.bare_copy()
            if clustering is not None:
                attach_clusters(p, clustering, dataset)
            footprints = build_footprints(p, dataset, clustering)
            build_information(p, footprints)
        return cls(
            dataset=dataset,
            unit_index=unit_index,
            graph=build_graph(dataset),
            clustering=clustering,
            partonomy=p,
            footprints=footprints,
            cf_scope=cf_scope,
            binary_profiles=binary_profiles,
            tl_layer=tl_layer,
        )

    def scheme(self, name: str) -> EdgeWeightFn:
        if name not in SCHEMES:
            raise ConfigError(f"unknown weighting scheme: {name!r}")
        if name in ("ic", "tl", "cf-tl") and self.clustering is None:
            raise ConfigError(f"scheme {name!r} needs cluster units")
        fn = self._schemes.get(name)
        if fn is None:
            fn = build_scheme(
                name,
                self.dataset,
                self.unit_index,
                partonomy=self.partonomy,
                footprints=self.footprints,
                cf_scope=self.cf_scope,
                binary_profiles=self.binary_profiles,
                tl_layer=self.tl_layer,
            )
            self._schemes[name] = fn
        return fn

    def recommend_for(
        self,
        user: str,
        context: str,
        scheme: str = "mp",
        n: int = 10,
        backfill: bool = True,
    ) -> dict[str, Any]:
        g = self.dataset.context_of(context)
        u = self.dataset.users.get(user)
        v = NodeRef(UNKNOWN_USER if u is None else u, g)
        rec = recommend(
            self.graph, self.dataset, self.unit_index, self.scheme(scheme),
            v, n, backfill=backfill,
        )
        return {
            "user": user,
            "context": context,
            "scheme": scheme,
            "items": [
                {
                    "unit": self.unit_index.unit_label(e.unit),
                    "score": e.score,
                    "backfilled": e.backfilled,
                }
                for e in rec.entries
            ],
        }
