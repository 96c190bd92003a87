"""Weighted neighbor voting: every neighbor adds its edge weight to each
unit it selected, and the top scorers the query user hasn't already picked
come back, optionally padded with in-context bestsellers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import Dataset
from .errors import ConfigError, DataError
from .graph import NodeRef, RelationalGraph
from .units import UnitIndex
from .weighting import EdgeWeightFn


@dataclass(frozen=True)
class RecEntry:
    unit: int
    score: float
    backfilled: bool = False


@dataclass(frozen=True)
class RecommendationList:
    query: NodeRef
    scheme: str
    n: int
    entries: tuple[RecEntry, ...] = field(default_factory=tuple)

    def units(self) -> tuple[int, ...]:
        return tuple(e.unit for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def score_all(
    graph: RelationalGraph,
    dataset: Dataset,
    unit_index: UnitIndex,
    scheme: EdgeWeightFn,
    v: NodeRef,
) -> dict[int, float]:
    """Accumulated vote per unit over v's neighborhood. Sparse: units no
    neighbor selected are absent (an all-zero-weight neighborhood still
    yields explicit zeros). Neighbor order is fixed, so sums are
    reproducible bit for bit."""
    if v.context not in graph.contexts:
        name = dataset.contexts.key(v.context) if v.context < len(dataset.contexts) else v.context
        raise DataError(f"context has no activity: {name!r}")
    scores: dict[int, float] = {}
    for v2 in graph.neighbors(v):
        w = scheme.weight(v, v2)
        for unit in unit_index.user_units_sorted(v2.user, v2.context):
            scores[unit] = scores.get(unit, 0.0) + w
    return scores


def recommend(
    graph: RelationalGraph,
    dataset: Dataset,
    unit_index: UnitIndex,
    scheme: EdgeWeightFn,
    v: NodeRef,
    n: int,
    backfill: bool = False,
) -> RecommendationList:
    """Top-n positively scored units of v's context, minus the user's own
    selections. With ``backfill``, short lists are padded with the most
    popular remaining units at score 0.

    Ties break by global popularity (descending) then unit id; backfill
    ranks by in-context popularity first. Both orders are total, so output
    is deterministic.
    """
    if n < 1:
        raise ConfigError(f"n must be positive: {n}")
    scores = score_all(graph, dataset, unit_index, scheme, v)
    own = unit_index.user_units(v.user, v.context)
    scored = [(u, s) for u, s in scores.items() if s > 0.0 and u not in own]
    scored.sort(key=lambda t: (-t[1], -unit_index.global_popularity(t[0]), t[0]))
    entries = [RecEntry(unit, score) for unit, score in scored[:n]]
    if backfill and len(entries) < n:
        listed = {e.unit for e in entries}
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
        entries.extend(RecEntry(u, 0.0, backfilled=True) for u in pool[: n - len(entries)])
    return RecommendationList(query=v, scheme=scheme.scheme, n=n, entries=tuple(entries))
