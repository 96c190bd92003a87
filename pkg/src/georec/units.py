"""Recommendation units: the entities ranked and returned.

With a clustering supplied, units are DBSCAN cluster ids (point-coordinate
data, where exact coordinates rarely repeat across users); otherwise units
are raw item indices (well-defined POIs). The index also carries the
popularity counts used for tie-breaking and backfill.
"""

from __future__ import annotations

from .clustering import Clustering
from .data import Dataset

ITEM_UNITS = "items"
CLUSTER_UNITS = "clusters"


class UnitIndex:
    """Precomputed item-to-unit mapping plus per-context and global unit
    statistics over one (immutable) dataset."""

    def __init__(self, dataset: Dataset, clustering: Clustering | None = None):
        self.dataset = dataset
        self.clustering = clustering
        self.mode = CLUSTER_UNITS if clustering is not None else ITEM_UNITS

        self._user_units: dict[tuple[int, int], frozenset[int]] = {}
        self._user_units_sorted: dict[tuple[int, int], tuple[int, ...]] = {}
        per_context_users: dict[int, dict[int, set[int]]] = {}
        all_units_by_user: dict[int, set[int]] = {}

        for (u, g), items in dataset.user_context_items.items():
            units = frozenset(
                unit for unit in (self.unit_of_item(i) for i in items) if unit is not None
            )
            self._user_units[(u, g)] = units
            self._user_units_sorted[(u, g)] = tuple(sorted(units))
            ctx = per_context_users.setdefault(g, {})
            for unit in units:
                ctx.setdefault(unit, set()).add(u)
            all_units_by_user.setdefault(u, set()).update(units)

        self._context_popularity: dict[int, dict[int, int]] = {
            g: {unit: len(us) for unit, us in ctx.items()}
            for g, ctx in per_context_users.items()
        }
        self._units_in_context: dict[int, tuple[int, ...]] = {
            g: tuple(sorted(ctx)) for g, ctx in per_context_users.items()
        }
        self._all_units: dict[int, frozenset[int]] = {
            u: frozenset(units) for u, units in all_units_by_user.items()
        }
        global_users: dict[int, set[int]] = {}
        for u, units in all_units_by_user.items():
            for unit in units:
                global_users.setdefault(unit, set()).add(u)
        self._global_popularity = {unit: len(us) for unit, us in global_users.items()}

    def unit_of_item(self, item: int) -> int | None:
        if self.clustering is None:
            return item
        return self.clustering.unit_of(item)

    def units_in_context(self, context: int) -> tuple[int, ...]:
        """Units with at least one selection in the context, ascending."""
        return self._units_in_context.get(context, ())

    def user_units(self, user: int, context: int) -> frozenset[int]:
        """Units of I_{u,g}."""
        return self._user_units.get((user, context), frozenset())

    def user_units_sorted(self, user: int, context: int) -> tuple[int, ...]:
        return self._user_units_sorted.get((user, context), ())

    def user_units_all(self, user: int) -> frozenset[int]:
        """Units the user selected in any context."""
        return self._all_units.get(user, frozenset())

    def context_popularity(self, context: int, unit: int) -> int:
        """Distinct users who selected the unit within the context."""
        return self._context_popularity.get(context, {}).get(unit, 0)

    def global_popularity(self, unit: int) -> int:
        """Distinct users who selected the unit in any context."""
        return self._global_popularity.get(unit, 0)

    def profile(self, user: int, context: int | None, binary: bool = True) -> dict[int, float]:
        """Preference vector over units: in-context when a context is given,
        across all contexts otherwise. Binary profiles mark presence with
        1.0; count profiles sum retained event counts."""
        d = self.dataset
        if context is not None:
            pairs = [(user, context)] if (user, context) in d.user_context_items else []
        else:
            pairs = [key for key in d.user_context_items if key[0] == user]
        out: dict[int, float] = {}
        for u, g in pairs:
            for i in d.user_context_items[(u, g)]:
                unit = self.unit_of_item(i)
                if unit is None:
                    continue
                if binary:
                    out[unit] = 1.0
                else:
                    out[unit] = out.get(unit, 0.0) + d.triple_counts[(u, g, i)]
        return out

    def unit_label(self, unit: int) -> str | int:
        """External form of a unit: the item's external id or the cluster id."""
        if self.clustering is None:
            return self.dataset.items.key(unit)
        return unit
