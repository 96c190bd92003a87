"""The relational graph over distinct (user, context) pairs.

Nodes sharing a context form a clique, so edges are kept implicit as
per-context node lists: materializing them would be quadratic per context.
Edge weights are computed lazily per query by the weighting schemes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import Dataset


@dataclass(frozen=True, order=True)
class NodeRef:
    """A (user, context) vertex, in dense interned indices. A NodeRef may
    also denote a virtual query node for a cold-start user who declared
    interest in a context without any recorded activity there."""

    user: int
    context: int


class RelationalGraph:
    """Immutable adjacency view: neighbors of a node are all other nodes in
    the same context, ordered by ascending user index."""

    def __init__(self, by_context: dict[int, list[NodeRef]]):
        self._by_context = {g: tuple(nodes) for g, nodes in by_context.items()}

    @property
    def contexts(self) -> frozenset[int]:
        return frozenset(self._by_context)

    def nodes(self) -> list[NodeRef]:
        return [v for nodes in self._by_context.values() for v in nodes]

    def __contains__(self, v: NodeRef) -> bool:
        return v in set(self._by_context.get(v.context, ()))

    def context_nodes(self, context: int) -> tuple[NodeRef, ...]:
        return self._by_context.get(context, ())

    def neighbors(self, v: NodeRef) -> list[NodeRef]:
        """All nodes sharing v's context, except v itself. Empty for unknown
        contexts. For a virtual query node this is every resident node."""
        return [n for n in self._by_context.get(v.context, ()) if n.user != v.user]


def build_graph(dataset: Dataset) -> RelationalGraph:
    by_context: dict[int, list[NodeRef]] = {}
    for u, g in dataset.nodes():
        by_context.setdefault(g, []).append(NodeRef(u, g))
    for nodes in by_context.values():
        nodes.sort()
    return RelationalGraph(by_context)
