"""Hierarchical part-of graph over geographic contexts, with inverse
popularity information weights and the similarity measures built on them.

The hierarchy is a forest with consecutive layers (0 = leaves). Interior
layers (country / state / city) come from a JSON file; leaf nodes are DBSCAN
clusters attached under the city whose region contains the cluster centroid.
City nodes tie into a dataset by sharing ids with its geographic contexts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .clustering import Clustering
from .data import Dataset
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)


def cluster_node_id(cluster: int) -> str:
    return f"cluster:{cluster}"


@dataclass
class PartonomyNode:
    id: str
    name: str
    layer: int
    children: list[str] = field(default_factory=list)
    parent: str | None = None


class Partonomy:
    """Forest of geographic contexts with part-of edges and information
    weights. Mutating methods are build steps; treat instances as immutable
    once information weights are in place."""

    def __init__(self) -> None:
        self.nodes: dict[str, PartonomyNode] = {}
        self.roots: list[str] = []
        self.information: dict[str, float] = {}

    def add_node(self, node: PartonomyNode) -> None:
        if node.id in self.nodes:
            raise DataError(f"duplicate partonomy node: {node.id!r}")
        self.nodes[node.id] = node

    def add_edge(self, parent: str, child: str) -> None:
        p, c = self.nodes[parent], self.nodes[child]
        if c.parent is not None:
            raise DataError(f"partonomy node {child!r} already has a parent")
        if p.layer != c.layer + 1:
            raise DataError(
                f"partonomy layers must be consecutive: {parent!r} (layer {p.layer}) "
                f"-> {child!r} (layer {c.layer})"
            )
        p.children.append(child)
        c.parent = parent

    def finalize(self) -> None:
        self.roots = sorted(nid for nid, n in self.nodes.items() if n.parent is None)
        for n in self.nodes.values():
            n.children.sort()

    def layer_nodes(self, layer: int) -> list[str]:
        return sorted(nid for nid, n in self.nodes.items() if n.layer == layer)

    @property
    def max_layer(self) -> int:
        return max((n.layer for n in self.nodes.values()), default=0)

    def children_of(self, node: str) -> list[str]:
        return self.nodes[node].children

    def ancestors(self, node: str) -> Iterable[str]:
        parent = self.nodes[node].parent
        while parent is not None:
            yield parent
            parent = self.nodes[parent].parent

    def bare_copy(self) -> "Partonomy":
        """Structure-only copy without cluster leaves or information
        weights; the starting point for a per-split rebuild."""
        out = Partonomy()
        keep = {nid for nid, n in self.nodes.items() if n.layer > 0}
        for nid in keep:
            n = self.nodes[nid]
            out.add_node(PartonomyNode(id=n.id, name=n.name, layer=n.layer))
        for nid in keep:
            for child in self.nodes[nid].children:
                if child in keep:
                    out.add_edge(nid, child)
        out.finalize()
        return out

    @classmethod
    def from_json(cls, path: str | Path) -> "Partonomy":
        """Load the interior forest from a JSON array of nested
        ``{id, name, layer, children: [...]}`` objects."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read partonomy file: {path}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"bad JSON in partonomy file {path}: {exc}") from exc
        if not isinstance(raw, list):
            raise DataError(f"partonomy file must hold a JSON array: {path}")
        p = cls()

        def walk(obj: dict, parent: str | None) -> None:
            try:
                node = PartonomyNode(
                    id=str(obj["id"]),
                    name=str(obj.get("name", "")),
                    layer=int(obj["layer"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"bad partonomy node in {path}: {obj!r} ({exc})") from exc
            if node.layer < 1:
                raise DataError(f"partonomy file nodes must sit above layer 0: {obj['id']!r}")
            p.add_node(node)
            if parent is not None:
                p.add_edge(parent, node.id)
            for child in obj.get("children", []):
                walk(child, node.id)

        for root in raw:
            walk(root, None)
        p.finalize()
        return p

    def to_json_obj(self) -> list[dict]:
        def emit(nid: str) -> dict:
            n = self.nodes[nid]
            return {
                "id": n.id,
                "name": n.name,
                "layer": n.layer,
                "children": [emit(c) for c in n.children if self.nodes[c].layer > 0],
            }

        return [emit(r) for r in self.roots]


def attach_clusters(p: Partonomy, clustering: Clustering, dataset: Dataset) -> Partonomy:
    """Attach cluster leaf nodes under the layer-1 node whose context region
    contains the cluster centroid. Clusters falling in no (or an unknown)
    city stay unattached and contribute nothing."""
    cities = [nid for nid in p.layer_nodes(1)]
    regions = {}
    for nid in cities:
        g = dataset.contexts.get(nid)
        ctx = dataset.context_defs.get(g) if g is not None else None
        if ctx is not None and ctx.region is not None:
            regions[nid] = ctx.region
    for cid in sorted(clustering.members):
        center = clustering.centroids[cid]
        hits = sorted(nid for nid, region in regions.items() if region.contains(center))
        if not hits:
            log.debug("cluster %d centroid falls in no partonomy city; left unattached", cid)
            continue
        if len(hits) > 1:
            log.warning(
                "cluster %d centroid falls in several cities (%s); attaching to %s",
                cid,
                ", ".join(hits),
                hits[0],
            )
        leaf = PartonomyNode(id=cluster_node_id(cid), name=cluster_node_id(cid), layer=0)
        p.add_node(leaf)
        p.add_edge(hits[0], leaf.id)
    p.finalize()
    return p


class UserFootprint:
    """Per user, the partonomy nodes whose subtree holds at least one of the
    user's triples; A_g is then the active subset of g's children."""

    def __init__(self, partonomy: Partonomy, active: dict[int, frozenset[str]]):
        self.partonomy = partonomy
        self.active = active
        self._children_cache: dict[tuple[int, str], frozenset[str]] = {}

    def children_at(self, user: int, node: str) -> frozenset[str]:
        """Children of ``node`` in which the user selected items."""
        key = (user, node)
        cached = self._children_cache.get(key)
        if cached is None:
            user_active = self.active.get(user, frozenset())
            cached = frozenset(
                c for c in self.partonomy.children_of(node) if c in user_active
            )
            self._children_cache[key] = cached
        return cached


def build_footprints(
    p: Partonomy, dataset: Dataset, clustering: Clustering | None = None
) -> UserFootprint:
    """Derive each user's active node set: context nodes via triple contexts,
    cluster leaves via item assignments, ancestors transitively."""
    active: dict[int, set[str]] = {}

    def touch(user: int, node_id: str) -> None:
        nodes = active.setdefault(user, set())
        if node_id in nodes:
            return
        nodes.add(node_id)
        for anc in p.ancestors(node_id):
            if anc in nodes:
                break
            nodes.add(anc)

    context_node: dict[int, str | None] = {}
    for (u, g), items in dataset.user_context_items.items():
        if g not in context_node:
            ext = dataset.contexts.key(g)
            context_node[g] = ext if ext in p.nodes else None
        ctx_node = context_node[g]
        if ctx_node is not None:
            touch(u, ctx_node)
        if clustering is not None:
            for i in items:
                cid = clustering.unit_of(i)
                if cid is None:
                    continue
                leaf = cluster_node_id(cid)
                if leaf in p.nodes:
                    touch(u, leaf)
    return UserFootprint(p, {u: frozenset(nodes) for u, nodes in active.items()})


def build_information(p: Partonomy, footprints: UserFootprint) -> Partonomy:
    """information(c) = 1 / (distinct users active in c's subtree); nodes
    nobody visited get 0 and contribute nothing to the similarity sums."""
    counts: dict[str, int] = {nid: 0 for nid in p.nodes}
    for nodes in footprints.active.values():
        for nid in nodes:
            counts[nid] += 1
    p.information = {
        nid: (1.0 / n if n > 0 else 0.0) for nid, n in counts.items()
    }
    return p


def sim_inf(user: int, other: int, node: str, p: Partonomy, f: UserFootprint) -> float:
    """Information-weighted overlap of the two users' child footprints at a
    node: rarer shared children count for more. In [0, 1]; 0 when the union
    carries no information."""
    a = f.children_at(user, node)
    b = f.children_at(other, node)
    info = p.information
    denom = sum(info[c] for c in sorted(a | b))
    if denom <= 0.0:
        return 0.0
    num = sum(info[c] for c in sorted(a & b))
    return num / denom


def sim_two_layer(
    user: int, other: int, layer_index: int, p: Partonomy, f: UserFootprint
) -> float:
    """User similarity at a partonomy layer, the information-weighted mean
    of per-node child-footprint overlaps one layer below."""
    if layer_index < 1 or layer_index > p.max_layer:
        raise ConfigError(
            f"layer index must be within [1, {p.max_layer}]: {layer_index}"
        )
    info = p.information
    nodes = p.layer_nodes(layer_index)
    denom = sum(info.get(g, 0.0) for g in nodes)
    if denom <= 0.0:
        return 0.0
    num = 0.0
    for g in nodes:
        w = info.get(g, 0.0)
        if w <= 0.0:
            continue
        s = sim_inf(user, other, g, p, f)
        if s > 0.0:
            num += s * w
    return num / denom
