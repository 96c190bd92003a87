"""Implicit-feedback dataset: identifier interning, geographic contexts,
ingestion of geotagged selection events, and the index structures every
recommender variant reads from.

A dataset is immutable once built; all query-time structures (graph, unit
index, profiles) are derived from it without further mutation, so concurrent
readers are safe.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import DataError
from .geo import DEGENERATE_KM, BoundingBox, Coordinate

log = logging.getLogger(__name__)

EVENTS_CSV_HEADER = ["user_id", "item_id", "lat", "lon", "context_id", "timestamp"]


class Interner:
    """Bijection between external identifiers and dense indices."""

    __slots__ = ("_index", "_keys")

    def __init__(self) -> None:
        self._index: dict[str, int] = {}
        self._keys: list[str] = []

    def intern(self, key: str) -> int:
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._keys)
            self._index[key] = idx
            self._keys.append(key)
        return idx

    def get(self, key: str) -> int | None:
        return self._index.get(key)

    def key(self, index: int) -> str:
        return self._keys[index]

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def keys(self) -> Sequence[str]:
        return tuple(self._keys)


@dataclass(frozen=True)
class GeoContext:
    """A declared geographic region of interest.

    ``region`` may be None for contexts known only from declared ids in the
    event stream; such contexts cannot auto-assign events or provide d_max.
    """

    id: str
    name: str = ""
    region: BoundingBox | None = None

    def d_max_km(self) -> float:
        """Maximal possible distance between points of the region: the
        corner-to-corner diagonal of its bounding box."""
        if self.region is None:
            raise DataError(f"context {self.id!r} has no region definition")
        d = self.region.diagonal_km()
        if d < DEGENERATE_KM:
            raise DataError(f"degenerate context region: {self.id!r}")
        return d


@dataclass(frozen=True)
class EventRecord:
    """One implicit-feedback observation: a user selected an item at a
    coordinate, optionally inside a declared context."""

    user: str
    item: str
    location: Coordinate
    context: str | None = None
    timestamp: str | None = None


@dataclass
class Dataset:
    """The ternary relation of (user, context, item) selections plus the
    indexes derived from it. All ids below are dense interned indices.

    Duplicate (user, context, item) triples collapse into one triple with a
    retained event count, so weighting schemes may choose binary or count
    semantics.
    """

    users: Interner
    items: Interner
    contexts: Interner
    context_defs: dict[int, GeoContext]
    events: list[EventRecord]
    triple_counts: dict[tuple[int, int, int], int]
    items_in_context: dict[int, set[int]]
    user_context_items: dict[tuple[int, int], set[int]]
    item_coord: dict[int, Coordinate]
    popularity: dict[int, int]
    rejected: list[tuple[EventRecord, str]] = field(default_factory=list)

    @property
    def triples(self) -> set[tuple[int, int, int]]:
        return set(self.triple_counts)

    def user_items(self, user: int, context: int) -> frozenset[int]:
        """I_{u,g}: items the user selected within the context."""
        return frozenset(self.user_context_items.get((user, context), ()))

    def context_items(self, context: int) -> frozenset[int]:
        """I_g: items selected within the context."""
        return frozenset(self.items_in_context.get(context, ()))

    def context_users(self, context: int) -> set[int]:
        return {u for (u, g) in self.user_context_items if g == context}

    def nodes(self) -> Iterator[tuple[int, int]]:
        """Distinct (user, context) pairs with at least one triple."""
        return iter(self.user_context_items)

    def context_of(self, external_id: str) -> int:
        g = self.contexts.get(external_id)
        if g is None:
            raise DataError(f"unknown context: {external_id!r}")
        return g

    def context_scale_km(self, context: int) -> float:
        """Corner-to-corner extent of the context's declared region."""
        ctx = self.context_defs.get(context)
        if ctx is None:
            raise DataError(f"context has no declared region: {self.contexts.key(context)!r}")
        return ctx.d_max_km()

    def without_triples(self, hidden: set[tuple[int, int, int]]) -> "Dataset":
        """A new dataset with the given triples (and their events) removed.

        Interners are shared, so dense indices stay comparable between the
        original and the reduced dataset; hidden items simply vanish from
        the index structures.
        """
        kept = [
            e
            for e in self.events
            if _event_triple(self, e) not in hidden
        ]
        return _index_events(kept, self.users, self.items, self.contexts, self.context_defs)


def _event_triple(d: Dataset, e: EventRecord) -> tuple[int, int, int]:
    u = d.users.intern(e.user)
    i = d.items.intern(e.item)
    g = _resolve_context(d.contexts, d.context_defs, e)
    if g is None:
        return (-1, -1, -1)
    return (u, g, i)


def _resolve_context(
    contexts: Interner, defs: dict[int, GeoContext], e: EventRecord
) -> int | None:
    if e.context is not None:
        return contexts.get(e.context)
    hits = [
        g
        for g, ctx in defs.items()
        if ctx.region is not None and ctx.region.contains(e.location)
    ]
    if len(hits) == 1:
        return hits[0]
    return None


def ingest(events: Iterable[EventRecord], contexts: Sequence[GeoContext]) -> Dataset:
    """Build a Dataset from raw events and declared contexts.

    An event either declares a context id or must fall inside exactly one
    context region; otherwise it is rejected with a per-record diagnostic
    and ingestion continues. Declared context ids are accepted even without
    a region definition.
    """
    users = Interner()
    items = Interner()
    ctx_interner = Interner()
    context_defs: dict[int, GeoContext] = {}
    for ctx in contexts:
        g = ctx_interner.intern(ctx.id)
        if g in context_defs:
            raise DataError(f"duplicate context id: {ctx.id!r}")
        context_defs[g] = ctx

    accepted: list[EventRecord] = []
    rejected: list[tuple[EventRecord, str]] = []
    for e in events:
        if e.context is not None:
            ctx_interner.intern(e.context)
            accepted.append(e)
            continue
        hits = [
            g
            for g, ctx in context_defs.items()
            if ctx.region is not None and ctx.region.contains(e.location)
        ]
        if len(hits) == 1:
            accepted.append(e)
        elif not hits:
            rejected.append((e, "no context contains the event location"))
        else:
            names = ", ".join(sorted(context_defs[g].id for g in hits))
            rejected.append((e, f"location falls in multiple contexts: {names}"))

    for e, reason in rejected:
        log.warning("rejected event user=%s item=%s: %s", e.user, e.item, reason)

    d = _index_events(accepted, users, items, ctx_interner, context_defs)
    d.rejected = rejected
    return d


def _index_events(
    events: list[EventRecord],
    users: Interner,
    items: Interner,
    contexts: Interner,
    context_defs: dict[int, GeoContext],
) -> Dataset:
    triple_counts: dict[tuple[int, int, int], int] = {}
    items_in_context: dict[int, set[int]] = {}
    user_context_items: dict[tuple[int, int], set[int]] = {}
    item_coord: dict[int, Coordinate] = {}
    item_users: dict[int, set[int]] = {}

    for e in events:
        u = users.intern(e.user)
        i = items.intern(e.item)
        g = _resolve_context(contexts, context_defs, e)
        if g is None:
            # Unresolvable events are filtered before indexing; this only
            # triggers when a caller bypasses ingest() with bad records.
            raise DataError(f"event has no resolvable context: user={e.user} item={e.item}")
        key = (u, g, i)
        triple_counts[key] = triple_counts.get(key, 0) + 1
        items_in_context.setdefault(g, set()).add(i)
        user_context_items.setdefault((u, g), set()).add(i)
        item_coord.setdefault(i, e.location)
        item_users.setdefault(i, set()).add(u)

    popularity = {i: len(us) for i, us in item_users.items()}
    return Dataset(
        users=users,
        items=items,
        contexts=contexts,
        context_defs=context_defs,
        events=list(events),
        triple_counts=triple_counts,
        items_in_context=items_in_context,
        user_context_items=user_context_items,
        item_coord=item_coord,
        popularity=popularity,
    )


def read_events_csv(path: str | Path) -> list[EventRecord]:
    """Read events from a UTF-8 CSV with header
    ``user_id,item_id,lat,lon,context_id,timestamp``; context_id and
    timestamp may be empty. Malformed rows are logged and skipped."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read events file: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"events file is empty: {path}") from None
        if [h.strip() for h in header] != EVENTS_CSV_HEADER:
            raise DataError(
                f"bad events header in {path}: expected {','.join(EVENTS_CSV_HEADER)}"
            )
        out: list[EventRecord] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                user, item, lat, lon, ctx, ts = row
                record = EventRecord(
                    user=user,
                    item=item,
                    location=Coordinate(float(lat), float(lon)),
                    context=ctx or None,
                    timestamp=ts or None,
                )
            except (ValueError, TypeError) as exc:
                log.warning("%s:%d skipped malformed row: %s", path, lineno, exc)
                continue
            out.append(record)
        return out


def write_events_csv(events: Iterable[EventRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENTS_CSV_HEADER)
        for e in events:
            writer.writerow(
                [
                    e.user,
                    e.item,
                    repr(e.location.lat),
                    repr(e.location.lon),
                    e.context or "",
                    e.timestamp or "",
                ]
            )


def read_contexts_json(path: str | Path) -> list[GeoContext]:
    """Read contexts from a JSON array of ``{id, name, sw: [lat, lon],
    ne: [lat, lon]}`` objects."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read contexts file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"bad JSON in contexts file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise DataError(f"contexts file must hold a JSON array: {path}")
    out = []
    for obj in raw:
        try:
            region = BoundingBox(
                sw=Coordinate(float(obj["sw"][0]), float(obj["sw"][1])),
                ne=Coordinate(float(obj["ne"][0]), float(obj["ne"][1])),
            )
            out.append(GeoContext(id=str(obj["id"]), name=str(obj.get("name", "")), region=region))
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise DataError(f"bad context object in {path}: {obj!r} ({exc})") from exc
    return out


def write_contexts_json(contexts: Iterable[GeoContext], path: str | Path) -> None:
    payload = []
    for ctx in contexts:
        if ctx.region is None:
            raise DataError(f"context {ctx.id!r} has no region; cannot serialize")
        payload.append(
            {
                "id": ctx.id,
                "name": ctx.name,
                "sw": [ctx.region.sw.lat, ctx.region.sw.lon],
                "ne": [ctx.region.ne.lat, ctx.region.ne.lon],
            }
        )
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
