"""Synthetic check-in generator with recoverable structure.

Cities are disjoint boxes along the equator, each holding a grid of sites
spaced far enough apart that every site becomes its own density cluster.
Users belong to archetypes whose preferred sites repeat across cities (the
cross-context signal), everybody drops by a few hub sites (popularity
noise), and a concentration knob blends archetype preference into uniform
wandering. All draws flow from one seeded generator in a fixed order, so a
seed pins the dataset byte for byte.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from datetime import datetime, timedelta

from .data import Dataset, EventRecord, GeoContext, ingest
from .errors import ConfigError
from .geo import KM_PER_DEG_LAT, BoundingBox, Coordinate
from .partonomy import Partonomy, PartonomyNode

PHOTOS = "photos"      # every event is a fresh item at a jittered position
PROVIDERS = "providers"  # events reference shared per-site items

CITY_SPACING_DEG = 2.0
BOX_MARGIN_DEG = 0.02


@dataclass(frozen=True)
class SynthConfig:
    n_contexts: int = 4
    sites_per_context: int = 24
    hub_sites: int = 3
    n_users: int = 400
    n_archetypes: int = 4
    prefs_per_archetype: int = 5
    events_per_user_context: int = 10
    background_events: int = 4
    heavy_user_fraction: float = 1.0
    contexts_per_user: int = 2
    concentration: float = 0.85
    hub_rate: float = 0.25
    cross_context_consistency: float = 1.0
    cold_user_fraction: float = 0.0
    jitter_km: float = 0.06
    site_spacing_deg: float = 0.03
    mode: str = PHOTOS

    def __post_init__(self) -> None:
        if self.mode not in (PHOTOS, PROVIDERS):
            raise ConfigError(f"unknown generator mode: {self.mode!r}")
        for name in ("n_contexts", "sites_per_context", "n_users", "n_archetypes",
                     "prefs_per_archetype", "events_per_user_context",
                     "background_events"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1: {getattr(self, name)}")
        if self.hub_sites < 0:
            raise ConfigError(f"hub_sites must be >= 0: {self.hub_sites}")
        if self.hub_sites >= self.sites_per_context:
            raise ConfigError(
                f"hub_sites must leave at least one ordinary site: "
                f"{self.hub_sites} of {self.sites_per_context}"
            )
        if self.prefs_per_archetype > self.sites_per_context - self.hub_sites:
            raise ConfigError(
                "archetype preference size exceeds the ordinary sites per context"
            )
        if not 1 <= self.contexts_per_user <= self.n_contexts:
            raise ConfigError(
                f"contexts_per_user must lie in [1, {self.n_contexts}]: "
                f"{self.contexts_per_user}"
            )
        for name in ("heavy_user_fraction", "concentration", "hub_rate",
                     "cross_context_consistency", "cold_user_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0,1]: {value}")
        if self.cold_user_fraction > 0.0 and self.n_contexts < 2:
            raise ConfigError(
                "cold users need a second context to be active in"
            )
        if self.jitter_km < 0.0:
            raise ConfigError(f"jitter_km must be >= 0: {self.jitter_km}")
        if self.site_spacing_deg <= 0.0:
            raise ConfigError(f"site_spacing_deg must be > 0: {self.site_spacing_deg}")
        # sites must stay resolvable: neighbors further apart than the
        # worst-case spread of one site's points
        spread_deg = 2.0 * self.jitter_km / KM_PER_DEG_LAT
        if self.site_spacing_deg <= 2.0 * spread_deg:
            raise ConfigError(
                "site_spacing_deg too small for jitter_km: sites would merge"
            )


def _site_grid(cfg: SynthConfig, city: int) -> list[Coordinate]:
    cols = math.ceil(math.sqrt(cfg.sites_per_context))
    rows = math.ceil(cfg.sites_per_context / cols)
    lat0, lon0 = 0.0, city * CITY_SPACING_DEG
    out = []
    for k in range(cfg.sites_per_context):
        r, c = divmod(k, cols)
        out.append(Coordinate(
            lat0 + (r - (rows - 1) / 2.0) * cfg.site_spacing_deg,
            lon0 + (c - (cols - 1) / 2.0) * cfg.site_spacing_deg,
        ))
    return out


def _city_box(cfg: SynthConfig, city: int) -> BoundingBox:
    cols = math.ceil(math.sqrt(cfg.sites_per_context))
    rows = math.ceil(cfg.sites_per_context / cols)
    half_lat = ((rows - 1) / 2.0) * cfg.site_spacing_deg + BOX_MARGIN_DEG
    half_lon = ((cols - 1) / 2.0) * cfg.site_spacing_deg + BOX_MARGIN_DEG
    lat0, lon0 = 0.0, city * CITY_SPACING_DEG
    return BoundingBox(
        Coordinate(lat0 - half_lat, lon0 - half_lon),
        Coordinate(lat0 + half_lat, lon0 + half_lon),
    )


def context_id(city: int) -> str:
    return f"city-{city}"


def generate(cfg: SynthConfig, seed: int | str) -> tuple[list[EventRecord], list[GeoContext], Partonomy]:
    """Raw generator output in the ingestion formats."""
    rng = random.Random(f"synth:{seed}")
    sites = [_site_grid(cfg, j) for j in range(cfg.n_contexts)]
    contexts = [
        GeoContext(id=context_id(j), name=f"City {j}", region=_city_box(cfg, j))
        for j in range(cfg.n_contexts)
    ]

    p = Partonomy()
    p.add_node(PartonomyNode(id="synthland", name="Synthland", layer=2))
    for j in range(cfg.n_contexts):
        p.add_node(PartonomyNode(id=context_id(j), name=f"City {j}", layer=1))
        p.add_edge("synthland", context_id(j))
    p.finalize()

    ordinary = list(range(cfg.sites_per_context - cfg.hub_sites))
    hubs = list(range(cfg.sites_per_context - cfg.hub_sites, cfg.sites_per_context))

    def canonical_prefs(a: int) -> list[int]:
        start = (a * cfg.prefs_per_archetype) % len(ordinary)
        return sorted(
            ordinary[(start + i) % len(ordinary)]
            for i in range(cfg.prefs_per_archetype)
        )

    prefs: dict[tuple[int, int], list[int]] = {}
    for a in range(cfg.n_archetypes):
        base = canonical_prefs(a)
        for j in range(cfg.n_contexts):
            if rng.random() < cfg.cross_context_consistency:
                prefs[(a, j)] = base
            else:
                prefs[(a, j)] = sorted(rng.sample(ordinary, cfg.prefs_per_archetype))

    jitter_deg = cfg.jitter_km / KM_PER_DEG_LAT
    t0 = datetime(2025, 1, 1)
    events: list[EventRecord] = []

    def emit(user_id: str, city: int, site: int) -> None:
        center = sites[city][site]
        if cfg.mode == PHOTOS:
            item = f"p{len(events):07d}"
            coord = Coordinate(
                center.lat + rng.uniform(-jitter_deg, jitter_deg),
                center.lon + rng.uniform(-jitter_deg, jitter_deg),
            )
        else:
            item = f"site-{city}-{site:02d}"
            coord = center
        stamp = (t0 + timedelta(minutes=len(events))).isoformat() + "Z"
        events.append(EventRecord(
            user=user_id, item=item, location=coord,
            context=context_id(city), timestamp=stamp,
        ))

    for u in range(cfg.n_users):
        user_id = f"u{u:05d}"
        archetype = u % cfg.n_archetypes
        heavy = rng.random() < cfg.heavy_user_fraction
        cold_bg = rng.random() < cfg.cold_user_fraction
        if cold_bg:
            pool = list(range(1, cfg.n_contexts))
            cities = rng.sample(pool, min(cfg.contexts_per_user, len(pool)))
        elif cfg.contexts_per_user > 1:
            cities = [0] + rng.sample(range(1, cfg.n_contexts), cfg.contexts_per_user - 1)
        else:
            cities = [0]
        n_ev = cfg.events_per_user_context if heavy else cfg.background_events
        for city in sorted(cities):
            my_prefs = prefs[(archetype, city)]
            for _ in range(n_ev):
                if hubs and rng.random() < cfg.hub_rate:
                    site = rng.choice(hubs)
                elif rng.random() < cfg.concentration:
                    site = rng.choice(my_prefs)
                else:
                    site = rng.choice(ordinary)
                emit(user_id, city, site)

    return events, contexts, p


def synth_dataset(cfg: SynthConfig, seed: int | str) -> tuple[Dataset, Partonomy]:
    """Generate and ingest in one step."""
    events, contexts, p = generate(cfg, seed)
    return ingest(events, contexts), p
