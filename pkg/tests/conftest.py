from __future__ import annotations

import random

import pytest

from georec.engine import Engine
from georec.synth import SynthConfig, synth_dataset

from helpers import city, ev


@pytest.fixture(scope="session")
def small_synth():
    """Compact two-city dataset with a partonomy, reused across read-only tests."""
    cfg = SynthConfig(
        n_contexts=2,
        sites_per_context=12,
        hub_sites=2,
        n_users=60,
        n_archetypes=3,
        prefs_per_archetype=4,
        events_per_user_context=8,
        background_events=4,
        heavy_user_fraction=0.6,
        contexts_per_user=2,
    )
    return synth_dataset(cfg, seed=11)


@pytest.fixture(scope="session")
def small_engine(small_synth):
    dataset, partonomy = small_synth
    return Engine.build(dataset, cluster_units=True, partonomy=partonomy)


@pytest.fixture()
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture()
def toy_dataset():
    """Two contexts, item units, small enough to reason about by hand.

    rio: users a, b, c. a and b share i1; c only holds i3.
    sp:  users a, d.
    """
    from georec.data import ingest

    contexts = [city("rio", -1.0, -1.0, 1.0, 1.0), city("sp", -1.0, 3.0, 1.0, 5.0)]
    events = [
        ev("a", "i1", 0.0, 0.0),
        ev("a", "i2", 0.1, 0.1),
        ev("b", "i1", 0.0, 0.0),
        ev("b", "i3", -0.2, 0.3),
        ev("c", "i3", -0.2, 0.3),
        ev("a", "i4", 0.0, 4.0),
        ev("d", "i5", 0.2, 4.1),
    ]
    return ingest(events, contexts)
