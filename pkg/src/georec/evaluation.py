"""Offline evaluation: hide part of each test user's in-context history,
rebuild every model structure from what remains, and measure how much of
the hidden part the recommender recovers.

Scenarios: hide everything (one possible split), hide k per user, hide a
cold/warm mix, or hide exactly one. Metrics are precision@n and recall@n,
macro-averaged per user within a split and mean/std-aggregated across
splits.
"""

from __future__ import annotations

import csv
import logging
import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .clustering import Clustering, dbscan
from .data import Dataset
from .errors import ConfigError, DataError
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

log = logging.getLogger(__name__)

LEAVE_ALL_OUT = "leave_all_out"
LEAVE_SOME_OUT = "leave_some_out"
LEAVE_SOME_ALL_OUT = "leave_some_all_out"
LEAVE_ONE_OUT = "leave_one_out"
SCENARIO_KINDS = (LEAVE_ALL_OUT, LEAVE_SOME_OUT, LEAVE_SOME_ALL_OUT, LEAVE_ONE_OUT)


@dataclass(frozen=True)
class Scenario:
    """What to hide per test user. ``k`` applies to the warm variants,
    ``cold_fraction`` to the mixed one; ``min_items`` gates test
    eligibility and defaults to 5 (1 for the single-hide protocol)."""

    kind: str
    k: int = 4
    cold_fraction: float = 0.5
    min_items: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario: {self.kind!r}")
        if self.k < 1:
            raise ConfigError(f"hidden count must be >= 1: {self.k}")
        if not 0.0 <= self.cold_fraction <= 1.0:
            raise ConfigError(f"cold fraction must lie in [0,1]: {self.cold_fraction}")
        if self.min_items is not None and self.min_items < 1:
            raise ConfigError(f"min items must be >= 1: {self.min_items}")

    @property
    def eligibility(self) -> int:
        if self.min_items is not None:
            return self.min_items
        return 1 if self.kind == LEAVE_ONE_OUT else 5

    @property
    def hide_count(self) -> int:
        return 1 if self.kind == LEAVE_ONE_OUT else self.k

    @property
    def recall_only(self) -> bool:
        # hiding exactly one makes precision a fixed multiple of recall
        return self.kind == LEAVE_ONE_OUT


@dataclass
class Split:
    index: int
    context: int
    hidden: dict[int, frozenset[tuple[int, int, int]]]
    training: Dataset


def make_splits(
    dataset: Dataset, context: int, scenario: Scenario, n_splits: int, seed: int | str
) -> list[Split]:
    """Random train/test splits for one context. Each split hides triples
    per the scenario and carries a training dataset with them removed.
    Hidden draws come from a per-split generator, so split i is stable no
    matter how many splits follow."""
    if n_splits < 1:
        raise ConfigError(f"split count must be >= 1: {n_splits}")
    if scenario.kind == LEAVE_ALL_OUT and n_splits > 1:
        log.warning(
            "scenario %s admits a single split; forcing splits from %d to 1",
            scenario.kind, n_splits,
        )
        n_splits = 1

    need = max(scenario.eligibility, 1)
    eligible = sorted(
        u for u in dataset.context_users(context)
        if len(dataset.user_items(u, context)) >= need
    )
    if not eligible:
        raise DataError(
            f"no test-eligible users in context {dataset.contexts.key(context)!r} "
            f"(need >= {need} items)"
        )

    k = scenario.hide_count
    splits: list[Split] = []
    for s in range(n_splits):
        rng = random.Random(f"{seed}:{s}")
        cold: set[int] = set()
        if scenario.kind == LEAVE_SOME_ALL_OUT:
            order = list(eligible)
            rng.shuffle(order)
            n_cold = round(scenario.cold_fraction * len(order))
            cold = set(order[:n_cold])
        hidden: dict[int, frozenset[tuple[int, int, int]]] = {}
        for u in eligible:
            items = sorted(dataset.user_items(u, context))
            hide_all = scenario.kind == LEAVE_ALL_OUT or u in cold
            if hide_all:
                chosen = items
            else:
                if len(items) < k:
                    log.info(
                        "user %s has %d items in context, fewer than hide count %d; "
                        "excluded from the test set",
                        dataset.users.key(u), len(items), k,
                    )
                    continue
                chosen = rng.sample(items, k)
            hidden[u] = frozenset((u, context, i) for i in chosen)
        if not hidden:
            raise DataError(
                f"no test users left after the hide-count filter in context "
                f"{dataset.contexts.key(context)!r}"
            )
        all_hidden = set().union(*hidden.values())
        splits.append(Split(s, context, hidden, dataset.without_triples(all_hidden)))
    return splits


def precision_recall_at_n(
    recommended: Sequence[int], hidden: Sequence[int | None], n: int
) -> tuple[float, float]:
    """Hit = a hidden selection whose unit made the top-n. Each hidden
    selection counts once, several may land in the same unit, and None
    (no unit under the training model) never hits. Precision divides by
    the requested n even when the list is shorter."""
    if n < 1:
        raise ValueError(f"n must be positive: {n}")
    if len(recommended) > n:
        raise ValueError(f"got {len(recommended)} recommendations for n={n}")
    if not hidden:
        raise ValueError("empty hidden set: metrics undefined")
    top = set(recommended)
    hits = sum(1 for h in hidden if h is not None and h in top)
    return hits / n, hits / len(hidden)


@dataclass
class SplitResult:
    split: int
    precision: float
    recall: float
    users_evaluated: int
    users_skipped: int


@dataclass
class EvalReport:
    scheme: str
    scenario: str
    n: int
    splits: list[SplitResult] = field(default_factory=list)
    recall_only: bool = False

    @property
    def mean_precision(self) -> float:
        return statistics.fmean(r.precision for r in self.splits)

    @property
    def mean_recall(self) -> float:
        return statistics.fmean(r.recall for r in self.splits)

    @property
    def std_precision(self) -> float | None:
        if len(self.splits) < 2:
            return None
        return statistics.stdev(r.precision for r in self.splits)

    @property
    def std_recall(self) -> float | None:
        if len(self.splits) < 2:
            return None
        return statistics.stdev(r.recall for r in self.splits)


def _training_clustering(training: Dataset, max_radius_km: float, min_points: int) -> Clustering:
    points = {i: c for i, c in training.item_coord.items()}
    return dbscan(points, max_radius_km=max_radius_km, min_points=min_points)


@dataclass
class _SplitModel:
    """Everything rebuilt from one training split, scheme-independent."""

    training: Dataset
    unit_index: UnitIndex
    graph: RelationalGraph
    clustering: Clustering | None
    partonomy: Partonomy | None
    footprints: UserFootprint | None


def _build_split_model(
    split: Split,
    cluster_units: bool,
    max_radius_km: float,
    min_points: int,
    partonomy: Partonomy | None,
) -> _SplitModel:
    training = split.training
    clustering = None
    if cluster_units:
        clustering = _training_clustering(training, max_radius_km, min_points)
    unit_index = UnitIndex(training, clustering)
    p = fp = None
    if partonomy is not None:
        p = partonomy.bare_copy()
        if clustering is not None:
            attach_clusters(p, clustering, training)
        fp = build_footprints(p, training, clustering)
        build_information(p, fp)
    graph = build_graph(training)
    return _SplitModel(training, unit_index, graph, clustering, p, fp)


def _hidden_unit(
    item: int,
    model: _SplitModel,
    full_dataset: Dataset,
) -> int | None:
    """Map a hidden item onto the unit space of the training model. With
    cluster units an absent item falls to the cluster of the nearest core
    point within reach, or to a miss."""
    if model.clustering is None:
        return item
    unit = model.clustering.unit_of(item)
    if unit is not None:
        return unit
    coord = full_dataset.item_coord.get(item)
    if coord is None:
        return None
    return model.clustering.predict(coord)


def _evaluate_split(
    split: Split,
    model: _SplitModel,
    scheme: EdgeWeightFn,
    dataset: Dataset,
    n: int,
    backfill: bool,
    count_backfilled: bool,
) -> SplitResult:
    precisions: list[float] = []
    recalls: list[float] = []
    skipped = 0
    for u in sorted(split.hidden):
        hidden_units = [
            _hidden_unit(i, model, dataset)
            for (_, _, i) in sorted(split.hidden[u])
        ]
        if not hidden_units:
            skipped += 1
            continue
        recs = recommend(
            model.graph, model.training, model.unit_index, scheme,
            NodeRef(u, split.context), n, backfill=backfill,
        )
        if len(recs) == 0:
            skipped += 1
            continue
        units = [
            e.unit for e in recs.entries if count_backfilled or not e.backfilled
        ]
        p, r = precision_recall_at_n(units, hidden_units, n)
        precisions.append(p)
        recalls.append(r)
    if not precisions:
        log.warning("split %d: every test user was skipped", split.index)
        return SplitResult(split.index, 0.0, 0.0, 0, skipped)
    return SplitResult(
        split.index,
        statistics.fmean(precisions),
        statistics.fmean(recalls),
        len(precisions),
        skipped,
    )


def run_experiments(
    dataset: Dataset,
    context: int,
    scenario: Scenario,
    scheme_names: Sequence[str],
    n: int = 10,
    n_splits: int = 5,
    seed: int | str = 42,
    cluster_units: bool = True,
    max_radius_km: float = 1.0,
    min_points: int = 3,
    partonomy: Partonomy | None = None,
    cf_scope: str = "all",
    binary_profiles: bool = True,
    tl_layer: int = 1,
    backfill: bool = True,
    count_backfilled: bool = True,
    threads: int = 1,
) -> dict[str, EvalReport]:
    """Offline experiments for several schemes over identical splits. The
    expensive per-split structures (clustering, unit index, graph,
    partonomy weights) are built once and shared; only the edge weights
    differ per scheme. Each split's structures come from its own training
    data alone, so nothing hidden can leak into a query."""
    if not scheme_names:
        raise ConfigError("no weighting schemes given")
    for name in scheme_names:
        if name not in SCHEMES:
            raise ConfigError(f"unknown weighting scheme: {name!r}")
        if not cluster_units and name in ("ic", "tl", "cf-tl"):
            raise ConfigError(f"scheme {name!r} needs cluster units")
    splits = make_splits(dataset, context, scenario, n_splits, seed)

    def job(split: Split) -> dict[str, SplitResult]:
        model = _build_split_model(
            split, cluster_units, max_radius_km, min_points, partonomy
        )
        out: dict[str, SplitResult] = {}
        for name in scheme_names:
            scheme = build_scheme(
                name,
                model.training,
                model.unit_index,
                partonomy=model.partonomy,
                footprints=model.footprints,
                cf_scope=cf_scope,
                binary_profiles=binary_profiles,
                tl_layer=tl_layer,
            )
            out[name] = _evaluate_split(
                split, model, scheme, dataset, n, backfill, count_backfilled
            )
        return out

    if threads > 1 and len(splits) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_split = list(pool.map(job, splits))
    else:
        per_split = [job(s) for s in splits]
    return {
        name: EvalReport(
            scheme=name,
            scenario=scenario.kind,
            n=n,
            splits=[row[name] for row in per_split],
            recall_only=scenario.recall_only,
        )
        for name in scheme_names
    }


def run_experiment(
    dataset: Dataset,
    context: int,
    scenario: Scenario,
    scheme_name: str,
    n: int = 10,
    n_splits: int = 5,
    seed: int | str = 42,
    cluster_units: bool = True,
    max_radius_km: float = 1.0,
    min_points: int = 3,
    partonomy: Partonomy | None = None,
    cf_scope: str = "all",
    binary_profiles: bool = True,
    tl_layer: int = 1,
    backfill: bool = True,
    count_backfilled: bool = True,
    threads: int = 1,
) -> EvalReport:
    """Single-scheme convenience over ``run_experiments``."""
    return run_experiments(
        dataset,
        context,
        scenario,
        [scheme_name],
        n=n,
        n_splits=n_splits,
        seed=seed,
        cluster_units=cluster_units,
        max_radius_km=max_radius_km,
        min_points=min_points,
        partonomy=partonomy,
        cf_scope=cf_scope,
        binary_profiles=binary_profiles,
        tl_layer=tl_layer,
        backfill=backfill,
        count_backfilled=count_backfilled,
        threads=threads,
    )[scheme_name]


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    """Per-split rows, then a mean row and (given two or more splits) a
    sample standard deviation row. The single-hide protocol reports recall
    only; its precision cells stay blank."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "scenario", "split", "precision_at_n", "recall_at_n"])

        def cell(x: float | None) -> str:
            if x is None or report.recall_only:
                return ""
            return repr(x)

        for r in report.splits:
            w.writerow([report.scheme, report.scenario, r.split, cell(r.precision), repr(r.recall)])
        w.writerow([report.scheme, report.scenario, "mean", cell(report.mean_precision), repr(report.mean_recall)])
        if len(report.splits) >= 2:
            w.writerow([report.scheme, report.scenario, "std", cell(report.std_precision), repr(report.std_recall)])
