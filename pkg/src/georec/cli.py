"""Command line front end.

Thin shell over the library: every subcommand parses flags, loads files,
calls library functions, writes declared outputs. Exit status 0 on success,
1 on usage errors, 2 when data or configuration is unusable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .clustering import dbscan
from .data import (
    ingest,
    read_contexts_json,
    read_events_csv,
    write_contexts_json,
    write_events_csv,
)
from .engine import Engine
from .errors import GeorecError
from .evaluation import (
    LEAVE_ALL_OUT,
    LEAVE_ONE_OUT,
    LEAVE_SOME_ALL_OUT,
    LEAVE_SOME_OUT,
    Scenario,
    run_experiment,
    write_report_csv,
)
from .partonomy import Partonomy
from .synth import SynthConfig, generate
from .weighting import CLI_SCHEMES

log = logging.getLogger(__name__)

SCENARIO_FLAGS = {
    "all": LEAVE_ALL_OUT,
    "some": LEAVE_SOME_OUT,
    "mix": LEAVE_SOME_ALL_OUT,
    "one": LEAVE_ONE_OUT,
}
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; here 2 is reserved for
    data errors, so usage problems report 1 instead."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log", choices=sorted(LOG_LEVELS), default="quiet",
                   help="diagnostic verbosity on stderr")


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--units", choices=["clusters", "items"], default="clusters",
                   help="recommendation units: density clusters or raw items")
    p.add_argument("--radius-km", type=float, default=1.0,
                   help="cluster neighborhood radius in km")
    p.add_argument("--min-points", type=int, default=3,
                   help="minimum neighborhood size for a core point")
    p.add_argument("--cf-scope", choices=["context", "all"], default="all",
                   help="profile scope for the cosine scheme")
    p.add_argument("--count-profiles", action="store_true",
                   help="use event counts instead of binary profiles")
    p.add_argument("--tl-layer", type=int, default=1,
                   help="partonomy layer for the two-layer scheme")


def build_parser() -> _Parser:
    parser = _Parser(prog="georec", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("cluster", help="cluster one context's item locations")
    p.add_argument("--events", required=True, help="events CSV")
    p.add_argument("--contexts", help="context definitions JSON (optional)")
    p.add_argument("--context", required=True, help="context id to cluster")
    p.add_argument("--radius-km", type=float, default=1.0)
    p.add_argument("--min-points", type=int, default=3)
    p.add_argument("--out", required=True, help="output JSON path")
    _common_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("recommend", help="top-n units for one user in one context")
    p.add_argument("--events", required=True)
    p.add_argument("--contexts", required=True)
    p.add_argument("--partonomy", help="partonomy JSON (needed by tl / cf-tl)")
    p.add_argument("--user", required=True)
    p.add_argument("--context", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--scheme", choices=CLI_SCHEMES, default="mp")
    p.add_argument("--backfill", action="store_true",
                   help="pad short lists with popular units")
    _model_flags(p)
    _common_flags(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="offline precision/recall experiment")
    p.add_argument("--events", required=True)
    p.add_argument("--contexts", required=True)
    p.add_argument("--partonomy")
    p.add_argument("--context", required=True)
    p.add_argument("--scenario", choices=sorted(SCENARIO_FLAGS), required=True)
    p.add_argument("--cold-fraction", type=float, default=0.5)
    p.add_argument("--hide", type=int, default=4)
    p.add_argument("--min-items", type=int, default=None,
                   help="test eligibility threshold (default per scenario)")
    p.add_argument("--scheme", choices=CLI_SCHEMES, required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--no-backfill", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="report CSV path")
    _model_flags(p)
    _common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--users", type=int, default=400)
    p.add_argument("--n-contexts", type=int, default=4)
    p.add_argument("--sites", type=int, default=24)
    p.add_argument("--hub-sites", type=int, default=3)
    p.add_argument("--archetypes", type=int, default=4)
    p.add_argument("--prefs", type=int, default=5)
    p.add_argument("--events-per-context", type=int, default=10)
    p.add_argument("--background-events", type=int, default=4)
    p.add_argument("--heavy-fraction", type=float, default=1.0)
    p.add_argument("--contexts-per-user", type=int, default=2)
    p.add_argument("--concentration", type=float, default=0.85)
    p.add_argument("--hub-rate", type=float, default=0.25)
    p.add_argument("--consistency", type=float, default=1.0)
    p.add_argument("--cold-fraction", type=float, default=0.0)
    p.add_argument("--jitter-km", type=float, default=0.06)
    p.add_argument("--mode", choices=["photos", "providers"], default="photos")
    _common_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--events", required=True)
    p.add_argument("--contexts", required=True)
    p.add_argument("--partonomy")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _model_flags(p)
    _common_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def _load_engine(args: argparse.Namespace) -> Engine:
    events = read_events_csv(args.events)
    contexts = read_contexts_json(args.contexts) if args.contexts else []
    dataset = ingest(events, contexts)
    partonomy = Partonomy.from_json(args.partonomy) if args.partonomy else None
    return Engine.build(
        dataset,
        cluster_units=args.units == "clusters",
        max_radius_km=args.radius_km,
        min_points=args.min_points,
        partonomy=partonomy,
        cf_scope=args.cf_scope,
        binary_profiles=not args.count_profiles,
        tl_layer=args.tl_layer,
    )


def cmd_cluster(args: argparse.Namespace) -> int:
    events = read_events_csv(args.events)
    contexts = read_contexts_json(args.contexts) if args.contexts else []
    dataset = ingest(events, contexts)
    g = dataset.context_of(args.context)
    points = {i: dataset.item_coord[i] for i in sorted(dataset.context_items(g))}
    clustering = dbscan(points, max_radius_km=args.radius_km, min_points=args.min_points)
    result = {
        "context": args.context,
        "radius_km": args.radius_km,
        "min_points": args.min_points,
        "n_clusters": clustering.n_clusters,
        "assignment": {
            dataset.items.key(i): cid for i, cid in sorted(clustering.assignment.items())
        },
        "centroids": [
            {
                "cluster": cid,
                "lat": clustering.centroids[cid].lat,
                "lon": clustering.centroids[cid].lon,
                "size": len(clustering.members[cid]),
            }
            for cid in sorted(clustering.members)
        ],
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %s (%d clusters)", out, clustering.n_clusters)
    return 0


def cmd_recommend(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    result = engine.recommend_for(
        args.user, args.context, scheme=args.scheme, n=args.n,
        backfill=args.backfill,
    )
    print(json.dumps(result, indent=2))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    events = read_events_csv(args.events)
    contexts = read_contexts_json(args.contexts)
    dataset = ingest(events, contexts)
    partonomy = Partonomy.from_json(args.partonomy) if args.partonomy else None
    g = dataset.context_of(args.context)
    scenario = Scenario(
        kind=SCENARIO_FLAGS[args.scenario],
        k=args.hide,
        cold_fraction=args.cold_fraction,
        min_items=args.min_items,
    )
    report = run_experiment(
        dataset,
        g,
        scenario,
        args.scheme,
        n=args.n,
        n_splits=args.splits,
        seed=args.seed,
        cluster_units=args.units == "clusters",
        max_radius_km=args.radius_km,
        min_points=args.min_points,
        partonomy=partonomy,
        cf_scope=args.cf_scope,
        binary_profiles=not args.count_profiles,
        tl_layer=args.tl_layer,
        backfill=not args.no_backfill,
        threads=args.threads,
    )
    write_report_csv(report, args.out)
    log.info(
        "wrote %s: mean recall@%d %.4f over %d split(s)",
        args.out, report.n, report.mean_recall, len(report.splits),
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = SynthConfig(
        n_contexts=args.n_contexts,
        sites_per_context=args.sites,
        hub_sites=args.hub_sites,
        n_users=args.users,
        n_archetypes=args.archetypes,
        prefs_per_archetype=args.prefs,
        events_per_user_context=args.events_per_context,
        background_events=args.background_events,
        heavy_user_fraction=args.heavy_fraction,
        contexts_per_user=args.contexts_per_user,
        concentration=args.concentration,
        hub_rate=args.hub_rate,
        cross_context_consistency=args.consistency,
        cold_user_fraction=args.cold_fraction,
        jitter_km=args.jitter_km,
        mode=args.mode,
    )
    events, contexts, partonomy = generate(cfg, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(events, out / "events.csv")
    write_contexts_json(contexts, out / "contexts.json")
    (out / "partonomy.json").write_text(
        json.dumps(partonomy.to_json_obj(), indent=2) + "\n", encoding="utf-8"
    )
    log.info("wrote %d events for %d users into %s", len(events), cfg.n_users, out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    engine = _load_engine(args)
    uvicorn.run(create_app(engine), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.error("a subcommand is required")
    # force rebinds the handler to the current stderr when main() is called
    # more than once in a process (tests, embedding)
    logging.basicConfig(
        level=LOG_LEVELS[args.log],
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except GeorecError as exc:
        print(f"georec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
