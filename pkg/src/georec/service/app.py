"""HTTP front for a built engine.

The engine is constructed once (from files, by the CLI ``serve`` command or
programmatically) and shared across requests; queries are read-only. Domain
errors map to 404 for unknown ids and 422 for unusable configurations.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..clustering import NOISE, dbscan
from ..engine import Engine
from ..errors import ConfigError, DataError
from ..evaluation import Scenario, run_experiment
from .schemas import (
    ClusterCentroid,
    ClusterRequest,
    ClusterResponse,
    ContextInfo,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    RecommendedItem,
    RecommendRequest,
    RecommendResponse,
    SplitRow,
)


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="georec", version="0.1.0")
    dataset = engine.dataset

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            users=len(dataset.users),
            items=len(dataset.items),
            contexts=len(dataset.contexts),
            units=engine.unit_index.mode,
        )

    @app.get("/contexts", response_model=list[ContextInfo])
    def contexts() -> list[ContextInfo]:
        out = []
        for ext in sorted(dataset.contexts.keys()):
            g = dataset.contexts.get(ext)
            assert g is not None
            ctx = dataset.context_defs.get(g)
            out.append(ContextInfo(
                id=ext,
                name=ctx.name if ctx is not None else "",
                users=len(dataset.context_users(g)),
                items=len(dataset.context_items(g)),
            ))
        return out

    @app.post("/recommend", response_model=RecommendResponse)
    def recommend(req: RecommendRequest) -> RecommendResponse:
        try:
            result = engine.recommend_for(
                req.user, req.context, scheme=req.scheme, n=req.n,
                backfill=req.backfill,
            )
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return RecommendResponse(
            user=result["user"],
            context=result["context"],
            scheme=result["scheme"],
            items=[RecommendedItem(**item) for item in result["items"]],
        )

    @app.post("/cluster", response_model=ClusterResponse)
    def cluster(req: ClusterRequest) -> ClusterResponse:
        try:
            g = dataset.context_of(req.context)
            points = {
                i: dataset.item_coord[i] for i in sorted(dataset.context_items(g))
            }
            clustering = dbscan(
                points, max_radius_km=req.radius_km, min_points=req.min_points
            )
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        assignment = {
            dataset.items.key(i): cid
            for i, cid in sorted(clustering.assignment.items())
        }
        centroids = [
            ClusterCentroid(
                cluster=cid,
                lat=clustering.centroids[cid].lat,
                lon=clustering.centroids[cid].lon,
                size=len(clustering.members[cid]),
            )
            for cid in sorted(clustering.members)
            if cid != NOISE
        ]
        return ClusterResponse(
            context=req.context,
            n_clusters=clustering.n_clusters,
            assignment=assignment,
            centroids=centroids,
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest) -> EvaluateResponse:
        try:
            g = dataset.context_of(req.context)
            scenario = Scenario(
                kind=req.scenario,
                k=req.hide,
                cold_fraction=req.cold_fraction,
                min_items=req.min_items,
            )
            report = run_experiment(
                dataset,
                g,
                scenario,
                req.scheme,
                n=req.n,
                n_splits=req.splits,
                seed=req.seed,
                cluster_units=engine.clustering is not None,
                max_radius_km=(
                    engine.clustering.max_radius_km if engine.clustering else 1.0
                ),
                min_points=(
                    engine.clustering.min_points if engine.clustering else 3
                ),
                partonomy=engine.partonomy,
                cf_scope=engine.cf_scope,
                binary_profiles=engine.binary_profiles,
                tl_layer=engine.tl_layer,
            )
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        hide_precision = report.recall_only
        return EvaluateResponse(
            scheme=report.scheme,
            scenario=report.scenario,
            n=report.n,
            recall_only=report.recall_only,
            splits=[
                SplitRow(
                    split=r.split,
                    precision=None if hide_precision else r.precision,
                    recall=r.recall,
                    users_evaluated=r.users_evaluated,
                    users_skipped=r.users_skipped,
                )
                for r in report.splits
            ],
            mean_precision=None if hide_precision else report.mean_precision,
            mean_recall=report.mean_recall,
            std_precision=None if hide_precision else report.std_precision,
            std_recall=report.std_recall,
        )

    return app
