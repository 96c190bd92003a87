"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    users: int
    items: int
    contexts: int
    units: str


class ContextInfo(BaseModel):
    id: str
    name: str
    users: int
    items: int


class RecommendRequest(BaseModel):
    user: str
    context: str
    scheme: str = "mp"
    n: int = Field(default=10, ge=1, le=1000)
    backfill: bool = True


class RecommendedItem(BaseModel):
    unit: str | int
    score: float
    backfilled: bool


class RecommendResponse(BaseModel):
    user: str
    context: str
    scheme: str
    items: list[RecommendedItem]


class ClusterRequest(BaseModel):
    context: str
    radius_km: float = Field(default=1.0, gt=0)
    min_points: int = Field(default=3, ge=1)


class ClusterCentroid(BaseModel):
    cluster: int
    lat: float
    lon: float
    size: int


class ClusterResponse(BaseModel):
    context: str
    n_clusters: int
    assignment: dict[str, int]
    centroids: list[ClusterCentroid]


class EvaluateRequest(BaseModel):
    context: str
    scheme: str = "mp"
    scenario: str = "leave_some_out"
    n: int = Field(default=10, ge=1)
    splits: int = Field(default=5, ge=1)
    seed: int = 42
    hide: int = Field(default=4, ge=1)
    cold_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    min_items: int | None = Field(default=None, ge=1)


class SplitRow(BaseModel):
    split: int
    precision: float | None
    recall: float
    users_evaluated: int
    users_skipped: int


class EvaluateResponse(BaseModel):
    scheme: str
    scenario: str
    n: int
    recall_only: bool
    splits: list[SplitRow]
    mean_precision: float | None
    mean_recall: float
    std_precision: float | None
    std_recall: float | None
