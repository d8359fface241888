"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class LayerFlops(BaseModel):
    t: int
    kind: str
    n: int
    c: int
    flops: int


class FlopsRequest(BaseModel):
    network: str = Field(description="bundled network name or .net file path")


class FlopsResponse(BaseModel):
    network: str
    layers: list[LayerFlops]
    total: int


class PlanModel(BaseModel):
    name: str
    ratios: list[float]
    flops: float
    flops_fraction: float
    error: float
    reward: float
    episode: int | None = None


class SearchRequest(BaseModel):
    config: str = Field(description="key = value run config text")
    out_dir: str | None = None
    stop_after: int | None = None


class SearchResponse(BaseModel):
    best: PlanModel | None
    episodes_run: int
    completed: bool
    out_dir: str | None
    finetuned_error: float | None
    protocol: str


class BaselineRequest(BaseModel):
    config: str
    policy: str = Field(default="all",
                        description="uniform | shallow_aggressive | deep_aggressive | all")


class BaselineResponse(BaseModel):
    plans: list[PlanModel]
    protocol: str


class RandomRequest(BaseModel):
    config: str
    out_dir: str | None = None


class RandomResponse(BaseModel):
    best: PlanModel
    episodes: int
    out_dir: str | None
    protocol: str


class OracleRequest(BaseModel):
    config: str


class OracleResponse(BaseModel):
    ratios: list[float]
    error: float
    reward: float
    flops: float
    flops_fraction: float
    protocol: str


class PretrainRequest(BaseModel):
    config: str = ""
    out_stem: str | None = None


class PretrainResponse(BaseModel):
    accuracy: float
    epochs: int
    val_accuracy_recheck: float
    out_stem: str | None


class ReportRequest(BaseModel):
    run_dir: str


class ReportResponse(BaseModel):
    text: str
