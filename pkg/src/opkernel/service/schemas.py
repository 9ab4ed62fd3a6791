"""Request/response models for the HTTP service.

Every request model doubles as the run's resolved configuration: handlers
write it as `run_config.json` beside their outputs, and feeding that file
back through the same endpoint reproduces the outputs bit for bit.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1

DEFAULT_LAMBDA_GRID = [0.01, 0.1, 1.0, 10.0, 100.0]
DEFAULT_C_GRID = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]


class PlantSpecModel(BaseModel):
    nodes: list[int]
    strength: float = Field(gt=0.0, le=1.0)


class AttributeKernelModel(BaseModel):
    kind: Literal["linear", "rbf", "delta", "constant_one"] = "constant_one"
    gamma: float = Field(default=1.0, gt=0.0)


class KernelConfigModel(BaseModel):
    lam: float = Field(default=1.0, gt=0.0)
    match_mode: Literal["positional", "structural"] = "positional"
    node_kernel: AttributeKernelModel = AttributeKernelModel()
    edge_kernel: AttributeKernelModel = AttributeKernelModel()
    normalize: bool = False


class GenRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Literal["gen"] = "gen"
    out_dir: str
    n_per_class: int = Field(ge=1)
    n_nodes: int = Field(ge=2)
    n_timepoints: int = Field(ge=1)
    seed: int = Field(ge=0)
    plant_a: PlantSpecModel
    plant_b: PlantSpecModel


class GenResponse(BaseModel):
    manifest: str
    n_graphs: int
    run_config: str


class GramRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Literal["gram"] = "gram"
    manifest: str
    out_dir: str
    config: KernelConfigModel = KernelConfigModel()
    exact: bool = False
    depth_cap: int = Field(default=8, ge=1)
    budget: int = Field(default=10**6, ge=1)
    workers: int = Field(default=1, ge=1)


class GramResponse(BaseModel):
    gram_path: str
    libsvm_path: str
    sidecar_path: str
    min_eig: float
    max_eig: float
    psd: bool
    run_config: str


class EvalRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Literal["eval"] = "eval"
    manifest: str
    out_dir: str
    config: KernelConfigModel = KernelConfigModel()
    lambda_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    c_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_C_GRID))
    nested: bool = True
    workers: int = Field(default=1, ge=1)


class FoldRecord(BaseModel):
    id: str
    true_label: int
    predicted: int | None


class EvalReportModel(BaseModel):
    """Published schema of the evaluation report JSON."""

    schema_version: int = SCHEMA_VERSION
    accuracy: float
    best_lambda: float
    best_c: float
    nested: bool
    per_fold: list[FoldRecord]
    notes: list[str] = Field(default_factory=list)


class EvalResponse(BaseModel):
    report_path: str
    folds_csv_path: str
    accuracy: float
    best_lambda: float
    best_c: float
    n_folds: int
    run_config: str


class RobustRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Literal["robust"] = "robust"
    manifest: str
    out_dir: str
    config: KernelConfigModel = KernelConfigModel()
    lambda_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    c_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_C_GRID))
    nested: bool = True
    rates: list[float] = Field(default_factory=lambda: [0.25])
    n_seeds: int = Field(default=3, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)


class RobustRow(BaseModel):
    run: Literal["baseline", "perturbed"]
    rate: float
    seed: int | None
    accuracy: float
    best_lambda: float
    best_c: float


class RobustResponse(BaseModel):
    csv_path: str
    rows: list[RobustRow]
    run_config: str


class MineRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Literal["mine"] = "mine"
    manifest: str
    out_dir: str
    start_node: int = Field(ge=0)
    top_k: int = Field(default=6, ge=1)


class MinedPatternModel(BaseModel):
    labels: list[str]
    score: float
    freq_positive: float
    freq_negative: float


class MineResponse(BaseModel):
    json_path: str
    listing_path: str
    profiles_path: str
    top: list[MinedPatternModel]
    run_config: str


class ErrorDetail(BaseModel):
    kind: Literal["input", "numeric"]
    message: str
