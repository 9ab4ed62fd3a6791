"""FastAPI service exposing the pipeline: generate, gram, eval, robust, mine.

Handlers are plain functions over the request models so the CLI client and
tests can exercise them through the HTTP layer; all artifact paths in
requests are resolved on the filesystem the service runs on. Each handler
writes the fully resolved request as `run_config.json` beside its outputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..attributes import AttributeKernel
from ..dop import build_profile, mine_discriminative
from ..errors import ComputeError, InputError
from ..graphs import PlantSpec, generate_dataset, load_dataset, save_dataset
from ..kernels import (
    KernelConfig,
    exact_gram,
    export_libsvm,
    gram,
    psd_check,
    save_gram_sidecar,
    save_gram_text,
)
from ..learn import loocv, robustness_eval
from .schemas import (
    EvalReportModel,
    EvalRequest,
    EvalResponse,
    GenRequest,
    GenResponse,
    GramRequest,
    GramResponse,
    KernelConfigModel,
    MinedPatternModel,
    MineRequest,
    MineResponse,
    RobustRequest,
    RobustResponse,
    RobustRow,
)


def kernel_config(model: KernelConfigModel) -> KernelConfig:
    return KernelConfig(
        lam=model.lam,
        match_mode=model.match_mode,
        node_kernel=AttributeKernel(model.node_kernel.kind, model.node_kernel.gamma),
        edge_kernel=AttributeKernel(model.edge_kernel.kind, model.edge_kernel.gamma),
        normalize=model.normalize,
    )


def _write_run_config(req, out_dir: Path) -> str:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_config.json"
    path.write_text(req.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return str(path)


def run_gen(req: GenRequest) -> GenResponse:
    plants = (
        PlantSpec(tuple(req.plant_a.nodes), req.plant_a.strength),
        PlantSpec(tuple(req.plant_b.nodes), req.plant_b.strength),
    )
    ds = generate_dataset(req.n_per_class, req.n_nodes, req.n_timepoints, plants, req.seed)
    out_dir = Path(req.out_dir)
    manifest = save_dataset(ds, out_dir)
    run_config = _write_run_config(req, out_dir)
    return GenResponse(manifest=str(manifest), n_graphs=len(ds), run_config=run_config)


def run_gram(req: GramRequest) -> GramResponse:
    ds = load_dataset(req.manifest)
    if req.exact:
        gm = exact_gram(ds, req.depth_cap, req.config.lam, req.budget, req.config.normalize)
    else:
        gm = gram(ds, kernel_config(req.config), req.workers)
    check = psd_check(gm)
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gram_path = out_dir / "gram.txt"
    libsvm_path = out_dir / "gram.libsvm"
    sidecar_path = out_dir / "samples.csv"
    save_gram_text(gm, gram_path)
    export_libsvm(gm, libsvm_path)
    save_gram_sidecar(gm, sidecar_path)
    run_config = _write_run_config(req, out_dir)
    return GramResponse(
        gram_path=str(gram_path),
        libsvm_path=str(libsvm_path),
        sidecar_path=str(sidecar_path),
        min_eig=check.min_eig,
        max_eig=check.max_eig,
        psd=check.ok,
        run_config=run_config,
    )


def _report_model(report) -> EvalReportModel:
    return EvalReportModel.model_validate(report.to_dict())


def run_eval(req: EvalRequest) -> EvalResponse:
    ds = load_dataset(req.manifest)
    report = loocv(
        ds,
        tuple(req.lambda_grid),
        tuple(req.c_grid),
        kernel_config(req.config),
        nested=req.nested,
        workers=req.workers,
    )
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(_report_model(report).model_dump_json(indent=2) + "\n", encoding="utf-8")
    folds_path = out_dir / "folds.csv"
    with open(folds_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "true_label", "predicted"])
        for fold in report.per_fold:
            writer.writerow([fold.sample_id, fold.true_label, fold.predicted])
    run_config = _write_run_config(req, out_dir)
    return EvalResponse(
        report_path=str(report_path),
        folds_csv_path=str(folds_path),
        accuracy=report.accuracy,
        best_lambda=report.best_lambda,
        best_c=report.best_c,
        n_folds=len(report.per_fold),
        run_config=run_config,
    )


def run_robust(req: RobustRequest) -> RobustResponse:
    for rate in req.rates:
        if not 0.0 <= rate <= 1.0:
            raise InputError(f"missing rate must be in [0,1], got {rate}")
    ds = load_dataset(req.manifest)
    cfg = kernel_config(req.config)
    grids = (tuple(req.lambda_grid), tuple(req.c_grid))
    baseline = loocv(ds, grids[0], grids[1], cfg, nested=req.nested, workers=req.workers)
    rows = [
        RobustRow(
            run="baseline",
            rate=0.0,
            seed=None,
            accuracy=baseline.accuracy,
            best_lambda=baseline.best_lambda,
            best_c=baseline.best_c,
        )
    ]
    seeds = [req.seed + k for k in range(req.n_seeds)]
    for rate in req.rates:
        reports = robustness_eval(
            ds,
            rate,
            seeds,
            grids[0],
            grids[1],
            cfg,
            nested=req.nested,
            workers=req.workers,
            baseline=baseline,
        )
        for seed, report in zip(seeds, reports[1:]):
            rows.append(
                RobustRow(
                    run="perturbed",
                    rate=rate,
                    seed=seed,
                    accuracy=report.accuracy,
                    best_lambda=report.best_lambda,
                    best_c=report.best_c,
                )
            )
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "robustness.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "rate", "seed", "accuracy", "best_lambda", "best_c"])
        for row in rows:
            writer.writerow(
                [
                    row.run,
                    row.rate,
                    "" if row.seed is None else row.seed,
                    row.accuracy,
                    row.best_lambda,
                    row.best_c,
                ]
            )
    run_config = _write_run_config(req, out_dir)
    return RobustResponse(csv_path=str(csv_path), rows=rows, run_config=run_config)


def run_mine(req: MineRequest) -> MineResponse:
    ds = load_dataset(req.manifest)
    profiles = [build_profile(g) for g in ds.graphs]
    profiles_pos = [p for p, y in zip(profiles, ds.labels) if y == 1]
    profiles_neg = [p for p, y in zip(profiles, ds.labels) if y == -1]
    mined = mine_discriminative(profiles_pos, profiles_neg, req.start_node, req.top_k)

    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    top = [
        MinedPatternModel(
            labels=list(m.labels), score=m.score, freq_positive=m.freq_a, freq_negative=m.freq_b
        )
        for m in mined
    ]
    json_path = out_dir / "mine.json"
    json_path.write_text(
        json.dumps(
            {
                "schema_version": req.schema_version,
                "start_node": req.start_node,
                "top_k": req.top_k,
                "patterns": [m.model_dump() for m in top],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    listing_path = out_dir / "mine.txt"
    with open(listing_path, "w", encoding="utf-8") as fh:
        fh.write(f"top {len(top)} discriminative patterns from start node {req.start_node}\n")
        for rank, m in enumerate(top, start=1):
            chain = " > ".join(m.labels)
            fh.write(
                f"{rank}. {chain}  score={m.score:.4f}  "
                f"freq(+1)={m.freq_positive:.4f}  freq(-1)={m.freq_negative:.4f}\n"
            )
    profiles_path = out_dir / "profiles.json"
    records = [
        {
            "id": sid,
            "label": y,
            "start": req.start_node,
            "labels": list(profile.label_seq(req.start_node)),
            "weights": list(profile.per_node[req.start_node].edge_weights),
        }
        for sid, y, profile in zip(ds.ids, ds.labels, profiles)
    ]
    profiles_path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    run_config = _write_run_config(req, out_dir)
    return MineResponse(
        json_path=str(json_path),
        listing_path=str(listing_path),
        profiles_path=str(profiles_path),
        top=top,
        run_config=run_config,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="opkernel", version=__version__)

    @app.exception_handler(InputError)
    async def _input_error(request, exc):
        return JSONResponse(
            status_code=400, content={"detail": {"kind": "input", "message": str(exc)}}
        )

    @app.exception_handler(ComputeError)
    async def _compute_error(request, exc):
        return JSONResponse(
            status_code=422, content={"detail": {"kind": "numeric", "message": str(exc)}}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request, exc):
        return JSONResponse(
            status_code=400, content={"detail": {"kind": "input", "message": str(exc)}}
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/gen", response_model=GenResponse)
    def gen(req: GenRequest):
        return run_gen(req)

    @app.post("/gram", response_model=GramResponse)
    def gram_endpoint(req: GramRequest):
        return run_gram(req)

    @app.post("/eval", response_model=EvalResponse)
    def eval_endpoint(req: EvalRequest):
        return run_eval(req)

    @app.post("/robust", response_model=RobustResponse)
    def robust(req: RobustRequest):
        return run_robust(req)

    @app.post("/mine", response_model=MineResponse)
    def mine(req: MineRequest):
        return run_mine(req)

    return app


app = create_app()
