"""HTTP facade: dataset uploads, asynchronous clustering runs, reports.

State lives in process memory: an append-only table of immutable datasets
and one of run records whose status only moves forward
(queued -> running -> done | failed).  Clustering runs execute on background
threads and clients poll the run resource.  Error responses always carry a
JSON body of the form {"code": ..., "message": ...}.
"""

from __future__ import annotations

import datetime as _dt
import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import analysis, em
from .dataset import BinaryDataset, SplitPair, Vocabulary, ingest, parse_records
from .decomposition import asvtd_with_anchor
from .errors import (
    AnchorNotFoundError,
    BinmixError,
    EmptyDatasetError,
    InvalidCodeError,
    ParameterError,
    ParseError,
    RankDeficiencyError,
    RankInfeasibleError,
)

_ERROR_CODES = {
    ParseError: "parse_error",
    InvalidCodeError: "invalid_code",
    EmptyDatasetError: "empty_dataset",
    ParameterError: "invalid_parameter",
    RankInfeasibleError: "rank_infeasible",
    RankDeficiencyError: "rank_deficient",
    AnchorNotFoundError: "anchor_not_found",
}


def _error_code(exc: BinmixError) -> str:
    return _ERROR_CODES.get(type(exc), "numerical_error")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class EmOptions(BaseModel):
    omega_tol: float = 0.01
    max_iters: int = 500
    prob_floor: float = 1e-6


class FeatureFilter(BaseModel):
    include: Optional[list[str]] = None
    exclude: Optional[list[str]] = None


class ClusterRequest(BaseModel):
    model_config = {"populate_by_name": True}

    k: int
    min_codes: int = 0
    lam: float = Field(default=0.6, alias="lambda")
    em: EmOptions = EmOptions()
    feature_filter: Optional[FeatureFilter] = None


class SubclusterRequest(BaseModel):
    model_config = {"populate_by_name": True}

    cluster_index: int
    k: int
    min_codes: int = 0
    lam: float = Field(default=0.6, alias="lambda")
    em: EmOptions = EmOptions()
    feature_filter: Optional[FeatureFilter] = None


class StabilityRequest(BaseModel):
    k: int
    overlap: float = 0.5
    seed: int = 0
    em: EmOptions = EmOptions()
    duplicate_split: bool = False  # test hook: both subsets = all rows


class _StoredDataset:
    def __init__(self, dataset_id: str, dataset: BinaryDataset, vocab: Vocabulary):
        self.dataset_id = dataset_id
        self.dataset = dataset
        self.vocab = vocab

    def summary(self) -> dict:
        freq = (
            np.asarray(self.dataset.matrix.sum(axis=0)).ravel() / self.dataset.n_rows
        )
        order = sorted(range(freq.size), key=lambda j: (-freq[j], self.vocab.codes[j]))
        return {
            "dataset_id": self.dataset_id,
            "n_rows": self.dataset.n_rows,
            "n_cols": self.dataset.n_cols,
            "top_codes": [
                {"code": self.vocab.codes[j], "frequency": float(f"{freq[j]:.12g}")}
                for j in order[:10]
            ],
        }


class _RunRecord:
    def __init__(self, run_id, dataset_id, request, eff_dataset, eff_vocab,
                 parent_run=None, cluster_index=None):
        self.run_id = run_id
        self.dataset_id = dataset_id
        self.request = request
        self.eff_dataset = eff_dataset
        self.eff_vocab = eff_vocab
        self.parent_run = parent_run
        self.cluster_index = cluster_index
        self.status = "queued"
        self.created_at = _dt.datetime.now(_dt.timezone.utc).isoformat()
        self.error: Optional[dict] = None
        self.model: Optional[analysis.ClusterModel] = None
        self.trace = None
        self.anchor = None

    def handle(self) -> dict:
        doc = {
            "run_id": self.run_id,
            "dataset_id": self.dataset_id,
            "parent_run": self.parent_run,
            "cluster_index": self.cluster_index,
            "status": self.status,
            "created_at": self.created_at,
            "k": self.request.k,
            "n_rows": self.eff_dataset.n_rows,
            "error": self.error,
        }
        if self.status == "done" and self.model is not None:
            doc["sizes"] = [int(s) for s in self.model.cluster_sizes]
            doc["em"] = {
                "iterations": self.trace.iterations,
                "converged": self.trace.converged,
            }
        return doc


def _apply_filters(
    dataset: BinaryDataset,
    vocab: Vocabulary,
    feature_filter: Optional[FeatureFilter],
    min_codes: int,
) -> tuple[BinaryDataset, Vocabulary]:
    """Column filter by code lists, then drop rows left with too few codes."""
    if feature_filter is not None:
        keep = set(vocab.codes)
        if feature_filter.include is not None:
            keep &= set(feature_filter.include)
        if feature_filter.exclude:
            keep -= set(feature_filter.exclude)
        cols = [j for j, code in enumerate(vocab.codes) if code in keep]
        if not cols:
            raise ApiError(422, "empty_vocabulary", "feature filter removed every code")
        dataset = dataset.column_subset(cols)
        vocab = Vocabulary(tuple(vocab.codes[j] for j in cols))
    if min_codes > 0:
        rows = np.nonzero(dataset.row_counts() >= min_codes)[0]
        if rows.size == 0:
            raise ApiError(
                422, "empty_dataset", f"no rows keep {min_codes} codes after filtering"
            )
        dataset = dataset.subset(rows)
    return dataset, vocab


def _check_feasible(k: int, dataset: BinaryDataset) -> None:
    if k < 1:
        raise ApiError(422, "invalid_parameter", "k must be >= 1")
    if k > dataset.n_cols:
        raise ApiError(
            422, "rank_infeasible",
            f"k={k} exceeds the filtered feature count d={dataset.n_cols}",
        )
    if k > dataset.n_rows:
        raise ApiError(
            422, "rank_infeasible",
            f"k={k} exceeds the filtered row count N={dataset.n_rows}",
        )


def create_app(max_upload_bytes: int = 64 * 1024 * 1024, min_codes_default: int = 3) -> FastAPI:
    app = FastAPI(title="binmix service")
    datasets: dict[str, _StoredDataset] = {}
    runs: dict[str, _RunRecord] = {}
    lock = threading.Lock()
    counters = {"dataset": 0, "run": 0}

    def next_id(kind: str) -> str:
        with lock:
            counters[kind] += 1
            return f"{kind}-{counters[kind]}"

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "validation_error", "message": str(exc.errors())},
        )

    def get_dataset(dataset_id: str) -> _StoredDataset:
        stored = datasets.get(dataset_id)
        if stored is None:
            raise ApiError(404, "unknown_dataset", f"no dataset {dataset_id!r}")
        return stored

    def get_run(run_id: str) -> _RunRecord:
        record = runs.get(run_id)
        if record is None:
            raise ApiError(404, "unknown_run", f"no run {run_id!r}")
        return record

    def execute(record: _RunRecord) -> None:
        record.status = "running"
        try:
            config = em.EmConfig(
                omega_tol=record.request.em.omega_tol,
                max_iters=record.request.em.max_iters,
                prob_floor=record.request.em.prob_floor,
            )
            init, anchor = asvtd_with_anchor(record.eff_dataset, record.request.k)
            refined, trace = em.em_refine(record.eff_dataset, init, config)
            record.model = analysis.assign(
                refined, record.eff_dataset, config.prob_floor
            )
            record.trace = trace
            record.anchor = anchor
            record.status = "done"
        except BinmixError as exc:
            record.error = {"code": _error_code(exc), "message": str(exc)}
            record.status = "failed"
        except Exception as exc:  # pragma: no cover - defensive
            record.error = {"code": "internal_error", "message": str(exc)}
            record.status = "failed"

    def launch(record: _RunRecord) -> None:
        with lock:
            runs[record.run_id] = record
        threading.Thread(target=execute, args=(record,), daemon=True).start()

    @app.post("/datasets", status_code=201)
    async def post_dataset(request: Request, min_codes: int = Query(default=None)):
        body = await request.body()
        if len(body) > max_upload_bytes:
            raise ApiError(
                413, "payload_too_large",
                f"upload of {len(body)} bytes exceeds the {max_upload_bytes} byte cap",
            )
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ApiError(400, "parse_error", f"body is not valid UTF-8: {exc}")
        threshold = min_codes_default if min_codes is None else min_codes
        try:
            records = parse_records(text)
            data, vocab = ingest(records, min_codes=threshold)
        except (ParseError, InvalidCodeError, EmptyDatasetError, ParameterError) as exc:
            raise ApiError(400, _error_code(exc), str(exc))
        dataset_id = next_id("dataset")
        stored = _StoredDataset(dataset_id, data, vocab)
        with lock:
            datasets[dataset_id] = stored
        return stored.summary()

    @app.get("/datasets/{dataset_id}")
    async def get_dataset_summary(dataset_id: str):
        return get_dataset(dataset_id).summary()

    @app.post("/datasets/{dataset_id}/cluster", status_code=202)
    async def post_cluster(dataset_id: str, req: ClusterRequest):
        stored = get_dataset(dataset_id)
        eff_dataset, eff_vocab = _apply_filters(
            stored.dataset, stored.vocab, req.feature_filter, req.min_codes
        )
        _check_feasible(req.k, eff_dataset)
        record = _RunRecord(
            next_id("run"), dataset_id, req, eff_dataset, eff_vocab
        )
        launch(record)
        return record.handle()

    @app.get("/runs/{run_id}")
    async def get_run_status(run_id: str):
        return get_run(run_id).handle()

    @app.get("/runs/{run_id}/report")
    async def get_report(
        run_id: str,
        top_chart: int = 20,
        top_heatmap: int = 40,
        top_relevance: int = 10,
        lam: float = Query(default=None, alias="lambda"),
    ):
        record = get_run(run_id)
        if record.status != "done":
            raise ApiError(
                409, "run_not_done", f"run {run_id} has status {record.status!r}"
            )
        try:
            return analysis.report_payload(
                record.model,
                record.eff_dataset,
                record.eff_vocab,
                lam=record.request.lam if lam is None else lam,
                top_chart=top_chart,
                top_heatmap=top_heatmap,
                top_relevance=top_relevance,
            )
        except BinmixError as exc:
            raise ApiError(422, _error_code(exc), str(exc))

    @app.post("/runs/{run_id}/subcluster", status_code=202)
    async def post_subcluster(run_id: str, req: SubclusterRequest):
        parent = get_run(run_id)
        if parent.status != "done":
            raise ApiError(
                409, "run_not_done", f"parent run {run_id} has status {parent.status!r}"
            )
        if not 0 <= req.cluster_index < parent.request.k:
            raise ApiError(
                422, "invalid_parameter",
                f"cluster_index {req.cluster_index} outside [0, {parent.request.k})",
            )
        rows = np.nonzero(parent.model.assignments == req.cluster_index)[0]
        if rows.size == 0:
            raise ApiError(
                422, "empty_cluster", f"cluster {req.cluster_index} holds no rows"
            )
        child_dataset = parent.eff_dataset.subset(rows)
        eff_dataset, eff_vocab = _apply_filters(
            child_dataset, parent.eff_vocab, req.feature_filter, req.min_codes
        )
        _check_feasible(req.k, eff_dataset)
        record = _RunRecord(
            next_id("run"), parent.dataset_id, req, eff_dataset, eff_vocab,
            parent_run=parent.run_id, cluster_index=req.cluster_index,
        )
        launch(record)
        return record.handle()

    @app.post("/datasets/{dataset_id}/stability")
    async def post_stability(dataset_id: str, req: StabilityRequest):
        stored = get_dataset(dataset_id)
        _check_feasible(req.k, stored.dataset)
        config = em.EmConfig(
            omega_tol=req.em.omega_tol,
            max_iters=req.em.max_iters,
            prob_floor=req.em.prob_floor,
        )
        split = None
        if req.duplicate_split:
            everything = np.arange(stored.dataset.n_rows)
            split = SplitPair(everything, everything.copy(), everything.copy())
        try:
            ari = analysis.stability_check(
                stored.dataset, req.k, overlap=req.overlap, seed=req.seed,
                em_config=config, split=split,
            )
        except BinmixError as exc:
            raise ApiError(422, _error_code(exc), str(exc))
        return {"dataset_id": dataset_id, "k": req.k, "ari": float(f"{ari:.12g}")}

    return app


app = create_app()
