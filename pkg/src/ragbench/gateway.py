"""Token-authenticated HTTP gateway over the pipeline.

Exposes upload, model listing, chat queries, benchmark runs, human ratings
and report retrieval. Authentication is a single static bearer token taken
from the environment variable named in the config; comparison is
constant-time and the token is never logged.
"""

from __future__ import annotations

import hmac
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import Depends, FastAPI, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import benchharness, docstore
from .benchharness import RatingStore, RunRecord, parse_dataset, load_dataset
from .config import AppConfig
from .errors import (
    BackendError,
    BackendTimeout,
    DatasetEmpty,
    DuplicateItemId,
    EmptyDocument,
    EmptyQuestion,
    ExtractionFailed,
    OutOfRange,
    ParseError,
    RagBenchError,
    StrictShapeViolation,
    UnknownModel,
    UnknownRecord,
    UnsupportedFormat,
)
from .ragchat import ChatEngine, ModelRegistry, Session

_FORMAT_BY_SUFFIX = {".pdf": "pdf", ".txt": "text", ".md": "markdown"}
_REPORT_MEDIA_TYPES = {"markdown": "text/markdown", "csv": "text/csv",
                       "json": "application/json"}


class ApiHttpError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _unauthorized() -> ApiHttpError:
    return ApiHttpError(401, "unauthorized", "missing or invalid bearer token")


@dataclass
class BenchmarkRun:
    run_id: str
    status: str  # "running" | "done" | "error"
    records: list[RunRecord] = field(default_factory=list)
    latency_valid: bool = True
    error: str | None = None


class AppState:
    """Everything a running gateway instance owns."""

    def __init__(self, config: AppConfig, token: str):
        self.config = config
        self.token = token
        self.registry = ModelRegistry()
        for backend in config.backends:
            self.registry.register(backend)
        self.sessions: dict[str, tuple[Session, ChatEngine]] = {}
        self.runs: dict[str, BenchmarkRun] = {}
        self.ratings = RatingStore()
        self._bench_lock = threading.Lock()
        self._bench_active = False
        self._lock = threading.Lock()

    def new_session(self) -> Session:
        session = Session()
        engine = ChatEngine(
            embedder=self.config.embedder,
            chunking=self.config.chunking,
            registry=self.registry,
            template=self.config.prompt,
            default_k=self.config.default_k,
        )
        with self._lock:
            self.sessions[session.session_id] = (session, engine)
        return session

    def get_session(self, session_id: str) -> tuple[Session, ChatEngine]:
        with self._lock:
            if session_id not in self.sessions:
                raise ApiHttpError(404, "unknown_session",
                                   f"no such session: {session_id}")
            return self.sessions[session_id]


class QueryRequest(BaseModel):
    question: str
    model_id: str
    k: int | None = None


class BenchmarkRequest(BaseModel):
    session_id: str
    model_ids: list[str]
    dataset_path: str | None = None
    dataset: dict | None = None
    strict: bool = False
    k: int | None = None
    workers: int = 1


class RatingRequest(BaseModel):
    record_id: str
    fidelity_pct: int
    relevance_pct: int
    rater_id: str


def create_app(config: AppConfig | None = None, token: str | None = None) -> FastAPI:
    config = config or AppConfig()
    if token is None:
        token = os.environ.get(config.token_env)
    if not token:
        raise RuntimeError(
            f"no API token: set {config.token_env} or pass token explicitly")
    state = AppState(config, token)

    app = FastAPI(title="ragbench gateway")
    app.state.ragbench = state

    def require_auth(request: Request) -> None:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise _unauthorized()
        supplied = header[len("Bearer "):]
        if not hmac.compare_digest(supplied.encode(), state.token.encode()):
            raise _unauthorized()

    auth = Depends(require_auth)

    @app.exception_handler(ApiHttpError)
    async def _api_error(_request, exc: ApiHttpError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RagBenchError)
    async def _domain_error(_request, exc: RagBenchError):
        return JSONResponse(status_code=500,
                            content={"code": type(exc).__name__, "message": str(exc)})

    @app.post("/api/sessions", dependencies=[auth])
    def create_session():
        session = state.new_session()
        return {"session_id": session.session_id}

    @app.post("/api/documents", dependencies=[auth])
    async def upload_document(file: UploadFile, session_id: str = Form(...),
                              title: str = Form("")):
        session, engine = state.get_session(session_id)
        data = await file.read()
        if len(data) > state.config.upload_cap_bytes:
            raise ApiHttpError(413, "too_large",
                               f"upload exceeds {state.config.upload_cap_bytes} bytes")
        filename = file.filename or ""
        suffix = ("." + filename.rsplit(".", 1)[-1].lower()) if "." in filename else ""
        source_format = _FORMAT_BY_SUFFIX.get(suffix)
        if source_format is None:
            raise ApiHttpError(422, "unsupported_format",
                               f"unsupported file type: {filename!r}")
        try:
            doc = docstore.ingest_document(data, source_format, title or filename)
            chunks = engine.add_document(doc)
        except (ExtractionFailed, EmptyDocument, UnsupportedFormat) as exc:
            raise ApiHttpError(422, "extraction_failed", str(exc)) from exc
        session.doc_ids.add(doc.doc_id)
        return {"doc_id": doc.doc_id, "pages": len(doc.page_offsets),
                "chunks": len(chunks)}

    @app.get("/api/models", dependencies=[auth])
    def list_models():
        return [{"model_id": b.model_id, "kind": b.kind}
                for b in state.registry.list_models()]

    @app.post("/api/sessions/{session_id}/query", dependencies=[auth])
    def query(session_id: str, body: QueryRequest):
        session, engine = state.get_session(session_id)
        try:
            answer = engine.answer_query(session, body.question, body.model_id,
                                         k=body.k)
        except EmptyQuestion as exc:
            raise ApiHttpError(400, "empty_question", str(exc)) from exc
        except UnknownModel as exc:
            raise ApiHttpError(400, "unknown_model", str(exc)) from exc
        except BackendTimeout as exc:
            raise ApiHttpError(504, "backend_timeout", str(exc)) from exc
        except BackendError as exc:
            raise ApiHttpError(502, "backend_error", str(exc)) from exc
        return {
            "answer": answer.text,
            "model_id": answer.model_id,
            "contexts": [{"chunk_id": h.chunk_id, "similarity": h.similarity,
                          "text": h.text} for h in answer.hits],
            "latency_s": answer.latency_s,
            "retrieval_s": answer.retrieval_s,
        }

    @app.post("/api/benchmark/run", dependencies=[auth], status_code=202)
    def benchmark_run(body: BenchmarkRequest):
        session, engine = state.get_session(body.session_id)
        try:
            if body.dataset is not None:
                dataset = parse_dataset(body.dataset, strict=body.strict)
            elif body.dataset_path is not None:
                dataset = load_dataset(body.dataset_path, strict=body.strict)
            else:
                raise ApiHttpError(422, "no_dataset",
                                   "provide dataset or dataset_path")
        except (ParseError, StrictShapeViolation, DuplicateItemId) as exc:
            raise ApiHttpError(422, "bad_dataset", str(exc)) from exc
        for model_id in body.model_ids:
            try:
                state.registry.get(model_id)
            except UnknownModel as exc:
                raise ApiHttpError(422, "unknown_model", str(exc)) from exc

        with state._bench_lock:
            if state._bench_active:
                raise ApiHttpError(409, "run_in_progress",
                                   "a benchmark run is already in progress")
            state._bench_active = True

        run = BenchmarkRun(run_id=uuid.uuid4().hex, status="running",
                           latency_valid=body.workers <= 1)
        state.runs[run.run_id] = run

        def work():
            try:
                records = benchharness.run_benchmark(
                    dataset, body.model_ids, engine, session,
                    chrf_cfg=state.config.chrf, k=body.k, workers=body.workers)
                run.records = records
                state.ratings.register_records(records)
                run.status = "done"
            except (RagBenchError, DatasetEmpty) as exc:
                run.status = "error"
                run.error = str(exc)
            finally:
                with state._bench_lock:
                    state._bench_active = False

        threading.Thread(target=work, daemon=True).start()
        return {"run_id": run.run_id}

    def _get_run(run_id: str) -> BenchmarkRun:
        run = state.runs.get(run_id)
        if run is None:
            raise ApiHttpError(404, "unknown_run", f"no such run: {run_id}")
        return run

    @app.get("/api/benchmark/{run_id}/report", dependencies=[auth])
    def benchmark_report(run_id: str, format: str = "json"):
        run = _get_run(run_id)
        if run.status == "running":
            return JSONResponse(status_code=202, content={"status": "running"})
        if run.status == "error":
            raise ApiHttpError(500, "run_failed", run.error or "benchmark failed")
        if format not in _REPORT_MEDIA_TYPES:
            raise ApiHttpError(422, "bad_format", f"unknown format {format!r}")
        body = benchharness.render_report(
            run.records, state.ratings.all_ratings(), fmt=format,
            chrf_cfg=state.config.chrf, latency_valid=run.latency_valid)
        return Response(content=body, media_type=_REPORT_MEDIA_TYPES[format])

    @app.get("/api/benchmark/{run_id}/records", dependencies=[auth])
    def benchmark_records(run_id: str):
        run = _get_run(run_id)
        return {
            "status": run.status,
            "records": [{
                "record_id": r.record_id, "item_id": r.item_id,
                "model_id": r.model_id, "group": r.group,
                "answer_text": r.answer_text,
                "meteor": r.scores.meteor if r.scores else None,
                "chrf": r.scores.chrf if r.scores else None,
                "latency_s": r.latency_s, "retrieval_s": r.retrieval_s,
                "error": r.error,
            } for r in run.records],
        }

    @app.post("/api/ratings", dependencies=[auth], status_code=204)
    def post_rating(body: RatingRequest):
        try:
            state.ratings.record_rating(body.record_id, body.fidelity_pct,
                                        body.relevance_pct, body.rater_id)
        except UnknownRecord as exc:
            raise ApiHttpError(404, "unknown_record", str(exc)) from exc
        except OutOfRange as exc:
            raise ApiHttpError(422, "out_of_range", str(exc)) from exc
        return Response(status_code=204)

    return app
