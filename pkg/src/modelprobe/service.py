"""Session-based HTTP facade over the explanation engine.

Each session pins a model (and optionally a dataset) to a current data point
and records every exchange in an append-only event log, so the whole
explanation dialogue can be audited and replayed. The service adds no
arithmetic of its own: every number it returns comes from a library call.

No authentication: bind to loopback unless you know what you are doing.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import concurrent.futures

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from . import __version__, documents
from .attribution import (
    SurrogateExplanation,
    Scheme,
    attribute,
    resolve_baseline,
    scheme_from_document,
)
from .counterfactual import (
    DistanceConfig,
    SearchConfig,
    TargetSpec,
    find_counterfactual,
    render_contrast,
)
from .errors import (
    ConfigError,
    DegenerateRegion,
    ExactLimitExceeded,
    ModelProbeError,
    ProtocolError,
    SchemaViolation,
    SpecError,
    UnsupportedMethod,
)
from .fidelity import RegionSpec, classify_analogies, validity_profile
from .models import Model, load_model
from .schema import Dataset, schema_to_documents

DEFAULT_BIND = "127.0.0.1:8080"
DEFAULT_LOG_DIR = "./sessions"
DEFAULT_MAX_BODY = 1 << 20  # 1 MiB
DEFAULT_SYNC_WAIT = 2.0  # searches longer than this return a job token


class ApiError(ModelProbeError):
    """Error with an explicit HTTP status and document shape."""

    def __init__(self, status: int, code: str, message: str, locus: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.locus = locus

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"error": {"code": self.code, "message": str(self), "locus": self.locus}},
        )


def _api_error_from(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, SpecError):
        return ApiError(400, "parse", str(exc), locus=exc.locus)
    if isinstance(exc, SchemaViolation):
        return ApiError(400, "validation", str(exc), locus=exc.feature)
    if isinstance(exc, ExactLimitExceeded):
        return ApiError(422, "exact_limit", str(exc))
    if isinstance(exc, (ConfigError, UnsupportedMethod, DegenerateRegion)):
        return ApiError(422, "config", str(exc))
    if isinstance(exc, ProtocolError):
        return ApiError(502, "protocol", str(exc))
    return ApiError(500, "internal", f"{type(exc).__name__}: {exc}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SessionState:
    id: str
    model: Model
    model_doc: dict
    dataset: Dataset | None
    dataset_csv: str | None
    point: np.ndarray
    created_at: str
    updated_at: str
    events: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session registry with an optional JSON-lines log per session.

    Every event append is written and fsynced before the response leaves the
    service, so a restart replays to exactly the state a client last saw.
    """

    def __init__(self, log_dir: str | None):
        self.log_dir = Path(log_dir) if log_dir else None
        self.sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self._recover()

    # -- persistence ---------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.log_dir / f"{session_id}.jsonl"

    def _append_line(self, session_id: str, record: dict) -> None:
        if self.log_dir is None:
            return
        with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, allow_nan=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _recover(self) -> None:
        for path in sorted(self.log_dir.glob("*.jsonl")):
            try:
                lines = [json.loads(l) for l in path.read_text().splitlines() if l]
            except json.JSONDecodeError:
                continue  # truncated log; skip rather than refuse to start
            if not lines or lines[0].get("type") != "session":
                continue
            head = lines[0]
            model = load_model(head["model"])
            dataset_csv = head.get("dataset_csv")
            dataset = Dataset.from_csv(model.schema, dataset_csv) if dataset_csv else None
            state = SessionState(
                id=head["id"],
                model=model,
                model_doc=head["model"],
                dataset=dataset,
                dataset_csv=dataset_csv,
                point=model.schema.validate_point(head["point"]),
                created_at=head["created_at"],
                updated_at=head["created_at"],
            )
            for line in lines[1:]:
                if line.get("type") != "event":
                    continue
                event = line["event"]
                state.events.append(event)
                state.updated_at = event["timestamp"]
                if event["kind"] == "whatif":
                    state.point = model.schema.validate_point(event["response"]["point"])
            self.sessions[state.id] = state

    # -- API -----------------------------------------------------------------

    def create(self, model_doc: dict, dataset_csv: str | None, point) -> SessionState:
        model = load_model(model_doc)
        dataset = Dataset.from_csv(model.schema, dataset_csv) if dataset_csv else None
        validated = model.schema.point(point)
        state = SessionState(
            id=secrets.token_urlsafe(32),
            model=model,
            model_doc=model_doc,
            dataset=dataset,
            dataset_csv=dataset_csv,
            point=validated,
            created_at=_now(),
            updated_at=_now(),
        )
        with self._lock:
            self.sessions[state.id] = state
        self._append_line(
            state.id,
            {
                "type": "session",
                "id": state.id,
                "model": model_doc,
                "dataset_csv": dataset_csv,
                "point": [float(v) for v in validated],
                "created_at": state.created_at,
            },
        )
        return state

    def get(self, session_id: str) -> SessionState:
        state = self.sessions.get(session_id)
        if state is None:
            raise ApiError(404, "not_found", f"unknown session {session_id!r}")
        return state

    def append_event(self, state: SessionState, kind: str, request: dict,
                     response: dict, new_point=None) -> dict:
        """Validation happens before this call; the append itself cannot fail
        halfway (atomicity: failed requests never reach here)."""
        with state.lock:
            event = {
                "seq": len(state.events) + 1,
                "kind": kind,
                "request": request,
                "response": response,
                "timestamp": _now(),
            }
            state.events.append(event)
            state.updated_at = event["timestamp"]
            if new_point is not None:
                state.point = new_point
            self._append_line(state.id, {"type": "event", "event": event})
        return event


class JobRegistry:
    def __init__(self):
        self.jobs: dict[str, dict] = {}
        self._lock = threading.Lock()

    def register(self) -> str:
        token = secrets.token_urlsafe(16)
        with self._lock:
            self.jobs[token] = {"status": "pending", "result": None, "error": None}
        return token

    def finish(self, token: str, result: dict | None, error: dict | None) -> None:
        with self._lock:
            entry = self.jobs[token]
            entry["status"] = "failed" if error else "done"
            entry["result"] = result
            entry["error"] = error

    def get(self, token: str) -> dict:
        with self._lock:
            entry = self.jobs.get(token)
            if entry is None:
                raise ApiError(404, "not_found", f"unknown job {token!r}")
            return dict(entry)


def _session_view(state: SessionState) -> dict:
    prediction = state.model.score(state.point)
    return {
        "id": state.id,
        "schema": schema_to_documents(state.model.schema),
        "point": [float(v) for v in state.point],
        "named": state.model.schema.to_named(state.point),
        "prediction": prediction.to_document(),
        "classes": list(state.model.classes) if state.model.classes else None,
        "has_dataset": state.dataset is not None,
        "created_at": state.created_at,
        "updated_at": state.updated_at,
        "n_events": len(state.events),
    }


def _require(payload: dict, key: str, status: int = 400):
    if key not in payload:
        raise ApiError(status, "validation", f"missing field {key!r}", locus=key)
    return payload[key]


def _parse_distance(state: SessionState, doc: dict | None) -> DistanceConfig:
    doc = doc or {}
    schema = state.model.schema
    locked = []
    for name in doc.get("locked", []):
        locked.append(schema.index_of(name) if isinstance(name, str) else int(name))
    kind = doc.get("kind", "mad_weighted_l1")
    if kind == "l2":
        return DistanceConfig.l2(schema, locked)
    if kind == "custom_weights":
        return DistanceConfig.custom(_require(doc, "weights", 422), locked)
    if kind == "mad_weighted_l1":
        if state.dataset is not None:
            return DistanceConfig.mad_weighted(state.dataset, locked)
        return DistanceConfig.unit_l1(schema, locked)
    raise ApiError(422, "config", f"unknown distance kind {kind!r}")


def _parse_search(doc: dict | None, seed: int) -> SearchConfig:
    doc = doc or {}
    allowed = {
        "lambda_init", "lambda_growth", "max_outer", "inner_optimizer",
        "inner_step", "max_inner_evals", "restarts",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ApiError(422, "config", f"unknown search fields {sorted(unknown)}")
    return SearchConfig(seed=seed, **doc)


def _parse_target(doc: dict) -> TargetSpec:
    tolerance = doc.get("tolerance", 0.01)
    if "score" in doc:
        return TargetSpec(score=float(doc["score"]), tolerance=tolerance)
    if "class" in doc:
        return TargetSpec(target_class=doc["class"], tolerance=tolerance)
    raise ApiError(422, "config", "target needs 'score' or 'class'")


def _parse_scheme_baseline(state: SessionState, payload: dict):
    scheme = scheme_from_document(_require(payload, "scheme", 422))
    if payload.get("seed") is not None:
        scheme = Scheme(kind=scheme.kind, n=scheme.n, sigma=scheme.sigma,
                        seed=int(payload["seed"]))
    baseline = None
    if scheme.kind != "gradient":
        bdoc = _require(payload, "baseline", 422)
        baseline = resolve_baseline(
            state.model.schema,
            _require(bdoc, "strategy", 422),
            reference=bdoc.get("reference"),
            dataset=state.dataset,
        )
    return scheme, baseline


def _explanation_from_document(state: SessionState, doc: dict,
                               class_index: int | None) -> SurrogateExplanation:
    """Rebuild a SurrogateExplanation from its serialized document."""
    schema = state.model.schema
    scheme = scheme_from_document(doc["scheme"])
    baseline = None
    if doc["baseline"]["strategy"] != "none":
        baseline = resolve_baseline(
            schema,
            "reference" if doc["baseline"]["strategy"] == "reference" else doc["baseline"]["strategy"],
            reference=doc["baseline"]["values"],
            dataset=state.dataset,
        )
    return SurrogateExplanation(
        schema=schema,
        anchor=schema.validate_point(doc["anchor"]),
        weights=np.asarray(doc["weights"], dtype=np.float64),
        intercept=float(doc["intercept"]),
        scheme=scheme,
        baseline=baseline,
        mapping="raw" if scheme.kind == "gradient" else "binary_cube",
        diagnostics=dict(doc.get("diagnostics", {})),
        class_index=class_index,
    )


def create_app(log_dir: str | None = None, sync_wait: float = DEFAULT_SYNC_WAIT,
               ui_dir: str | None = None,
               max_body_bytes: int = DEFAULT_MAX_BODY) -> FastAPI:
    app = FastAPI(title="modelprobe", version=__version__, docs_url=None, redoc_url=None)
    store = SessionStore(log_dir)
    jobs = JobRegistry()
    executor = ThreadPoolExecutor(max_workers=4, thread_name_prefix="modelprobe-job")
    app.state.store = store
    app.state.jobs = jobs

    @app.exception_handler(ModelProbeError)
    async def _handle_engine_error(request: Request, exc: ModelProbeError):
        return _api_error_from(exc).response()

    async def read_json(request: Request) -> dict:
        declared = request.headers.get("content-length")
        if declared and int(declared) > max_body_bytes:
            raise ApiError(413, "too_large", f"body exceeds {max_body_bytes} bytes")
        body = await request.body()
        if len(body) > max_body_bytes:
            raise ApiError(413, "too_large", f"body exceeds {max_body_bytes} bytes")
        try:
            payload = json.loads(body or b"{}")
        except json.JSONDecodeError as exc:
            raise ApiError(
                400, "parse", f"invalid JSON: {exc.msg}",
                locus=f"line {exc.lineno} column {exc.colno}",
            ) from None
        if not isinstance(payload, dict):
            raise ApiError(400, "parse", "request body must be a JSON object")
        return payload

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "engine_version": __version__}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        payload = await read_json(request)
        model_doc = _require(payload, "model")
        dataset_csv = None
        if payload.get("dataset") is not None:
            dataset_csv = _require(payload["dataset"], "csv")
        point = _require(payload, "point")
        state = await run_in_threadpool(store.create, model_doc, dataset_csv, point)
        return _session_view(state)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return await run_in_threadpool(lambda: _session_view(store.get(session_id)))

    @app.get("/sessions/{session_id}/history")
    async def get_history(session_id: str):
        state = store.get(session_id)
        with state.lock:
            return {"events": list(state.events)}

    @app.post("/sessions/{session_id}/whatif")
    async def whatif(session_id: str, request: Request):
        payload = await read_json(request)
        state = store.get(session_id)
        edits = _require(payload, "edits")
        if not isinstance(edits, dict):
            raise ApiError(400, "validation", "edits must be a {feature: value} object")

        def work():
            schema = state.model.schema
            named = schema.to_named(state.point)
            for name, value in edits.items():
                if name not in schema.names:
                    raise ApiError(400, "validation", f"unknown feature {name!r}", locus=name)
                named[name] = value
            new_point = schema.point(named)  # raises 400 on bounds violations
            old = state.model.score(state.point)
            new = state.model.score(new_point)
            delta = None
            if state.model.output_kind == "score":
                delta = new.score - old.score
            response = {
                "old": old.to_document(),
                "new": new.to_document(),
                "delta": delta,
                "point": [float(v) for v in new_point],
                "named": schema.to_named(new_point),
            }
            event = store.append_event(state, "whatif", {"edits": edits}, response,
                                       new_point=new_point)
            return {**response, "seq": event["seq"]}

        return await run_in_threadpool(work)

    @app.post("/sessions/{session_id}/attribution")
    async def request_attribution(session_id: str, request: Request):
        payload = await read_json(request)
        state = store.get(session_id)

        def work():
            scheme, baseline = _parse_scheme_baseline(state, payload)
            class_index = payload.get("class_index")
            explanation = attribute(
                state.model, state.point, scheme, baseline, class_index=class_index
            )
            doc = explanation.to_document(seed=payload.get("seed"))
            event = store.append_event(state, "attribution", payload, doc)
            return {**doc, "seq": event["seq"]}

        return await run_in_threadpool(work)

    @app.post("/sessions/{session_id}/fidelity")
    async def request_fidelity(session_id: str, request: Request):
        payload = await read_json(request)
        state = store.get(session_id)

        def work():
            seed = int(payload.get("seed", 0))
            radii = _require(payload, "radii", 422)
            if not isinstance(radii, list) or not radii:
                raise ApiError(422, "config", "radii must be a non-empty ascending list")
            threshold = float(payload.get("threshold", 0.95))
            n_samples = int(payload.get("n_samples", 400))
            class_index = payload.get("class_index")
            expl_ref = _require(payload, "explanation", 422)
            if "event_seq" in expl_ref:
                seq = int(expl_ref["event_seq"])
                with state.lock:
                    matches = [e for e in state.events
                               if e["seq"] == seq and e["kind"] == "attribution"]
                if not matches:
                    raise ApiError(422, "config", f"event {seq} is not an attribution event")
                if class_index is None:
                    class_index = matches[0]["request"].get("class_index")
                explanation = _explanation_from_document(
                    state, matches[0]["response"], class_index
                )
            else:
                scheme, baseline = _parse_scheme_baseline(state, expl_ref)
                explanation = attribute(
                    state.model, state.point, scheme, baseline, class_index=class_index
                )
            profile = validity_profile(
                state.model, explanation, state.point, radii, threshold,
                n_samples, seed, dataset=state.dataset,
            )
            scales = (state.dataset.effective_scale() if state.dataset is not None
                      else np.ones(state.model.schema.dimension))
            region = RegionSpec.around(
                state.model.schema, state.point, float(radii[-1]), n_samples, seed,
                scales=scales,
            )
            report = classify_analogies(state.model, explanation, region)
            doc = documents.fidelity_document(
                profile, report, n_samples, seed,
                config_echo={"radii": radii, "threshold": threshold},
            )
            event = store.append_event(state, "fidelity", payload, doc)
            return {**doc, "seq": event["seq"]}

        return await run_in_threadpool(work)

    @app.post("/sessions/{session_id}/counterfactual")
    async def request_counterfactual(session_id: str, request: Request):
        payload = await read_json(request)
        state = store.get(session_id)
        seed = int(payload.get("seed", 0))
        target = _parse_target(_require(payload, "target", 422))
        distance = _parse_distance(state, payload.get("distance"))
        try:
            search = _parse_search(payload.get("search"), seed)
        except (TypeError, ConfigError) as exc:
            raise ApiError(422, "config", str(exc)) from None
        anchor = state.point.copy()  # the search never moves current_point

        def work():
            result = find_counterfactual(state.model, anchor, target, distance, search)
            statement = render_contrast(state.model, anchor, result)
            doc = documents.counterfactual_document(
                result, statement, target, distance, search, seed
            )
            event = store.append_event(state, "counterfactual", payload, doc)
            return {**doc, "seq": event["seq"]}

        future = executor.submit(work)
        try:
            return await run_in_threadpool(future.result, sync_wait)
        except concurrent.futures.TimeoutError:
            token = jobs.register()

            def finalize(fut):
                try:
                    jobs.finish(token, fut.result(), None)
                except Exception as exc:  # surfaced via the job document
                    api = _api_error_from(exc)
                    jobs.finish(token, None, {
                        "code": api.code, "message": str(api), "locus": api.locus,
                    })

            future.add_done_callback(finalize)
            return JSONResponse(status_code=202, content={"job": token, "status": "pending"})

    @app.get("/jobs/{token}")
    async def get_job(token: str):
        return jobs.get(token)

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def app_from_env() -> FastAPI:
    return create_app(
        log_dir=os.environ.get("LOG_DIR", DEFAULT_LOG_DIR),
        sync_wait=float(os.environ.get("SYNC_WAIT_SECONDS", DEFAULT_SYNC_WAIT)),
        ui_dir=os.environ.get("UI_DIR") or _default_ui_dir(),
        max_body_bytes=int(os.environ.get("MAX_BODY_BYTES", DEFAULT_MAX_BODY)),
    )


def _default_ui_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def run(bind: str = DEFAULT_BIND, log_dir: str | None = None,
        ui_dir: str | None = None) -> None:
    """Entry point for `modelprobe serve`."""
    import uvicorn

    host, _, port = bind.rpartition(":")
    app = create_app(
        log_dir=log_dir if log_dir is not None else os.environ.get("LOG_DIR", DEFAULT_LOG_DIR),
        sync_wait=float(os.environ.get("SYNC_WAIT_SECONDS", DEFAULT_SYNC_WAIT)),
        ui_dir=ui_dir or os.environ.get("UI_DIR") or _default_ui_dir(),
        max_body_bytes=int(os.environ.get("MAX_BODY_BYTES", DEFAULT_MAX_BODY)),
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
