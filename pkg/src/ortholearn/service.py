"""HTTP/JSON session service backing the interactive teaching console."""

from __future__ import annotations

import base64
import binascii
import io
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel

from .clouds import DatasetView, load_cloud, load_dataset_index, parse_pcd
from .config import PipelineConfig
from .errors import OrthoLearnError
from .features import ObjectRepresentation, RepresentationDetail
from .learner import PerceptualMemory, Prediction
from .projection import VIEW_IDS, depth_to_png_array
from .teacher import TeacherConfig, window_accuracy


class CreateSessionRequest(BaseModel):
    dataset: str | None = None
    mode: str = "dataset"          # "dataset" | "upload"
    shuffle: bool = False
    seed: int = 0


class NextRequest(BaseModel):
    pcd_base64: str | None = None


class LabelRequest(BaseModel):
    label: str


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class CurrentObject:
    cloud_ref: str
    detail: RepresentationDetail
    prediction: Prediction
    consumed: bool = False


@dataclass
class Session:
    id: str
    mode: str
    pipeline: ObjectRepresentation
    memory: PerceptualMemory
    views: list[DatasetView] = field(default_factory=list)
    cursor: int = 0
    current: CurrentObject | None = None
    outcomes: list[bool] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def remaining(self) -> int:
        return len(self.views) - self.cursor

    def append_event(self, action: str, **payload) -> dict:
        event = {"index": len(self.events) + 1, "action": action, **payload}
        self.events.append(event)
        return event

    def window_accuracy(self) -> float:
        cfg = TeacherConfig()
        return window_accuracy(self.outcomes, max(len(self.memory), 1), cfg)


def _png_b64_uint16(pixels: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(pixels).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _png_b64_rgb(pixels: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _prediction_payload(pred: Prediction) -> dict:
    return {
        "label": pred.label,
        "distance": None if pred.distance == float("inf") else pred.distance,
        "runner_up": None if pred.runner_up is None else
            {"label": pred.runner_up[0], "distance": pred.runner_up[1]},
    }


def _current_payload(session: Session, with_images: bool = True) -> dict:
    cur = session.current
    detail = cur.detail
    payload = {
        "cloud_ref": cur.cloud_ref,
        "selected_view": detail.selected_view,
        "entropy": {
            "entropies": detail.entropy.entropies,
            "selected": detail.entropy.selected,
            "bins": detail.entropy.bins,
        },
        "prediction": _prediction_payload(cur.prediction),
        "consumed": cur.consumed,
    }
    if with_images:
        payload["depth_views"] = {
            view_id: _png_b64_uint16(depth_to_png_array(detail.triplet.depth[view_id]))
            for view_id in VIEW_IDS
        }
        payload["color_view"] = _png_b64_rgb(
            detail.triplet.color[detail.selected_view].pixels)
    return payload


def _state_payload(session: Session, with_images: bool = True) -> dict:
    return {
        "id": session.id,
        "mode": session.mode,
        "current": _current_payload(session, with_images) if session.current else None,
        "categories": _categories_payload(session),
        "window_accuracy": session.window_accuracy(),
        "asks": len(session.outcomes),
        "correct": int(sum(session.outcomes)),
        "remaining": session.remaining,
        "log_length": len(session.events),
    }


def _categories_payload(session: Session) -> list[dict]:
    return [{"label": label, "instances": count}
            for label, count in session.memory.counts().items()]


def create_app(config: PipelineConfig | None = None,
               default_dataset: str | None = None,
               memory_snapshot: str | None = None,
               snapshot_dir: str | None = None) -> FastAPI:
    """Build the service; sessions are in-memory, one learner each.

    ``memory_snapshot`` seeds every new session from a saved memory;
    ``snapshot_dir`` persists each session's memory there on shutdown.
    """
    from contextlib import asynccontextmanager

    from fastapi.middleware.cors import CORSMiddleware

    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if snapshot_dir:
            out = Path(snapshot_dir)
            out.mkdir(parents=True, exist_ok=True)
            with store_lock:
                for session in sessions.values():
                    session.memory.save(out / f"{session.id}.bin")

    app = FastAPI(title="ortholearn teaching console API", lifespan=lifespan)
    app.state.sessions = sessions
    # the browser console is served from its own origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    pipeline = ObjectRepresentation(config or PipelineConfig())

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "bad_request", "message": str(exc.errors())})

    @app.exception_handler(OrthoLearnError)
    async def domain_error_handler(request: Request, exc: OrthoLearnError):
        return JSONResponse(status_code=422, content={
            "code": type(exc).__name__, "message": str(exc)})

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        if body.mode not in ("dataset", "upload"):
            raise ApiError(400, "bad_request", f"unknown mode {body.mode!r}")
        views: list[DatasetView] = []
        if body.mode == "dataset":
            root = body.dataset or default_dataset
            if not root:
                raise ApiError(400, "bad_request",
                               "dataset mode needs a dataset root")
            index = load_dataset_index(root)
            views = list(index.views)
            if body.shuffle:
                rng = np.random.default_rng(body.seed)
                views = [views[i] for i in rng.permutation(len(views))]
        memory = (PerceptualMemory.load(memory_snapshot)
                  if memory_snapshot else PerceptualMemory(
                      reject_distance=pipeline.config.reject_distance))
        session = Session(id=uuid.uuid4().hex[:12], mode=body.mode,
                          pipeline=pipeline, memory=memory, views=views)
        with store_lock:
            sessions[session.id] = session
        return {"id": session.id, "mode": session.mode,
                "n_views": len(views), "categories": _categories_payload(session)}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        # reads never take the session lock, so a teach cannot block them
        return _state_payload(get_session(session_id))

    @app.post("/sessions/{session_id}/next")
    def advance(session_id: str, body: NextRequest | None = None):
        session = get_session(session_id)
        with session.lock:
            previous = session.current
            if previous is not None and not previous.consumed:
                # Moving on without correcting counts a known prediction as
                # implicitly confirmed; unknown predictions are skipped.
                if previous.prediction.label is not None:
                    session.outcomes.append(True)
            if session.mode == "upload":
                if body is None or not body.pcd_base64:
                    raise ApiError(400, "bad_request",
                                   "upload mode needs pcd_base64 in the body")
                try:
                    raw = base64.b64decode(body.pcd_base64, validate=True)
                except (ValueError, binascii.Error) as exc:
                    raise ApiError(400, "bad_request", f"invalid base64: {exc}")
                cloud = parse_pcd(raw)
                if not cloud.source_id:
                    cloud.source_id = f"upload-{len(session.events) + 1}"
                cloud_ref = cloud.source_id
            else:
                if session.cursor >= len(session.views):
                    raise ApiError(409, "end_of_data", "no views remain")
                view = session.views[session.cursor]
                session.cursor += 1
                cloud = load_cloud(view.path)
                cloud_ref = str(view.path)
            detail = session.pipeline.describe(cloud)
            prediction = session.memory.classify(detail.feature)
            session.current = CurrentObject(cloud_ref=cloud_ref, detail=detail,
                                            prediction=prediction)
            session.append_event(
                "next", cloud_ref=cloud_ref,
                predicted=prediction.label,
                distance=None if prediction.distance == float("inf")
                else prediction.distance)
            payload = _state_payload(session)
        return payload

    def _apply_label(session_id: str, label: str, action: str):
        session = get_session(session_id)
        with session.lock:
            cur = session.current
            if cur is None or cur.consumed:
                raise ApiError(409, "no_current_object",
                               f"{action} needs a fresh object; call next first")
            if action == "teach":
                session.memory.teach(label, cur.detail.feature)
            else:
                session.memory.correct(label, cur.detail.feature)
            cur.consumed = True
            if cur.prediction.label is not None:
                session.outcomes.append(cur.prediction.label == label)
            session.append_event(action, cloud_ref=cur.cloud_ref, label=label,
                                 predicted=cur.prediction.label)
            return _state_payload(session)

    @app.post("/sessions/{session_id}/teach")
    def teach(session_id: str, body: LabelRequest):
        return _apply_label(session_id, body.label, "teach")

    @app.post("/sessions/{session_id}/correct")
    def correct(session_id: str, body: LabelRequest):
        return _apply_label(session_id, body.label, "correct")

    @app.get("/sessions/{session_id}/categories")
    def categories(session_id: str):
        return _categories_payload(get_session(session_id))

    @app.get("/sessions/{session_id}/log")
    def log(session_id: str):
        events = list(get_session(session_id).events)
        return {"events": events, "length": len(events)}

    return app


def replay_log(events: list[dict], pipeline: ObjectRepresentation) -> PerceptualMemory:
    """Rebuild a session's memory from its event log (dataset mode only)."""
    memory = PerceptualMemory()
    for event in events:
        if event["action"] in ("teach", "correct"):
            cloud = load_cloud(Path(event["cloud_ref"]))
            memory.teach(event["label"], pipeline(cloud))
    return memory
