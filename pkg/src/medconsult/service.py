"""HTTP facade: sessions, turns, records, and drug images over JSON/HTTP.

All endpoints live under /v1. Errors are ``{code, message}`` JSON with the
status codes listed below; the code set is closed:

    bad_request (400), empty_utterance (400), unknown_session (404),
    unknown_image (404), session_closed (409), session_not_closed (409),
    no_diagnosis (409), not_a_candidate (409), store_unavailable (503),
    internal (500)

Requests within one session are serialized by a per-session lock; distinct
sessions run concurrently against the shared read-only graph. Session state is
persisted after every turn as a canonical-JSON document, so a killed and
restarted server resumes mid-consultation sessions exactly.
"""

from __future__ import annotations

import hashlib
import mimetypes
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import crm, dialogue
from .config import AppConfig
from .crm import CrmState, Phase
from .dialogue import ConsultationEngine, HttpGenerator, Utterance
from .errors import (
    BadRequest,
    EmptyUtterance,
    MedconsultError,
    NoDiagnosis,
    NotACandidate,
    SessionClosed,
    SessionNotClosed,
    StoreUnavailable,
    UnknownImage,
    UnknownSession,
)
from .kg import KnowledgeGraph, load_kg
from .nlu import LinkerConfig
from .store import SessionStore

_STATUS_BY_ERROR: list[tuple[type[MedconsultError], int]] = [
    (BadRequest, 400),
    (EmptyUtterance, 400),
    (UnknownSession, 404),
    (UnknownImage, 404),
    (SessionClosed, 409),
    (SessionNotClosed, 409),
    (NoDiagnosis, 409),
    (NotACandidate, 409),
    (StoreUnavailable, 503),
]


def _status_for(error: MedconsultError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(error, cls):
            return status
    return 500


class SessionIn(BaseModel):
    seed: int | None = None


class MessageIn(BaseModel):
    text: str = ""


def image_ref(uri: str) -> str:
    """Stable opaque reference for an image locator; survives restarts."""
    return hashlib.sha1(uri.encode("utf-8")).hexdigest()[:16]


class ServiceState:
    """Everything one server process shares across requests."""

    def __init__(self, config: AppConfig, kg: KnowledgeGraph, engine: ConsultationEngine):
        self.config = config
        self.kg = kg
        self.engine = engine
        self.store = SessionStore(config.store_dir)
        self.asset_root = config.resolved_asset_root()
        self.image_refs = {
            image_ref(img.image_uri): img.image_uri
            for images in kg.images.values()
            for img in images
        }
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    # -- persisted session documents -----------------------------------------

    def create_session(self, seed: int | None = None) -> dict:
        session_id = (
            crm.session_id_from_seed(seed) if seed is not None else crm.new_session_id()
        )
        state = self.engine.new_session(session_id)
        doc = {
            "session_id": session_id,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "crm": crm.to_document(state),
            "transcript": [],
        }
        self.store.save(session_id, doc)
        return doc

    def load_session(self, session_id: str) -> tuple[dict, CrmState, list[Utterance]]:
        doc = self.store.load(session_id)
        state = crm.restore(doc["crm"])
        transcript = [dialogue.utterance_from_document(u) for u in doc["transcript"]]
        return doc, state, transcript

    def save_session(self, doc: dict, state: CrmState, transcript: list[Utterance]) -> None:
        doc["crm"] = crm.to_document(state)
        doc["transcript"] = [dialogue.utterance_to_document(u) for u in transcript]
        self.store.save(doc["session_id"], doc)

    def attachment_payload(self, utterance: Utterance) -> list[dict]:
        out = []
        for img in utterance.attachments:
            ref = image_ref(img.image_uri)
            out.append(
                {
                    "drug": img.drug,
                    "drug_name": self.kg.name_of(img.drug),
                    "image_uri": img.image_uri,
                    "ref": ref,
                    "url": f"/v1/images/{ref}",
                }
            )
        return out

    def reply_payload(self, utterance: Utterance) -> dict:
        return {
            "speaker": utterance.speaker,
            "text": utterance.text,
            "turn": utterance.turn,
            "attachments": self.attachment_payload(utterance),
            "fallback": utterance.fallback,
        }


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    kg = load_kg(config.resolved_graph_dir())
    generator = (
        HttpGenerator(config.generator_url, config.generator_timeout)
        if config.generator_url
        else None
    )
    engine = ConsultationEngine(
        kg,
        templates=dialogue.TemplateTable.load(config.resolved_templates_path()),
        linker=LinkerConfig(threshold=config.link_threshold),
        generator=generator,
        history_window=config.history_window,
        locale=config.locale,
    )
    svc = ServiceState(config, kg, engine)
    app = FastAPI(title="medconsult", version="0.1.0")
    app.state.svc = svc

    @app.exception_handler(MedconsultError)
    async def handle_domain_error(_request: Request, error: MedconsultError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(error),
            content={"code": error.code, "message": error.message},
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "locale": svc.engine.locale,
            "version": "0.1.0",
            "graph": {kind.value: count for kind, count in svc.kg.stats.items()},
        }

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: SessionIn | None = None) -> dict:
        doc = svc.create_session(seed=body.seed if body else None)
        return {
            "session_id": doc["session_id"],
            "created_at": doc["created_at"],
            "phase": doc["crm"]["phase"],
            "turn": doc["crm"]["turn"],
        }

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        doc, state, transcript = svc.load_session(session_id)
        return {
            "session_id": session_id,
            "created_at": doc["created_at"],
            "phase": state.phase.value,
            "turn": state.turn,
            "candidates_count": len(state.candidate_diseases),
            "transcript": [svc.reply_payload(u) for u in transcript],
        }

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageIn) -> dict:
        if not body.text or not body.text.strip():
            raise BadRequest("message text must be non-empty")
        with svc.lock_for(session_id):
            doc, state, transcript = svc.load_session(session_id)
            reply = svc.engine.step(state, transcript, body.text)
            svc.save_session(doc, state, transcript)
        payload = {
            "reply": svc.reply_payload(reply),
            "phase": state.phase.value,
            "candidates_count": len(state.candidate_diseases),
        }
        if state.phase is Phase.ELICITATION and state.pending_symptom is not None:
            payload["asked_symptom"] = svc.kg.name_of(state.pending_symptom)
        return payload

    @app.get("/v1/sessions/{session_id}/record")
    def get_record(session_id: str) -> Response:
        with svc.lock_for(session_id):
            _doc, state, transcript = svc.load_session(session_id)
            record = svc.engine.generate_record(state, transcript)
        return Response(
            content=dialogue.record_to_json(record).encode("utf-8"),
            media_type="application/json",
        )

    @app.get("/v1/images/{ref}")
    def get_drug_image(ref: str):
        uri = svc.image_refs.get(ref)
        if uri is None:
            raise UnknownImage(f"unknown image reference: {ref}")
        if "://" in uri:
            return RedirectResponse(url=uri, status_code=302)
        root = svc.asset_root.resolve()
        path = (root / uri).resolve()
        if not str(path).startswith(str(root)) or not path.is_file():
            raise UnknownImage(f"image asset not available: {ref}")
        media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=media_type)

    if config.webui_dir and Path(config.webui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.webui_dir, html=True), name="webui")

    return app


def run(config: AppConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
