"""Wire API (``api-v1``) over the adjudication pipeline and session store.

Resource-oriented JSON endpoints:

    POST /cases                     submit a query record; runs the full pipeline
    GET  /cases                     session queue summaries
    GET  /cases/{id}                full session: record, graph, trace, history
    POST /cases/{id}/evidence       answer an information request; re-adjudicates
    GET  /cases/{id}/recommendations
    POST /kb/cases                  ingest a historical record into the store
    GET  /kb/stats
    GET  /metrics                   service counters
    GET  /console/*                 static reviewer console assets, when built

Status codes: 400 malformed input, 404 unknown case, 409 duplicate or wrong
state, 500 pipeline failure (the body carries the failing stage). Handlers are
stateless over the shared store; per-case mutation is serialized by the
session store's case locks.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import re
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .errors import (
    AnnotationSyntax,
    DuplicateCase,
    DuplicateCaseId,
    DuplicateEvidenceId,
    EafdError,
    ExtractionFailed,
    MalformedRecord,
    MissingField,
    PipelineFailure,
    UnknownCase,
    UnresolvedMakerFactor,
    ValidationFailed,
    WrongState,
)
from .extract import extract_graph, refine_actions
from .graph import EvidenceNode, Lane, SourceType
from .kb import KbEntry, KnowledgeBase, build_conflict_edges
from .pipeline import Pipeline
from .records import parse_case_record, render_case_record
from .serialize import edge_payload, node_payload
from .sessions import CaseSession, SessionStore, outcome_payload

log = logging.getLogger(__name__)

API_FORMAT = "api-v1"

_STATUS = (
    (PipelineFailure, 500),
    ((UnknownCase,), 404),
    ((DuplicateCase, DuplicateCaseId, WrongState, DuplicateEvidenceId), 409),
    ((MalformedRecord, MissingField, AnnotationSyntax, ExtractionFailed,
      UnresolvedMakerFactor, ValidationFailed), 400),
)


def _status_for(exc: Exception) -> int:
    for types, code in _STATUS:
        if isinstance(exc, types):
            return code
    return 400 if isinstance(exc, EafdError) else 500


def graph_payload(graph) -> dict:
    return {
        "case_id": graph.case_id,
        "nodes": [node_payload(n) for n in graph.nodes],
        "edges": [edge_payload(graph, e) for e in graph.edges],
    }


def session_summary(session: CaseSession) -> dict:
    latest = session.latest
    return {
        "case_id": session.case_id,
        "state": session.state.value,
        "verdict": latest.outcome.verdict.value,
        "recommendation_count": len(latest.outcome.recommendations),
        "submitted_at": session.outcome_history[0].timestamp,
        "updated_at": latest.timestamp,
    }


def session_payload(session: CaseSession) -> dict:
    latest = session.latest
    payload = session_summary(session)
    payload.update({
        "record": json.loads(render_case_record(session.record)),
        "graph": graph_payload(session.current_graph),
        "recommendations": outcome_payload(latest.outcome)["recommendations"],
        "trace": outcome_payload(latest.outcome)["trace"],
        "outcome_history": [
            {"timestamp": ev.timestamp,
             "verdict": ev.outcome.verdict.value,
             "recommendations": outcome_payload(ev.outcome)["recommendations"]}
            for ev in session.outcome_history
        ],
    })
    return payload


def _parse_evidence_items(payload: dict) -> list[EvidenceNode]:
    items = payload.get("evidence_items")
    if not isinstance(items, list) or not items:
        raise MalformedRecord("body must carry a non-empty evidence_items list")
    nodes = []
    for i, raw in enumerate(items):
        try:
            nodes.append(EvidenceNode(raw["id"], Lane.CHECKER, raw["content"],
                                      raw["source_ref"], SourceType(raw["source_type"])))
        except (KeyError, ValueError, TypeError, EafdError) as exc:
            raise MalformedRecord(f"evidence_items[{i}]: {exc}") from exc
    return nodes


class EafdService:
    """Application facade shared by all request handler threads."""

    def __init__(self, kb: KnowledgeBase, pipeline: Pipeline,
                 store: SessionStore, console_dir: str | None = None):
        self.kb = kb
        self.pipeline = pipeline
        self.store = store
        self.console_dir = Path(console_dir) if console_dir else None
        self._kb_write_lock = threading.Lock()

    # --- operations ------------------------------------------------------

    def submit_case(self, body: bytes) -> dict:
        record = parse_case_record(body)
        if not record.is_query:
            raise MalformedRecord(
                f"case {record.case_id!r} carries a checker record; submit it "
                "to /kb/cases instead")
        if record.case_id in self.store:
            raise DuplicateCase(f"case {record.case_id!r} already submitted")
        result = self.pipeline.adjudicate_case(record)
        session = self.store.create(record, result.graph, result.outcome)
        return session_payload(session)

    def respond_rmi(self, case_id: str, body: bytes) -> dict:
        try:
            payload = json.loads(body)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON body: {exc.msg}", offset=exc.pos) from exc
        items = _parse_evidence_items(payload)
        with self.store.case_lock(case_id):
            session = self.store.get(case_id)
            if session.state.value != "awaiting_info":
                raise WrongState(f"case {case_id!r} is {session.state.value}, "
                                 "not awaiting information")
            result = self.pipeline.respond(session.record, session.current_graph, items)
            session = self.store.record_response(case_id, result.graph, result.outcome)
        return session_payload(session)

    def ingest_historical(self, body: bytes) -> dict:
        record = parse_case_record(body)
        if record.is_query:
            raise MalformedRecord(
                f"case {record.case_id!r} has no checker record; the knowledge "
                "base only holds resolved history")
        graph = extract_graph(record, self.pipeline.extractor)
        (graph,), _ = refine_actions([graph])
        graph = build_conflict_edges(graph)
        summary = self.pipeline.summarizer.summarize(record)
        vector = self.pipeline.embedder.embed(summary.rendered)
        with self._kb_write_lock:
            self.kb.add(KbEntry(graph, summary, vector, record.timestamp))
        return {"case_id": record.case_id, "kb_size": len(self.kb)}

    def metrics(self) -> dict:
        sessions = self.store.sessions()
        by_state: dict[str, int] = {}
        by_verdict: dict[str, int] = {}
        for s in sessions:
            by_state[s.state.value] = by_state.get(s.state.value, 0) + 1
            verdict = s.latest.outcome.verdict.value
            by_verdict[verdict] = by_verdict.get(verdict, 0) + 1
        return {
            "format": API_FORMAT,
            "sessions": {"total": len(sessions), "by_state": by_state,
                         "by_verdict": by_verdict},
            "kb": {"count": len(self.kb)},
        }


class _Handler(BaseHTTPRequestHandler):
    service: EafdService  # injected by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    # --- plumbing ------------------------------------------------------------

    def _send(self, code: int, payload: dict | bytes, content_type="application/json"):
        body = (json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
                if isinstance(payload, dict) else payload)
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _fail(self, exc: Exception):
        code = _status_for(exc)
        if code == 500:
            log.exception("request failed")
        payload = {"error": str(exc)}
        if isinstance(exc, PipelineFailure):
            payload["stage"] = exc.stage
        self._send(code, payload)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length)

    def _serve_console(self, rel: str):
        root = self.service.console_dir
        if root is None:
            self._send(404, {"error": "console assets not configured"})
            return
        target = (root / (rel or "index.html")).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send(404, {"error": f"no console asset {rel!r}"})
            return
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), content_type=ctype)

    # --- routing ---------------------------------------------------------------

    def do_GET(self):  # noqa: N802 - http.server API
        try:
            path = self.path.split("?", 1)[0]
            if path == "/cases":
                sessions = [session_summary(s) for s in self.service.store.sessions()]
                self._send(200, {"sessions": sessions})
            elif m := re.fullmatch(r"/cases/([^/]+)", path):
                case_id = urllib.parse.unquote(m.group(1))
                self._send(200, session_payload(self.service.store.get(case_id)))
            elif m := re.fullmatch(r"/cases/([^/]+)/recommendations", path):
                session = self.service.store.get(urllib.parse.unquote(m.group(1)))
                recs = outcome_payload(session.latest.outcome)["recommendations"]
                self._send(200, {"case_id": session.case_id, "recommendations": recs})
            elif path == "/kb/stats":
                self._send(200, self.service.kb.stats())
            elif path == "/metrics":
                self._send(200, self.service.metrics())
            elif path == "/console" or path == "/console/":
                self._serve_console("index.html")
            elif path.startswith("/console/"):
                self._serve_console(path[len("/console/"):])
            else:
                self._send(404, {"error": f"no route {path!r}"})
        except Exception as exc:  # noqa: BLE001 - boundary
            self._fail(exc)

    def do_POST(self):  # noqa: N802 - http.server API
        try:
            path = self.path.split("?", 1)[0]
            if path == "/cases":
                self._send(201, self.service.submit_case(self._body()))
            elif m := re.fullmatch(r"/cases/([^/]+)/evidence", path):
                case_id = urllib.parse.unquote(m.group(1))
                self._send(200, self.service.respond_rmi(case_id, self._body()))
            elif path == "/kb/cases":
                self._send(201, self.service.ingest_historical(self._body()))
            else:
                self._send(404, {"error": f"no route {path!r}"})
        except Exception as exc:  # noqa: BLE001 - boundary
            self._fail(exc)


def make_server(service: EafdService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(kb_dir: str, listen: str = "127.0.0.1:8085",
                  console_dir: str | None = None, templates=None) -> None:
    kb = KnowledgeBase.open(kb_dir)
    pipeline = Pipeline(kb, templates=templates)
    store = SessionStore(Path(kb_dir) / "sessions.log")
    service = EafdService(kb, pipeline, store, console_dir)
    host, _, port = listen.rpartition(":")
    server = make_server(service, host or "127.0.0.1", int(port))
    log.info("serving on %s:%s (kb=%s, %d cases)", *server.server_address,
             kb_dir, len(kb))
    server.serve_forever()
