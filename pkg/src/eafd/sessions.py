"""Per-case adjudication sessions with append-only event-log persistence.

One session tracks one submitted query case: its record, the current graph,
and the append-only outcome history. State is derived, never stored
separately: a session whose latest verdict asks for more information is
awaiting it; otherwise it is adjudicated. Every transition is committed as a
single log line (``session-log-v1``), so replaying the log after a crash
reconstructs exactly the committed histories.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .errors import DuplicateCase, UnknownCase, WrongState
from .graph import CaseGraph, Verdict
from .reasoner import AdjudicationOutcome, Recommendation, Trace
from .records import CaseRecord, parse_case_record, render_case_record
from .serialize import parse_graph, render_graph

FORMAT = "session-log-v1"


class SessionState(str, Enum):
    PENDING = "pending"
    ADJUDICATED = "adjudicated"
    AWAITING_INFO = "awaiting_info"
    CLOSED = "closed"


@dataclass(frozen=True)
class OutcomeEvent:
    timestamp: str
    outcome: AdjudicationOutcome


@dataclass
class CaseSession:
    case_id: str
    record: CaseRecord
    current_graph: CaseGraph
    outcome_history: list[OutcomeEvent] = field(default_factory=list)

    @property
    def state(self) -> SessionState:
        if not self.outcome_history:
            return SessionState.PENDING
        latest = self.outcome_history[-1].outcome.verdict
        return (SessionState.AWAITING_INFO if latest is Verdict.RMI
                else SessionState.ADJUDICATED)

    @property
    def latest(self) -> OutcomeEvent:
        return self.outcome_history[-1]


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def outcome_payload(outcome: AdjudicationOutcome) -> dict:
    return {
        "verdict": outcome.verdict.value,
        "recommendations": [
            {"action": r.action, "canonical_key": r.canonical_key,
             "request_text": r.request_text}
            for r in outcome.recommendations
        ],
        "trace": {"case_id": outcome.trace.case_id, "steps": list(outcome.trace.steps)},
    }


def outcome_from_payload(payload: dict) -> AdjudicationOutcome:
    return AdjudicationOutcome(
        Verdict(payload["verdict"]),
        tuple(Recommendation(r["action"], r["canonical_key"], r["request_text"])
              for r in payload["recommendations"]),
        Trace(payload["trace"]["case_id"], tuple(payload["trace"]["steps"])),
    )


class SessionStore:
    """Thread-safe session registry. Mutations per case are serialized by a
    per-case lock; the log write happens inside the critical section so
    concurrent responders observe a linear history."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._sessions: dict[str, CaseSession] = {}
        self._registry_lock = threading.Lock()
        self._case_locks: dict[str, threading.Lock] = {}
        if self.path is not None and self.path.exists():
            self._replay()

    # --- locking -----------------------------------------------------------

    def case_lock(self, case_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._case_locks.setdefault(case_id, threading.Lock())

    # --- persistence ---------------------------------------------------------

    def _append(self, event: dict) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self) -> None:
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                case_id = event["case_id"]
                graph = parse_graph(event["graph"])
                outcome = outcome_from_payload(event["outcome"])
                if event["event"] == "submitted":
                    record = parse_case_record(event["record"])
                    self._sessions[case_id] = CaseSession(
                        case_id, record, graph,
                        [OutcomeEvent(event["ts"], outcome)])
                elif event["event"] == "evidence":
                    session = self._sessions[case_id]
                    session.current_graph = graph
                    session.outcome_history.append(OutcomeEvent(event["ts"], outcome))

    # --- transitions -----------------------------------------------------------

    def create(self, record: CaseRecord, graph: CaseGraph,
               outcome: AdjudicationOutcome) -> CaseSession:
        with self._registry_lock:
            if record.case_id in self._sessions:
                raise DuplicateCase(f"case {record.case_id!r} already submitted")
            session = CaseSession(record.case_id, record, graph,
                                  [OutcomeEvent(_now(), outcome)])
            self._sessions[record.case_id] = session
        self._append({
            "event": "submitted", "ts": session.outcome_history[0].timestamp,
            "case_id": record.case_id,
            "record": render_case_record(record),
            "graph": render_graph(graph),
            "outcome": outcome_payload(outcome),
        })
        return session

    def record_response(self, case_id: str, graph: CaseGraph,
                        outcome: AdjudicationOutcome) -> CaseSession:
        session = self.get(case_id)
        if session.state is not SessionState.AWAITING_INFO:
            raise WrongState(
                f"case {case_id!r} is {session.state.value}, not awaiting information")
        event = OutcomeEvent(_now(), outcome)
        session.current_graph = graph
        session.outcome_history.append(event)
        self._append({
            "event": "evidence", "ts": event.timestamp, "case_id": case_id,
            "graph": render_graph(graph),
            "outcome": outcome_payload(outcome),
        })
        return session

    # --- reads --------------------------------------------------------------------

    def get(self, case_id: str) -> CaseSession:
        try:
            return self._sessions[case_id]
        except KeyError:
            raise UnknownCase(f"no session for case {case_id!r}") from None

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._sessions

    def __len__(self) -> int:
        return len(self._sessions)

    def sessions(self) -> list[CaseSession]:
        return [self._sessions[k] for k in sorted(self._sessions)]
