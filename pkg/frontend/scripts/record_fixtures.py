"""Record live api-v1 payloads for the console's snapshot tests.

Runs the demo scenario against an in-process service (the worked
expired-food-product case from fixtures/d2) and freezes every payload the
console consumes. Re-run after changing the wire format:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import requests

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "fixtures" / "d2"
OUT = ROOT / "frontend" / "test" / "fixtures"


def main() -> None:
    from eafd.corpus import corpus_templates
    from eafd.embed import HashEmbedder
    from eafd.extract import AnnotationExtractor, extract_graph
    from eafd.kb import KbEntry, KnowledgeBase, build_conflict_edges
    from eafd.pipeline import Pipeline
    from eafd.records import load_case_record, render_case_record
    from eafd.service import EafdService, make_server
    from eafd.sessions import SessionStore
    from eafd.summarize import TemplateSummarizer

    kb = KnowledgeBase(128)
    record = load_case_record(FIXTURES / "case-expired-food.json")
    graph = build_conflict_edges(extract_graph(record, AnnotationExtractor()))
    summary = TemplateSummarizer().summarize(record)
    kb.add(KbEntry(graph, summary, HashEmbedder(128).embed(summary.rendered),
                   record.timestamp))
    service = EafdService(kb, Pipeline(kb, templates=corpus_templates()),
                          SessionStore())
    server = make_server(service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"

    try:
        query = load_case_record(FIXTURES / "query-expired-food.json")
        submitted = requests.post(f"{base}/cases",
                                  data=render_case_record(query).encode()).json()
        queue_awaiting = requests.get(f"{base}/cases").json()
        recommendations = requests.get(
            f"{base}/cases/{query.case_id}/recommendations").json()
        rmi_response = (FIXTURES / "rmi-response.json").read_text()
        resolved = requests.post(f"{base}/cases/{query.case_id}/evidence",
                                 data=rmi_response).json()
        queue_resolved = requests.get(f"{base}/cases").json()
        wrong_state = requests.post(f"{base}/cases/{query.case_id}/evidence",
                                    data=rmi_response)
        conflict = {"status": wrong_state.status_code, "body": wrong_state.json()}

        OUT.mkdir(parents=True, exist_ok=True)
        for name, payload in [
            ("session-awaiting.json", submitted),
            ("queue-awaiting.json", queue_awaiting),
            ("recommendations.json", recommendations),
            ("session-resolved.json", resolved),
            ("queue-resolved.json", queue_resolved),
            ("evidence-conflict.json", conflict),
        ]:
            (OUT / name).write_text(
                json.dumps(payload, indent=2, sort_keys=True) + "\n",
                encoding="utf-8")
            print(f"wrote {OUT / name}")
    finally:
        server.shutdown()
        thread.join(timeout=5)


if __name__ == "__main__":
    main()
