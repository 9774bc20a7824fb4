"""Comparison baselines: outcome-vote retrieval and direct model prediction.

The model-direct baseline assembles a text context along three axes —
retrieved history, action-grounding instructions, and whether a
request-more-information outcome is permitted — and maps a client's reply
onto a verdict. Tests drive it with a scripted record-replay client; nothing
here performs network calls.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Protocol, Sequence

from .embed import EmbedderInterface, HashEmbedder
from .errors import ClientFailure, EmptyKnowledgeBase, UnparsableReply
from .graph import Lane, Verdict
from .kb import KnowledgeBase
from .records import CaseRecord
from .summarize import SummarizerInterface, TemplateSummarizer


def baseline_cbr_majority(query_record: CaseRecord, kb: KnowledgeBase, k: int = 20,
                          summarizer: SummarizerInterface | None = None,
                          embedder: EmbedderInterface | None = None) -> Verdict:
    """Majority vote over the checker verdicts of the top-k retrieved cases.

    Ties go to reject: the conservative default for a screening workflow.
    """
    if len(kb) == 0:
        raise EmptyKnowledgeBase("majority-vote baseline needs indexed history")
    summarizer = summarizer or TemplateSummarizer()
    embedder = embedder or HashEmbedder(kb.dimension)
    query_vec = embedder.embed(summarizer.summarize(query_record).rendered)
    votes = Counter()
    for scored in kb.retrieve(query_vec, k):
        decision = scored.entry.graph.decision(Lane.CHECKER)
        if decision is not None:
            votes[decision.verdict] += 1
    approve, reject = votes[Verdict.APPROVE], votes[Verdict.REJECT]
    return Verdict.APPROVE if approve > reject else Verdict.REJECT


class ModelClientInterface(Protocol):
    def complete(self, prompt: str) -> str: ...


class ScriptedClient:
    """Record-replay client: returns canned replies in order."""

    def __init__(self, replies: Sequence[str]):
        self._replies = list(replies)
        self._cursor = 0
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self._cursor >= len(self._replies):
            raise ClientFailure("scripted client exhausted its replies")
        reply = self._replies[self._cursor]
        self._cursor += 1
        return reply


_VERDICT_TOKEN = re.compile(r"\b(approve|reject|rmi)\b", re.IGNORECASE)


def build_prompt(query_record: CaseRecord, with_rmi: bool,
                 retrieved: list | None = None) -> str:
    lines = [f"Case {query_record.case_id} ({query_record.violation_category}), "
             f"maker verdict: reject."]
    lines.append("Evidence:")
    lines += [f"- [{i.source_type.value}] {i.content}" for i in query_record.evidence_items]
    lines.append(f"Maker analysis: {query_record.maker_record.analysis}")
    if retrieved is not None:
        lines.append("Similar resolved cases:")
        for scored in retrieved:
            decision = scored.entry.graph.decision(Lane.CHECKER)
            verdict = decision.verdict.value if decision else "unknown"
            lines.append(f"- {scored.entry.summary.rendered} -> {verdict}")
    if with_rmi:
        lines.append("Ground every verification you rely on in the evidence above; "
                     "if a required verification cannot be grounded, answer rmi.")
        lines.append("Answer with exactly one of: approve, reject, rmi.")
    else:
        lines.append("Answer with exactly one of: approve, reject.")
    return "\n".join(lines)


def baseline_model_direct(query_record: CaseRecord, client: ModelClientInterface,
                          with_rmi: bool = False, with_retrieval: bool = False,
                          kb: KnowledgeBase | None = None, k: int = 20,
                          summarizer: SummarizerInterface | None = None,
                          embedder: EmbedderInterface | None = None) -> Verdict:
    """Direct verdict prediction from assembled case context."""
    retrieved = None
    if with_retrieval:
        if kb is None or len(kb) == 0:
            raise EmptyKnowledgeBase("retrieval-augmented baseline needs indexed history")
        summarizer = summarizer or TemplateSummarizer()
        embedder = embedder or HashEmbedder(kb.dimension)
        query_vec = embedder.embed(summarizer.summarize(query_record).rendered)
        retrieved = kb.retrieve(query_vec, k)
    prompt = build_prompt(query_record, with_rmi, retrieved)
    try:
        reply = client.complete(prompt)
    except ClientFailure:
        raise
    except Exception as exc:  # noqa: BLE001 - clients are plugins
        raise ClientFailure(f"model client raised: {exc}") from exc
    match = _VERDICT_TOKEN.search(reply)
    if not match:
        raise UnparsableReply(f"no verdict token in reply {reply!r}")
    verdict = Verdict(match.group(1).lower())
    if verdict is Verdict.RMI and not with_rmi:
        raise UnparsableReply("client answered rmi but rmi output is disabled")
    return verdict
