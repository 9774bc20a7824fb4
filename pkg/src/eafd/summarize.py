"""Case summaries: the retrievable text form of a case (``s`` in the index)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .annotations import parse_annotations, strip_annotations
from .errors import SummarizerFailure
from .records import CaseRecord
from .text import normalize_key

_HEAD_CHARS = 120


@dataclass(frozen=True)
class CaseSummary:
    case_id: str
    violation_category: str
    core_rationale: str
    rendered: str


class SummarizerInterface(Protocol):
    def summarize(self, record: CaseRecord) -> CaseSummary: ...


class TemplateSummarizer:
    """Deterministic reference summarizer.

    Renders the violation category, the head of the maker's prose rationale,
    and the maker factor keys. Identical records that differ only in case id
    render identically; a record with an empty maker analysis falls back to
    category plus evidence source types.
    """

    def summarize(self, record: CaseRecord) -> CaseSummary:
        analysis = record.maker_record.analysis
        if not analysis.strip():
            sources = sorted({i.source_type.value for i in record.evidence_items})
            rendered = f"category: {record.violation_category} | sources: {', '.join(sources)}"
            return CaseSummary(record.case_id, record.violation_category, "", rendered)
        try:
            statements = parse_annotations(analysis)
            prose = strip_annotations(analysis)
        except Exception as exc:  # noqa: BLE001 - surface as the op's error
            raise SummarizerFailure(f"cannot summarize {record.case_id!r}: {exc}") from exc
        head = prose[:_HEAD_CHARS].strip()
        keys = sorted({normalize_key(s.factor_key) for s in statements})
        rendered = (f"category: {record.violation_category} | rationale: {head}"
                    f" | factors: {', '.join(keys)}")
        return CaseSummary(record.case_id, record.violation_category, head, rendered)
