"""Case record parsing and rendering (format ``case-record-v1``).

A case record is one UTF-8 JSON document per file: the case's evidence items,
the maker's rejection record, the checker's record when the case is
historical, and a timestamp that totally orders the corpus. Query records —
the online input — are the same format with ``checker_record`` absent.
Unknown top-level fields are preserved so records round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import MalformedRecord, MissingField
from .graph import SourceType, Verdict

FORMAT = "case-record-v1"

_KNOWN_FIELDS = {"case_id", "violation_category", "timestamp", "evidence_items",
                 "maker_record", "checker_record", "entities", "withheld_evidence"}


@dataclass(frozen=True)
class EvidenceItem:
    id: str
    source_type: SourceType
    content: str
    source_ref: str


@dataclass(frozen=True)
class ReviewRecord:
    verdict: Verdict
    analysis: str


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    violation_category: str
    timestamp: str  # ISO-8601 UTC; lexicographic order == chronological order
    evidence_items: tuple[EvidenceItem, ...]
    maker_record: ReviewRecord
    checker_record: ReviewRecord | None = None
    entities: dict = field(default_factory=dict)
    withheld_evidence: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    @property
    def is_query(self) -> bool:
        return self.checker_record is None

    def evidence_ids(self) -> set[str]:
        return {item.id for item in self.evidence_items}

    def as_query(self) -> "CaseRecord":
        """The online view of a historical record: no checker record, and any
        evidence the record marks as withheld removed from the visible pool."""
        withheld = set(self.withheld_evidence)
        return replace(
            self,
            checker_record=None,
            withheld_evidence=(),
            evidence_items=tuple(i for i in self.evidence_items if i.id not in withheld),
        )


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise MissingField(f"{where} is missing required field {key!r}")
    return obj[key]


def _parse_review(obj, where: str, maker: bool) -> ReviewRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(f"{where} must be an object")
    verdict = Verdict(_need(obj, "verdict", where))
    if maker and verdict is not Verdict.REJECT:
        raise MalformedRecord(f"{where}: maker verdict must be reject, got {verdict.value}")
    return ReviewRecord(verdict, _need(obj, "analysis", where))


def parse_case_record(data: bytes | str) -> CaseRecord:
    """Parse one ``case-record-v1`` document.

    Raises :class:`MalformedRecord` (with the byte offset for syntax errors)
    or :class:`MissingField`.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedRecord("record is not valid UTF-8", offset=exc.start) from exc
    else:
        text = data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise MalformedRecord(f"invalid JSON: {exc.msg}", offset=offset) from exc
    if not isinstance(obj, dict):
        raise MalformedRecord("record document must be a JSON object")

    case_id = _need(obj, "case_id", "record")
    if not case_id:
        raise MalformedRecord("case_id must be non-empty")
    items = []
    raw_items = _need(obj, "evidence_items", "record")
    seen = set()
    for i, raw in enumerate(raw_items):
        where = f"evidence_items[{i}]"
        try:
            item = EvidenceItem(
                id=_need(raw, "id", where),
                source_type=SourceType(_need(raw, "source_type", where)),
                content=_need(raw, "content", where),
                source_ref=_need(raw, "source_ref", where),
            )
        except ValueError as exc:
            raise MalformedRecord(f"{where}: {exc}") from exc
        if item.id in seen:
            raise MalformedRecord(f"{where}: duplicate evidence id {item.id!r}")
        seen.add(item.id)
        items.append(item)

    try:
        maker = _parse_review(_need(obj, "maker_record", "record"), "maker_record", maker=True)
        checker = None
        if obj.get("checker_record") is not None:
            checker = _parse_review(obj["checker_record"], "checker_record", maker=False)
    except ValueError as exc:
        raise MalformedRecord(str(exc)) from exc

    withheld = tuple(obj.get("withheld_evidence") or ())
    unknown_withheld = set(withheld) - seen
    if unknown_withheld:
        raise MalformedRecord(
            f"withheld_evidence references unknown evidence ids {sorted(unknown_withheld)}")

    return CaseRecord(
        case_id=case_id,
        violation_category=_need(obj, "violation_category", "record"),
        timestamp=_need(obj, "timestamp", "record"),
        evidence_items=tuple(items),
        maker_record=maker,
        checker_record=checker,
        entities=dict(obj.get("entities") or {}),
        withheld_evidence=withheld,
        extra={k: v for k, v in obj.items() if k not in _KNOWN_FIELDS},
    )


def render_case_record(record: CaseRecord) -> str:
    """Canonical JSON for a record (sorted keys, two-space indent)."""
    obj = {
        "case_id": record.case_id,
        "violation_category": record.violation_category,
        "timestamp": record.timestamp,
        "evidence_items": [
            {"id": i.id, "source_type": i.source_type.value,
             "content": i.content, "source_ref": i.source_ref}
            for i in record.evidence_items
        ],
        "maker_record": {"verdict": record.maker_record.verdict.value,
                         "analysis": record.maker_record.analysis},
    }
    if record.checker_record is not None:
        obj["checker_record"] = {"verdict": record.checker_record.verdict.value,
                                 "analysis": record.checker_record.analysis}
    if record.entities:
        obj["entities"] = record.entities
    if record.withheld_evidence:
        obj["withheld_evidence"] = list(record.withheld_evidence)
    obj.update(record.extra)
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_case_record(path) -> CaseRecord:
    with open(path, "rb") as fh:
        return parse_case_record(fh.read())


def dump_case_record(record: CaseRecord, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_case_record(record))
