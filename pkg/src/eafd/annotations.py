"""Annotated-statement grammar embedded in review analysis text.

Reviewer analyses are free prose with zero or more machine-readable statements
of the form::

    ACTION[key|criticality]{e1,e2} => FACTOR[key|outcome]
    ACTION[key|criticality]{e1} => FACTOR[key|outcome] ~> CONFLICTS[maker_key|path_kind]

``criticality`` may be omitted (defaults to supporting). The CONFLICTS clause
ties a checker statement to a maker factor: ``extends`` introduces a new
checker factor that conflicts with it, ``verifies`` re-verifies the maker
factor directly (no new factor is created by the extractor). Prose between
statements is ignored; a token that *starts* a statement but does not complete
the grammar is a syntax error with line/column reported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AnnotationSyntax
from .graph import Criticality, FactorOutcome, PathKind

_KEY = r"[A-Za-z0-9_][A-Za-z0-9_ .-]*"
_ACTION_RE = re.compile(rf"ACTION\[({_KEY})(?:\|(critical|supporting))?\]")
_EVIDENCE_RE = re.compile(rf"\{{\s*({_KEY})(\s*,\s*{_KEY})*\s*\}}")
_FACTOR_RE = re.compile(rf"\s*=>\s*FACTOR\[({_KEY})\|(support|contradict)\]")
_CONFLICT_RE = re.compile(rf"\s*~>\s*CONFLICTS\[({_KEY})\|(verifies|extends)\]")
_START = "ACTION["


@dataclass(frozen=True)
class AnnotatedStatement:
    action_key: str
    criticality: Criticality
    evidence_ids: tuple[str, ...]
    factor_key: str
    factor_outcome: FactorOutcome
    conflict_target: str | None = None
    path_kind: PathKind | None = None


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _fail(text: str, offset: int, message: str):
    line, column = _position(text, offset)
    raise AnnotationSyntax(message, line, column)


def parse_annotations(analysis: str) -> list[AnnotatedStatement]:
    """All annotated statements in ``analysis``, in order of appearance."""
    statements: list[AnnotatedStatement] = []
    pos = 0
    while True:
        start = analysis.find(_START, pos)
        if start < 0:
            return statements

        m = _ACTION_RE.match(analysis, start)
        if not m:
            _fail(analysis, start, "malformed ACTION clause")
        action_key = m.group(1).strip()
        criticality = Criticality(m.group(2)) if m.group(2) else Criticality.SUPPORTING
        cursor = m.end()

        m = _EVIDENCE_RE.match(analysis, cursor)
        if not m:
            _fail(analysis, cursor, "expected {evidence,ids} after ACTION clause")
        evidence_ids = tuple(part.strip() for part in
                             analysis[m.start() + 1:m.end() - 1].split(","))
        cursor = m.end()

        m = _FACTOR_RE.match(analysis, cursor)
        if not m:
            _fail(analysis, cursor, "expected => FACTOR[key|outcome]")
        factor_key = m.group(1).strip()
        outcome = FactorOutcome(m.group(2))
        cursor = m.end()

        conflict_target = None
        path_kind = None
        m = _CONFLICT_RE.match(analysis, cursor)
        if m:
            conflict_target = m.group(1).strip()
            path_kind = PathKind(m.group(2))
            cursor = m.end()
        elif re.match(r"\s*~>", analysis[cursor:]):
            _fail(analysis, cursor, "expected CONFLICTS[maker_key|path_kind] after ~>")

        statements.append(AnnotatedStatement(
            action_key, criticality, evidence_ids, factor_key, outcome,
            conflict_target, path_kind))
        pos = cursor


def render_statement(stmt: AnnotatedStatement) -> str:
    """Canonical text for one statement; reparses to an equal statement."""
    parts = [f"ACTION[{stmt.action_key}|{stmt.criticality.value}]"
             f"{{{','.join(stmt.evidence_ids)}}}"
             f" => FACTOR[{stmt.factor_key}|{stmt.factor_outcome.value}]"]
    if stmt.conflict_target is not None:
        parts.append(f" ~> CONFLICTS[{stmt.conflict_target}|{stmt.path_kind.value}]")
    return "".join(parts)


def render_annotations(statements: list[AnnotatedStatement]) -> str:
    return "\n".join(render_statement(s) for s in statements)


def strip_annotations(analysis: str) -> str:
    """The prose of an analysis with all statements removed, whitespace-collapsed."""
    out = []
    pos = 0
    while True:
        start = analysis.find(_START, pos)
        if start < 0:
            out.append(analysis[pos:])
            break
        out.append(analysis[pos:start])
        cursor = start
        for regex in (_ACTION_RE, _EVIDENCE_RE, _FACTOR_RE):
            m = regex.match(analysis, cursor)
            if not m:  # let parse_annotations report precisely
                parse_annotations(analysis)
                return ""
            cursor = m.end()
        m = _CONFLICT_RE.match(analysis, cursor)
        if m:
            cursor = m.end()
        pos = cursor
    return " ".join("".join(out).split())
