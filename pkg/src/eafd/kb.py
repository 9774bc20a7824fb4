"""Knowledge base: validated case graphs indexed by summary embedding.

The store is append-only. On disk (layout ``kb-v1``) a knowledge base is a
directory of three files:

* ``entries.log``  — one JSON object per line per entry: case id, timestamp,
  summary fields, and the canonical graph text.
* ``vectors.bin``  — little-endian float32, row-major; row *i* belongs to
  entry *i* of the log. Rows are renormalized in float64 when loaded, and the
  in-memory store always works on exactly that quantized form, so reopening a
  store reproduces retrieval rankings bit-for-bit.
* ``manifest``     — JSON: format version, dimension, entry count. The
  manifest is rewritten (atomically, via rename) after the data files are
  flushed, so a reader never observes a torn entry.

Retrieval is an exact linear cosine scan — corpora here are desk-scale and
exactness keeps rankings reproducible. Ties break by ascending case id.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Protocol

import numpy as np

from .embed import EmbeddingVector
from .errors import (
    DuplicateCaseId,
    EmptyKnowledgeBase,
    MalformedRecord,
    RefinerFailure,
    UnknownCase,
    UnresolvedMakerFactor,
    ValidationFailed,
)
from .graph import CaseGraph, EdgeKind, Lane, Verdict, path_one_actions
from .serialize import parse_graph, render_graph
from .summarize import CaseSummary
from .validate import validate

log = logging.getLogger(__name__)

FORMAT = "kb-v1"

MANIFEST = "manifest"
ENTRIES_LOG = "entries.log"
VECTORS_BIN = "vectors.bin"


@dataclass(frozen=True)
class KbEntry:
    graph: CaseGraph
    summary: CaseSummary
    vector: EmbeddingVector
    timestamp: str

    @property
    def case_id(self) -> str:
        return self.graph.case_id


class ScoredEntry(NamedTuple):
    entry: KbEntry
    similarity: float


def is_overturned(graph: CaseGraph) -> bool:
    maker = graph.decision(Lane.MAKER)
    checker = graph.decision(Lane.CHECKER)
    return (maker is not None and checker is not None
            and maker.verdict is Verdict.REJECT and checker.verdict is Verdict.APPROVE)


def build_conflict_edges(graph: CaseGraph) -> CaseGraph:
    """Check that an overturned case's correction structure is complete.

    The extractor already materializes conflict edges and cross-lane
    verification actions from the review statements; this pass enforces that
    for an overturned case every maker factor is addressed by one or the
    other, raising :class:`UnresolvedMakerFactor` otherwise. Non-overturned
    graphs pass through unchanged.
    """
    if not graph.has_lane(Lane.CHECKER):
        raise ValueError(f"case {graph.case_id!r} has no checker lane")
    if not is_overturned(graph):
        return graph
    for factor in graph.factors(Lane.MAKER):
        if graph.out_edges(factor.id, EdgeKind.FACTOR_FACTOR):
            continue
        if path_one_actions(graph, factor.id):
            continue
        raise UnresolvedMakerFactor(
            f"case {graph.case_id!r}: maker factor {factor.id!r} "
            f"({factor.statement!r}) has no checker response")
    return graph


class KnowledgeBase:
    """Append-only entry store with exact cosine retrieval.

    Safe for many concurrent readers with a single writer; writers commit
    entries one at a time under the store lock.
    """

    def __init__(self, dimension: int, path: str | os.PathLike | None = None):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.path = Path(path) if path is not None else None
        self._entries: list[KbEntry] = []
        self._by_case: dict[str, int] = {}
        self._matrix = np.empty((0, dimension), dtype=np.float64)
        self._lock = threading.RLock()

    # --- persistence -------------------------------------------------------

    @classmethod
    def create(cls, path: str | os.PathLike, dimension: int) -> "KnowledgeBase":
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        if (path / MANIFEST).exists():
            raise ValueError(f"{path} already holds a knowledge base")
        kb = cls(dimension, path)
        (path / ENTRIES_LOG).touch()
        (path / VECTORS_BIN).touch()
        kb._write_manifest(0)
        return kb

    @classmethod
    def open(cls, path: str | os.PathLike) -> "KnowledgeBase":
        path = Path(path)
        try:
            manifest = json.loads((path / MANIFEST).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise MalformedRecord(f"{path} is not a knowledge base (no manifest)") from None
        if manifest.get("format") != FORMAT:
            raise MalformedRecord(f"unsupported knowledge base format {manifest.get('format')!r}")
        kb = cls(int(manifest["dimension"]), path)
        count = int(manifest["count"])
        if count == 0:
            return kb
        raw = np.fromfile(path / VECTORS_BIN, dtype="<f4", count=count * kb.dimension)
        rows = raw.reshape(count, kb.dimension).astype(np.float64)
        with (path / ENTRIES_LOG).open(encoding="utf-8") as fh:
            for i, line in zip(range(count), fh):
                obj = json.loads(line)
                vec = rows[i]
                vec = vec / np.linalg.norm(vec)
                entry = KbEntry(
                    graph=parse_graph(obj["graph"]),
                    summary=CaseSummary(obj["case_id"], obj["violation_category"],
                                        obj["core_rationale"], obj["summary"]),
                    vector=EmbeddingVector(vec),
                    timestamp=obj["timestamp"],
                )
                kb._append_in_memory(entry)
        if len(kb._entries) != count:
            raise MalformedRecord(f"{path}: manifest count {count} exceeds log length")
        return kb

    def _write_manifest(self, count: int) -> None:
        tmp = self.path / (MANIFEST + ".tmp")
        tmp.write_text(json.dumps({"format": FORMAT, "dimension": self.dimension,
                                   "count": count}, sort_keys=True) + "\n",
                       encoding="utf-8")
        os.replace(tmp, self.path / MANIFEST)

    def _persist(self, entry: KbEntry, quantized: np.ndarray) -> None:
        payload = {
            "case_id": entry.case_id,
            "timestamp": entry.timestamp,
            "violation_category": entry.summary.violation_category,
            "core_rationale": entry.summary.core_rationale,
            "summary": entry.summary.rendered,
            "graph": render_graph(entry.graph),
        }
        with (self.path / ENTRIES_LOG).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        with (self.path / VECTORS_BIN).open("ab") as fh:
            fh.write(quantized.astype("<f4").tobytes())
            fh.flush()
            os.fsync(fh.fileno())
        self._write_manifest(len(self._entries))

    # --- indexing ----------------------------------------------------------

    def _append_in_memory(self, entry: KbEntry) -> None:
        self._by_case[entry.case_id] = len(self._entries)
        self._entries.append(entry)
        self._matrix = np.vstack([self._matrix, entry.vector.values])

    def add(self, entry: KbEntry) -> "KnowledgeBase":
        """Index one entry (op ``index_case``): validated, deduplicated,
        quantized to the on-disk precision, committed, then retrievable."""
        with self._lock:
            if entry.case_id in self._by_case:
                raise DuplicateCaseId(f"case {entry.case_id!r} is already indexed")
            if entry.vector.dimension != self.dimension:
                raise ValidationFailed(
                    f"vector dimension {entry.vector.dimension} != store dimension {self.dimension}")
            report = validate(entry.graph)
            if not report.passed:
                raise ValidationFailed(
                    f"case {entry.case_id!r} fails validation: "
                    f"{report.violations[0].message} "
                    f"({len(report.violations)} violations)")
            if is_overturned(entry.graph):
                has_conflict = bool(entry.graph.conflict_edges) or any(
                    path_one_actions(entry.graph, f.id)
                    for f in entry.graph.factors(Lane.MAKER))
                if not has_conflict:
                    raise ValidationFailed(
                        f"overturned case {entry.case_id!r} has no conflict structure")
            quantized = entry.vector.values.astype(np.float32)
            working = quantized.astype(np.float64)
            working = working / np.linalg.norm(working)
            stored = KbEntry(entry.graph, entry.summary,
                             EmbeddingVector(working), entry.timestamp)
            self._append_in_memory(stored)
            if self.path is not None:
                self._persist(stored, quantized)
            return self

    # --- reads ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._by_case

    def entry(self, case_id: str) -> KbEntry:
        try:
            return self._entries[self._by_case[case_id]]
        except KeyError:
            raise UnknownCase(f"case {case_id!r} is not indexed") from None

    def entries(self) -> list[KbEntry]:
        return list(self._entries)

    def retrieve(self, query: EmbeddingVector, k: int = 20) -> list[ScoredEntry]:
        """Exact top-k by cosine similarity; ties break by ascending case id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        with self._lock:
            if not self._entries:
                raise EmptyKnowledgeBase("retrieve on an empty knowledge base")
            if query.dimension != self.dimension:
                raise ValidationFailed(
                    f"query dimension {query.dimension} != store dimension {self.dimension}")
            sims = self._matrix @ query.values
            order = sorted(range(len(self._entries)),
                           key=lambda i: (-sims[i], self._entries[i].case_id))
            return [ScoredEntry(self._entries[i], float(sims[i])) for i in order[:k]]

    def stats(self) -> dict:
        with self._lock:
            overturned = sum(1 for e in self._entries if is_overturned(e.graph))
            ts = [e.timestamp for e in self._entries]
            return {
                "format": FORMAT,
                "count": len(self._entries),
                "dimension": self.dimension,
                "overturned": overturned,
                "earliest": min(ts) if ts else None,
                "latest": max(ts) if ts else None,
            }

    def max_timestamp(self) -> str | None:
        return max((e.timestamp for e in self._entries), default=None)


class RefinerInterface(Protocol):
    def refine(self, query_summary: CaseSummary, candidates: list[ScoredEntry],
               k: int) -> list[ScoredEntry]: ...


class CategoryRefiner:
    """Reference refiner: same violation category first, then similarity."""

    def refine(self, query_summary: CaseSummary, candidates: list[ScoredEntry],
               k: int) -> list[ScoredEntry]:
        ranked = sorted(candidates, key=lambda s: (
            s.entry.summary.violation_category != query_summary.violation_category,
            -s.similarity,
            s.entry.case_id,
        ))
        return ranked[:k]


def refine_candidates(candidates: list[ScoredEntry], query_summary: CaseSummary,
                      refiner: RefinerInterface | None = None,
                      k: int = 5) -> list[ScoredEntry]:
    """Narrow retrieval candidates to at most ``k`` analogous cases.

    The result is always a subset of ``candidates``; a refiner that returns
    anything else is an error.
    """
    refiner = refiner or CategoryRefiner()
    try:
        selected = refiner.refine(query_summary, list(candidates), k)
    except Exception as exc:  # noqa: BLE001 - refiners are plugins
        raise RefinerFailure(f"refiner raised: {exc}") from exc
    allowed = {id(c) for c in candidates}
    by_case = {c.entry.case_id for c in candidates}
    if len(selected) > k:
        raise RefinerFailure(f"refiner returned {len(selected)} > {k} candidates")
    for s in selected:
        if id(s) not in allowed and s.entry.case_id not in by_case:
            raise RefinerFailure(f"refiner invented candidate {s.entry.case_id!r}")
    return selected
