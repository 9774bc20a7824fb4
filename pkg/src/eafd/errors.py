"""Exception hierarchy for the eafd package.

Every error raised by package code derives from :class:`EafdError` so callers
can catch one base type at service boundaries. Structural *violations* found by
the validator are data (see ``eafd.validate``), not exceptions.
"""

from __future__ import annotations


class EafdError(Exception):
    """Base class for all package errors."""


# --- graph construction ------------------------------------------------------

class InvalidNode(EafdError):
    """A node value violates its own invariants (empty id, empty content, ...)."""


class UnknownNode(EafdError):
    """An operation referenced a node id that is not in the graph."""


class DuplicateNode(EafdError):
    """A node id was added twice to one graph."""


class DuplicateEdge(EafdError):
    """The same (kind, from, to) edge was linked twice."""


class TypeIncompatible(EafdError):
    """Edge endpoints do not match the node-layer table for the edge kind."""


class CrossLaneViolation(EafdError):
    """An edge spans the maker/checker lanes in a direction the schema forbids."""


# --- validation / repair -----------------------------------------------------

class RegeneratorFailure(EafdError):
    """A regenerator raised, or modified portions of the graph it must not touch."""


class RepairDiverged(EafdError):
    """Violations remained after the repair round budget was exhausted.

    Carries the last graph and report so callers can inspect what was left.
    """

    def __init__(self, message: str, graph=None, report=None):
        super().__init__(message)
        self.graph = graph
        self.report = report


# --- record parsing / extraction ---------------------------------------------

class MalformedRecord(EafdError):
    """Input bytes are not a well-formed case record document."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class MissingField(EafdError):
    """A required case-record field is absent."""


class AnnotationSyntax(EafdError):
    """An annotated statement does not match the statement grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ExtractionFailed(EafdError):
    """The extractor could not produce a usable lane from a record."""


# --- knowledge base -----------------------------------------------------------

class UnresolvedMakerFactor(EafdError):
    """An overturned case has a maker factor no checker structure addresses."""


class SummarizerFailure(EafdError):
    """The summarizer could not render a case summary."""


class EmbedderFailure(EafdError):
    """The embedder could not produce a unit vector (empty input, bad dimension)."""


class DuplicateCaseId(EafdError):
    """A case id was indexed twice."""


class ValidationFailed(EafdError):
    """A knowledge-base entry failed its structural invariants at index time."""


class EmptyKnowledgeBase(EafdError):
    """Retrieval was attempted against a knowledge base with no entries."""


class RefinerFailure(EafdError):
    """The candidate refiner failed."""


# --- online reasoning ----------------------------------------------------------

class AdapterFailure(EafdError):
    """The action adapter could not instantiate a precedent action for a query."""


class EmptyCheckerLane(EafdError):
    """Adjudication was attempted on a graph with no planned checker actions."""


class DuplicateEvidenceId(EafdError):
    """Newly attached evidence reused an id already present in the graph."""


# --- evaluation -----------------------------------------------------------------

class InvalidSpec(EafdError):
    """A corpus specification is out of range or inconsistent."""


class LabelMismatch(EafdError):
    """An evaluation label or prediction is not one of approve/reject/rmi."""


class ClientFailure(EafdError):
    """The model client failed to produce a reply."""


class UnparsableReply(EafdError):
    """The model client's reply could not be mapped to a permitted verdict."""


# --- service ---------------------------------------------------------------------

class DuplicateCase(EafdError):
    """A case id was submitted twice."""


class UnknownCase(EafdError):
    """No session exists for the requested case id."""


class WrongState(EafdError):
    """The session is not in a state that permits the requested operation."""


class PipelineFailure(EafdError):
    """A pipeline stage failed while processing a submitted case."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
