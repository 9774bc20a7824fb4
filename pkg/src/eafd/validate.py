"""Structural invariant checks and bounded targeted repair.

The validator is the deterministic counterpart to whatever (possibly
probabilistic) extractor produced a graph: extractor output is a proposal,
and this layer decides whether the proposal is structurally sound. Three
violation families are reported:

* ``type_compat``  — an edge connects layers or lanes the schema forbids,
  including self-referential conflict edges.
* ``completeness`` — a factor with no supporting action, or a documented
  action with no grounding evidence. Planned (hypothesized) actions that
  grounding left unverified are exempt: an evidence-free planned action *is*
  the information gap the online pipeline exists to surface.
* ``cardinality``  — an action feeding anything but exactly one factor, a
  factor with more than one conflict partner on either side, or a
  self-referential conflict edge.

Violations are data, never exceptions, and the report is deterministic so it
can be golden-tested. Repair never deletes: a pluggable regenerator proposes a
replacement graph for the violating substructures, and the driver verifies the
untouched remainder survived node-for-node.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from .errors import RegeneratorFailure, RepairDiverged
from .graph import (
    ActionOrigin,
    ActionStatus,
    CaseGraph,
    Edge,
    EdgeKind,
    Lane,
    endpoint_kinds,
    lane_compatible,
)


class ViolationKind(str, Enum):
    TYPE_COMPAT = "type_compat"
    COMPLETENESS = "completeness"
    CARDINALITY = "cardinality"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    location: tuple[str, ...]  # one node id, or an (from, to) pair
    message: str

    def sort_key(self):
        return (self.kind.value, self.location, self.message)

    def render(self) -> str:
        return f"{self.kind.value}\t{','.join(self.location)}\t{self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def named_nodes(self) -> set[str]:
        return {node_id for v in self.violations for node_id in v.location}

    def render(self) -> str:
        """Deterministic ``report-v1`` text: one violation per line, then notes."""
        lines = [f"report-v1\tviolations={len(self.violations)}"]
        lines += [v.render() for v in self.violations]
        lines += [f"note\t{n}" for n in self.notes]
        return "\n".join(lines) + "\n"


class RegeneratorInterface(Protocol):
    """Supplies a replacement graph for the violating substructures only."""

    def regenerate(self, graph: CaseGraph, report: ValidationReport) -> CaseGraph: ...


def _evidence_exempt(node) -> bool:
    # A planned action that grounding could not (fully) verify legitimately has
    # no evidence edge; requiring one would make every information gap invalid.
    return node.origin is ActionOrigin.HYPOTHESIZED and node.status is not ActionStatus.VERIFIED


def validate(graph: CaseGraph) -> ValidationReport:
    """Check every structural invariant; report all violations, sorted."""
    violations: list[Violation] = []
    notes: list[str] = []

    for edge in graph.edges:
        src, tgt = graph.node(edge.source), graph.node(edge.target)
        want = endpoint_kinds(edge.kind)
        if (src.node_kind, tgt.node_kind) != want:
            violations.append(Violation(
                ViolationKind.TYPE_COMPAT, (edge.source, edge.target),
                f"{edge.kind.value} edge must connect {want[0]}->{want[1]}, "
                f"got {src.node_kind}->{tgt.node_kind}"))
        elif not lane_compatible(edge.kind, src, tgt):
            violations.append(Violation(
                ViolationKind.TYPE_COMPAT, (edge.source, edge.target),
                f"{edge.kind.value} edge crosses lanes "
                f"{src.lane.value}->{tgt.lane.value}"))
        if edge.kind is EdgeKind.FACTOR_FACTOR and edge.source == edge.target:
            violations.append(Violation(
                ViolationKind.CARDINALITY, (edge.source, edge.target),
                "self-referential conflict edge"))

    for factor in graph.factors():
        if not graph.in_edges(factor.id, EdgeKind.ACTION_FACTOR):
            violations.append(Violation(
                ViolationKind.COMPLETENESS, (factor.id,),
                "factor has no supporting action"))

    for action in graph.actions():
        if not graph.in_edges(action.id, EdgeKind.EVIDENCE_ACTION) and not _evidence_exempt(action):
            violations.append(Violation(
                ViolationKind.COMPLETENESS, (action.id,),
                "action has no grounding evidence"))
        fanout = len(graph.out_edges(action.id, EdgeKind.ACTION_FACTOR))
        if fanout != 1:
            violations.append(Violation(
                ViolationKind.CARDINALITY, (action.id,),
                f"action feeds {fanout} factors, expected exactly 1"))

    partners_out: dict[str, int] = {}
    partners_in: dict[str, int] = {}
    for edge in graph.conflict_edges:
        partners_out[edge.source] = partners_out.get(edge.source, 0) + 1
        partners_in[edge.target] = partners_in.get(edge.target, 0) + 1
    for node_id, count in sorted(partners_out.items()):
        if count > 1:
            violations.append(Violation(
                ViolationKind.CARDINALITY, (node_id,),
                f"maker factor has {count} conflict partners, expected at most 1"))
    for node_id, count in sorted(partners_in.items()):
        if count > 1:
            violations.append(Violation(
                ViolationKind.CARDINALITY, (node_id,),
                f"checker factor has {count} conflict partners, expected at most 1"))

    # Checker factors without a maker-side conflict partner are legal (a wholly
    # new consideration) but worth surfacing to reviewers.
    for factor in graph.factors(Lane.CHECKER):
        if not graph.in_edges(factor.id, EdgeKind.FACTOR_FACTOR):
            notes.append(f"checker factor {factor.id} has no conflict partner")

    return ValidationReport(tuple(sorted(violations, key=Violation.sort_key)),
                            tuple(sorted(notes)))


def _induced_edges(graph: CaseGraph, node_ids: set[str]) -> set[Edge]:
    return {e for e in graph.edges if e.source in node_ids and e.target in node_ids}


def repair(graph: CaseGraph, report: ValidationReport,
           regenerator: RegeneratorInterface, max_rounds: int = 3) -> tuple[CaseGraph, ValidationReport]:
    """Drive targeted regeneration until the graph validates or rounds run out.

    The regenerator is only ever consulted for a failing report, and each of
    its proposals must preserve the subgraph induced by nodes not named in any
    violation — node-for-node and edge-for-edge. Raises
    :class:`RepairDiverged` (carrying the final graph and report) if
    violations remain after ``max_rounds`` proposals.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    for _ in range(max_rounds):
        if report.passed:
            return graph, report
        protected = {n.id for n in graph.nodes} - report.named_nodes()
        try:
            candidate = regenerator.regenerate(graph, report)
        except Exception as exc:  # noqa: BLE001 - regenerators are plugins
            raise RegeneratorFailure(f"regenerator raised: {exc}") from exc
        for node_id in protected:
            if not candidate.has_node(node_id) or candidate.node(node_id) != graph.node(node_id):
                raise RegeneratorFailure(
                    f"regenerator touched validated node {node_id!r}")
        if _induced_edges(candidate, protected) != _induced_edges(graph, protected):
            raise RegeneratorFailure("regenerator touched edges between validated nodes")
        graph, report = candidate, validate(candidate)
    if report.passed:
        return graph, report
    raise RepairDiverged(
        f"{len(report.violations)} violations remain after {max_rounds} rounds",
        graph=graph, report=report)
