"""Record-to-graph extraction and action refinement.

Extraction is split into a pluggable semantic step and a deterministic
assembly step. The semantic step turns one lane of a case record into
annotated statements (the reference implementation simply parses the
statements reviewers embed in their analysis text; a model-backed extractor
can produce the same statements from free prose). Assembly then materializes
nodes and edges top-down — decisions, factors, actions, evidence — enforcing
that every emitted action was documented in the lane's record and that every
evidence reference resolves inside the record, and finally runs the validator
(with optional targeted repair) before the graph is released.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Protocol

from .annotations import AnnotatedStatement, parse_annotations
from .errors import ExtractionFailed
from .graph import (
    ActionNode,
    ActionOrigin,
    ActionStatus,
    CaseGraph,
    Criticality,
    DecisionNode,
    EdgeKind,
    EvidenceNode,
    FactorNode,
    FactorOrigin,
    GraphBuilder,
    Lane,
    PathKind,
    Resolution,
    Role,
)
from .records import CaseRecord
from .text import normalize_key
from .validate import RegeneratorInterface, repair, validate


class ExtractorInterface(Protocol):
    """Semantic step: derive one lane's annotated statements from a record."""

    def extract(self, record: CaseRecord, lane: Lane) -> list[AnnotatedStatement]: ...


class AnnotationExtractor:
    """Reference extractor: trusts the statements embedded in analysis text."""

    def extract(self, record: CaseRecord, lane: Lane) -> list[AnnotatedStatement]:
        review = record.maker_record if lane is Lane.MAKER else record.checker_record
        if review is None:
            raise ExtractionFailed(f"record {record.case_id!r} has no {lane.value} record")
        return parse_annotations(review.analysis)


@dataclass
class _LaneAssembly:
    actions: list[ActionNode]
    factors: list[FactorNode]
    decision: DecisionNode
    action_factor: list[tuple[str, str]]          # action id -> factor id (either lane)
    action_evidence: list[tuple[str, str]]        # record evidence id -> action id
    conflicts: list[tuple[str, str]]              # maker factor id -> checker factor id


def _assemble_lane(record: CaseRecord, lane: Lane,
                   statements: list[AnnotatedStatement],
                   maker_factors_by_key: dict[str, FactorNode]) -> _LaneAssembly:
    review = record.maker_record if lane is Lane.MAKER else record.checker_record
    if not statements:
        raise ExtractionFailed(
            f"record {record.case_id!r}: {lane.value} analysis yields no statements")

    decision = DecisionNode(f"d.{lane.value}", lane, Role(lane.value),
                            review.verdict)
    factors: dict[str, FactorNode] = {}
    actions: list[ActionNode] = []
    action_factor: list[tuple[str, str]] = []
    action_evidence: list[tuple[str, str]] = []
    conflicts: list[tuple[str, str]] = []
    evidence_ids = record.evidence_ids()

    for i, stmt in enumerate(statements, start=1):
        unknown = set(stmt.evidence_ids) - evidence_ids
        if unknown:
            raise ExtractionFailed(
                f"record {record.case_id!r}: statement {i} references unknown "
                f"evidence {sorted(unknown)}")

        if stmt.path_kind is PathKind.VERIFIES:
            if lane is Lane.MAKER:
                raise ExtractionFailed(
                    f"record {record.case_id!r}: maker statement {i} cannot verify "
                    "a maker factor")
            target_key = normalize_key(stmt.conflict_target)
            target = maker_factors_by_key.get(target_key)
            if target is None:
                raise ExtractionFailed(
                    f"record {record.case_id!r}: statement {i} verifies unknown "
                    f"maker factor {stmt.conflict_target!r}")
            factor_id = target.id
        else:
            key = normalize_key(stmt.factor_key)
            factor = factors.get(key)
            if factor is None:
                factor = FactorNode(
                    id=f"f.{lane.value}.{len(factors) + 1:03d}",
                    lane=lane,
                    statement=stmt.factor_key,
                    outcome=stmt.factor_outcome,
                    origin=FactorOrigin(lane.value),
                    resolution=Resolution.ACTIONABLE,
                )
                factors[key] = factor
            factor_id = factor.id
            if stmt.path_kind is PathKind.EXTENDS:
                target_key = normalize_key(stmt.conflict_target)
                target = maker_factors_by_key.get(target_key)
                if target is None:
                    raise ExtractionFailed(
                        f"record {record.case_id!r}: statement {i} conflicts with "
                        f"unknown maker factor {stmt.conflict_target!r}")
                pair = (target.id, factor.id)
                if pair not in conflicts:
                    conflicts.append(pair)

        action = ActionNode(
            id=f"a.{lane.value}.{i:03d}",
            lane=lane,
            goal=stmt.action_key,
            canonical_key=normalize_key(stmt.action_key),
            origin=ActionOrigin(lane.value),
            criticality=stmt.criticality,
            status=ActionStatus.VERIFIED,  # documented behaviour, grounded below
        )
        actions.append(action)
        action_factor.append((action.id, factor_id))
        for evidence_id in stmt.evidence_ids:
            action_evidence.append((evidence_id, action.id))

    return _LaneAssembly(actions, list(factors.values()), decision,
                         action_factor, action_evidence, conflicts)


def extract_graph(record: CaseRecord, extractor: ExtractorInterface,
                  regenerator: RegeneratorInterface | None = None,
                  max_rounds: int = 3) -> CaseGraph:
    """Build the case graph for a record: maker lane always, checker lane when
    the record is historical. The result has passed validation (with targeted
    repair when a regenerator is supplied)."""
    lanes = [Lane.MAKER] + ([Lane.CHECKER] if record.checker_record else [])
    maker_factors_by_key: dict[str, FactorNode] = {}
    assemblies: list[_LaneAssembly] = []
    for lane in lanes:
        assembly = _assemble_lane(record, lane, extractor.extract(record, lane),
                                  maker_factors_by_key)
        if lane is Lane.MAKER:
            maker_factors_by_key = {normalize_key(f.statement): f
                                    for f in assembly.factors}
        assemblies.append(assembly)

    # Evidence referenced only by the checker entered the case during the
    # re-review; everything else (including unreferenced items) was on the
    # maker's desk from the start.
    referenced = {lane: {ev for ev, _ in assembly.action_evidence}
                  for lane, assembly in zip(lanes, assemblies)}
    checker_only = referenced.get(Lane.CHECKER, set()) - referenced.get(Lane.MAKER, set())

    builder = GraphBuilder(record.case_id)
    for assembly in assemblies:
        builder.add(assembly.decision)
        builder.add_all(assembly.factors)
        builder.add_all(assembly.actions)
    for item in record.evidence_items:
        lane = Lane.CHECKER if item.id in checker_only else Lane.MAKER
        builder.add(EvidenceNode(item.id, lane, item.content, item.source_ref,
                                 item.source_type))
    for assembly in assemblies:
        for action_id, factor_id in assembly.action_factor:
            builder.link(EdgeKind.ACTION_FACTOR, action_id, factor_id)
        for evidence_id, action_id in assembly.action_evidence:
            if not builder.has_edge(EdgeKind.EVIDENCE_ACTION, evidence_id, action_id):
                builder.link(EdgeKind.EVIDENCE_ACTION, evidence_id, action_id)
        for factor in assembly.factors:
            builder.link(EdgeKind.FACTOR_DECISION, factor.id, assembly.decision.id)
        for maker_id, checker_id in assembly.conflicts:
            builder.link(EdgeKind.FACTOR_FACTOR, maker_id, checker_id,
                         PathKind.EXTENDS)

    graph = builder.build()
    report = validate(graph)
    if report.passed:
        return graph
    if regenerator is not None:
        graph, _ = repair(graph, report, regenerator, max_rounds)
        return graph
    raise ExtractionFailed(
        f"record {record.case_id!r}: extracted graph fails validation "
        f"({len(report.violations)} violations, no regenerator supplied)")


def refine_actions(graphs: list[CaseGraph]) -> tuple[list[CaseGraph], dict[str, dict[str, str]]]:
    """Merge same-goal actions (within one lane, same factor) into canonical nodes.

    Actions agreeing on (lane, canonical key, linked factor's canonical key)
    collapse onto a single node whose evidence links are the union of the
    group's. Factors and decisions are never touched. Returns the refined
    graphs and, per case, the original-to-canonical action id map for every
    merged group. Idempotent.
    """
    refined: list[CaseGraph] = []
    merge_map: dict[str, dict[str, str]] = {}
    for graph in graphs:
        groups: dict[tuple, list[ActionNode]] = {}
        for action in graph.actions():
            targets = graph.out_edges(action.id, EdgeKind.ACTION_FACTOR)
            if len(targets) != 1:
                continue  # not a validated shape; leave untouched
            factor = graph.node(targets[0].target)
            key = (action.lane.value, action.canonical_key,
                   normalize_key(factor.statement), factor.id)
            groups.setdefault(key, []).append(action)

        case_map: dict[str, str] = {}
        builder = graph.builder()
        for (lane, canonical_key, _factor_key, factor_id), members in sorted(
                groups.items(), key=lambda kv: kv[0]):
            if len(members) < 2:
                continue
            members = sorted(members, key=lambda a: a.id)
            survivor = members[0]
            merged = replace(
                survivor,
                goal=canonical_key.replace("_", " "),
                criticality=(Criticality.CRITICAL
                             if any(m.criticality is Criticality.CRITICAL for m in members)
                             else Criticality.SUPPORTING),
                status=(ActionStatus.VERIFIED
                        if any(m.status is ActionStatus.VERIFIED for m in members)
                        else survivor.status),
            )
            evidence_union = sorted({e.source for m in members
                                     for e in graph.in_edges(m.id, EdgeKind.EVIDENCE_ACTION)})
            for m in members:
                case_map[m.id] = survivor.id
                if m.id != survivor.id:
                    builder.remove_node(m.id)
            builder.replace_node(merged)
            for evidence_id in evidence_union:
                if not builder.has_edge(EdgeKind.EVIDENCE_ACTION, evidence_id, survivor.id):
                    builder.link(EdgeKind.EVIDENCE_ACTION, evidence_id, survivor.id)
            if not builder.has_edge(EdgeKind.ACTION_FACTOR, survivor.id, factor_id):
                builder.link(EdgeKind.ACTION_FACTOR, survivor.id, factor_id)
        refined.append(builder.build())
        if case_map:
            merge_map[graph.case_id] = case_map
    return refined, merge_map
