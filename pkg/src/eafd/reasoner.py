"""Online adjudication: alignment, top-down deduction, and the decision table.

Given a new maker-rejected case, the pipeline aligns the maker's factors with
factors from retrieved precedent graphs, harvests the checker structures that
resolved them there (a conflicting checker factor with its actions, or
checker actions that re-verified the maker factor directly), instantiates
those structures onto the query top-down — factor, then action, then
evidence — and adjudicates from the grounded result.

Grounding is deliberately transparent: an adapted action matches an evidence
item when the item's token set covers the action's canonical-key tokens plus
any filled entity-slot tokens. A single item must cover everything for a
complete match; overlap short of that is partial; no overlap anywhere is
missing. Only complete matches verify an action, and only verified actions
let a factor's outcome count toward the verdict.

The verdict table is fixed and conservative:

1. any planned critical action missing        -> request more information,
   recommending exactly the missing critical actions;
2. any actionable factor contradicts          -> reject;
3. any actionable factor supports             -> approve;
4. nothing actionable                          -> request more information,
   recommending every missing planned action.

A pluggable assessor may replace rules 2-3; rule 1 is not overridable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Protocol

from .errors import (
    AdapterFailure,
    DuplicateEvidenceId,
    EmptyCheckerLane,
    ExtractionFailed,
    UnknownNode,
)
from .extract import ExtractorInterface, extract_graph
from .graph import (
    ActionNode,
    ActionOrigin,
    ActionStatus,
    CaseGraph,
    Criticality,
    EdgeKind,
    EvidenceNode,
    FactorNode,
    FactorOrigin,
    FactorOutcome,
    Lane,
    PathKind,
    Resolution,
    Verdict,
)
from .records import CaseRecord
from .templates import TemplateRegistry
from .text import key_tokens, normalize_key, tokenize
from .validate import validate

TRACE_FORMAT = "trace-v1"


# --- alignment -----------------------------------------------------------------


@dataclass(frozen=True)
class HarvestedPath:
    """Checker structure attached to one precedent maker factor."""

    kind: PathKind
    checker_factor: FactorNode | None  # precedent node; None for direct verification
    checker_actions: tuple[ActionNode, ...]
    evidence_templates: tuple[str, ...]


@dataclass(frozen=True)
class AlignedAnchor:
    query_factor: str
    precedent_case: str
    precedent_factor: str
    path: HarvestedPath


class MatcherInterface(Protocol):
    def match(self, query_factor: FactorNode, precedent_factor: FactorNode) -> bool: ...


class KeyMatcher:
    """Reference matcher: canonical-key equality of factor statements."""

    def match(self, query_factor: FactorNode, precedent_factor: FactorNode) -> bool:
        return normalize_key(query_factor.statement) == normalize_key(precedent_factor.statement)


def _evidence_behind(graph: CaseGraph, actions: Iterable[ActionNode]) -> tuple[str, ...]:
    contents = {}
    for action in actions:
        for edge in graph.in_edges(action.id, EdgeKind.EVIDENCE_ACTION):
            node = graph.node(edge.source)
            contents[node.id] = node.content
    return tuple(contents[i] for i in sorted(contents))


def harvest_paths(graph: CaseGraph, maker_factor_id: str) -> list[HarvestedPath]:
    """Checker structures resolving one maker factor in a precedent graph."""
    paths = []
    for edge in sorted(graph.out_edges(maker_factor_id, EdgeKind.FACTOR_FACTOR),
                       key=lambda e: e.target):
        checker_factor = graph.node(edge.target)
        actions = tuple(sorted(
            (graph.node(e.source) for e in graph.in_edges(checker_factor.id,
                                                          EdgeKind.ACTION_FACTOR)),
            key=lambda a: a.id))
        paths.append(HarvestedPath(PathKind.EXTENDS, checker_factor, actions,
                                   _evidence_behind(graph, actions)))
    direct = tuple(sorted(
        (graph.node(e.source) for e in graph.in_edges(maker_factor_id, EdgeKind.ACTION_FACTOR)
         if graph.node(e.source).lane is Lane.CHECKER),
        key=lambda a: a.id))
    if direct:
        paths.append(HarvestedPath(PathKind.VERIFIES, None, direct,
                                   _evidence_behind(graph, direct)))
    return paths


def align_factors(maker_graph: CaseGraph, precedents: list[CaseGraph],
                  matcher: MatcherInterface | None = None) -> list[AlignedAnchor]:
    """Match each query maker factor against precedent maker factors and
    harvest the checker structures attached to every match. All matches are
    kept; deduplication happens during deduction. Deterministic order."""
    matcher = matcher or KeyMatcher()
    anchors = []
    for query_factor in sorted(maker_graph.factors(Lane.MAKER), key=lambda f: f.id):
        for precedent in precedents:
            for precedent_factor in sorted(precedent.factors(Lane.MAKER), key=lambda f: f.id):
                if not matcher.match(query_factor, precedent_factor):
                    continue
                for path in harvest_paths(precedent, precedent_factor.id):
                    anchors.append(AlignedAnchor(query_factor.id, precedent.case_id,
                                                 precedent_factor.id, path))
    return anchors


# --- adaptation and grounding ---------------------------------------------------


@dataclass(frozen=True)
class AdaptedAction:
    canonical_key: str
    goal: str
    request: str
    required_tokens: frozenset[str]


class AdapterInterface(Protocol):
    def adapt(self, action: ActionNode, record: CaseRecord) -> AdaptedAction: ...


class TemplateAdapter:
    """Reference adapter: entity-slot substitution from canonical templates.

    A precedent action with a registered template has its goal and request
    re-instantiated with the query record's entities; without a template the
    precedent goal is reused verbatim and the request falls back to a generic
    phrasing. Grounding must find the canonical-key tokens plus every filled
    slot value in the query evidence.
    """

    def __init__(self, templates: TemplateRegistry | None = None):
        self.templates = templates or TemplateRegistry()

    def adapt(self, action: ActionNode, record: CaseRecord) -> AdaptedAction:
        required = set(key_tokens(action.canonical_key))
        template = self.templates.get(action.canonical_key)
        if template is None:
            return AdaptedAction(action.canonical_key, action.goal,
                                 f"Please provide supporting evidence for: {action.goal}",
                                 frozenset(required))
        goal = template.fill(template.goal, record.entities)
        request = template.fill(template.request, record.entities)
        for value in template.slot_values(record.entities):
            required.update(tokenize(value))
        return AdaptedAction(action.canonical_key, goal, request, frozenset(required))


class MatchLevel(str, Enum):
    COMPLETE = "complete"
    PARTIAL = "partial"
    MISSING = "missing"


_LEVEL_TO_STATUS = {
    MatchLevel.COMPLETE: ActionStatus.VERIFIED,
    MatchLevel.PARTIAL: ActionStatus.PARTIAL,
    MatchLevel.MISSING: ActionStatus.MISSING,
}


@dataclass(frozen=True)
class GroundingResult:
    action: str
    match_level: MatchLevel
    evidence_ids: tuple[str, ...]


def ground_action(required: frozenset[str],
                  evidence: Iterable[EvidenceNode]) -> tuple[MatchLevel, tuple[str, ...]]:
    """Match one set of required tokens against the evidence pool.

    Complete: some single item covers every required token (all such items are
    returned). Partial: best nonzero overlap (the overlapping items are
    returned for the trace, but they do not verify the action). Missing: no
    overlap anywhere.
    """
    complete, partial = [], []
    best = 0
    for node in sorted(evidence, key=lambda n: n.id):
        cover = required & set(tokenize(node.content))
        if cover == required:
            complete.append(node.id)
        elif cover:
            if len(cover) > best:
                best, partial = len(cover), [node.id]
            elif len(cover) == best:
                partial.append(node.id)
    if complete:
        return MatchLevel.COMPLETE, tuple(complete)
    if partial:
        return MatchLevel.PARTIAL, tuple(partial)
    return MatchLevel.MISSING, ()


class LexicalGrounder:
    """Required-token computation shared by deduction and re-grounding."""

    def __init__(self, templates: TemplateRegistry | None = None,
                 record: CaseRecord | None = None):
        self.templates = templates or TemplateRegistry()
        self.entities = dict(record.entities) if record is not None else {}

    def required_tokens(self, action: ActionNode) -> frozenset[str]:
        required = set(key_tokens(action.canonical_key))
        template = self.templates.get(action.canonical_key)
        if template is not None:
            for value in template.slot_values(self.entities):
                required.update(tokenize(value))
        return frozenset(required)

    def ground(self, action: ActionNode,
               evidence: Iterable[EvidenceNode]) -> tuple[MatchLevel, tuple[str, ...]]:
        return ground_action(self.required_tokens(action), evidence)


# --- deduction -------------------------------------------------------------------


@dataclass(frozen=True)
class FaeResult:
    graph: CaseGraph
    hypotheses: tuple[dict, ...]     # hypothesized checker factors
    plans: tuple[dict, ...]          # planned actions with provenance
    groundings: tuple[GroundingResult, ...]
    requests: Mapping[str, str]      # action id -> information request text
    partial_actions: frozenset[str]  # action ids with inconclusive evidence


def build_maker_graph(record: CaseRecord, extractor: ExtractorInterface) -> CaseGraph:
    """Extract and validate the maker lane of a query record."""
    if not record.is_query:
        raise ExtractionFailed(
            f"record {record.case_id!r} already has a checker record; "
            "query records must not")
    return extract_graph(record, extractor)


@dataclass
class _PlannedAction:
    canonical_key: str
    criticality: Criticality
    factor_id: str
    adapted: AdaptedAction
    sources: list[str]


def fae_deduce(maker_graph: CaseGraph, anchors: list[AlignedAnchor],
               record: CaseRecord, adapter: AdapterInterface | None = None) -> FaeResult:
    """Instantiate harvested checker structures onto the query graph.

    Factor first: conflicting precedent factors become hypothesized checker
    factors (one per (query factor, canonical key); duplicates across anchors
    merge with their action sets unioned), each with a conflict edge from its
    query factor. Direct-verification anchors skip the factor and attach to
    the query maker factor itself. Action next: precedent actions are adapted
    to the query's entities, deduplicated per factor by canonical key, and
    marked critical if any precedent documented them critical. Evidence last:
    each planned action is grounded against the query evidence pool and its
    status recorded; complete matches create evidence links.
    """
    adapter = adapter or TemplateAdapter()
    builder = maker_graph.builder()

    # (F) hypothesized factors, merged per (query factor, canonical key)
    factor_table: dict[tuple[str, str], dict] = {}
    for anchor in anchors:
        if anchor.path.kind is not PathKind.EXTENDS:
            continue
        key = (anchor.query_factor, normalize_key(anchor.path.checker_factor.statement))
        slot = factor_table.setdefault(key, {
            "statement": anchor.path.checker_factor.statement,
            "outcome": anchor.path.checker_factor.outcome,
            "sources": [],
            "actions": {},
        })
        if anchor.path.checker_factor.outcome is FactorOutcome.CONTRADICT:
            slot["outcome"] = FactorOutcome.CONTRADICT  # disagreeing precedents: stay conservative
        slot["sources"].append(anchor.precedent_case)
        for action in anchor.path.checker_actions:
            entry = slot["actions"].setdefault(action.canonical_key, {
                "action": action, "critical": False, "sources": []})
            entry["critical"] = entry["critical"] or action.criticality is Criticality.CRITICAL
            entry["sources"].append(anchor.precedent_case)

    # direct re-verification actions, per query factor
    direct_table: dict[str, dict] = {}
    for anchor in anchors:
        if anchor.path.kind is not PathKind.VERIFIES:
            continue
        slot = direct_table.setdefault(anchor.query_factor, {"actions": {}})
        for action in anchor.path.checker_actions:
            entry = slot["actions"].setdefault(action.canonical_key, {
                "action": action, "critical": False, "sources": []})
            entry["critical"] = entry["critical"] or action.criticality is Criticality.CRITICAL
            entry["sources"].append(anchor.precedent_case)

    def _adapt(action: ActionNode) -> AdaptedAction:
        try:
            return adapter.adapt(action, record)
        except AdapterFailure:
            raise
        except Exception as exc:  # noqa: BLE001 - adapters are plugins
            raise AdapterFailure(f"adapter raised on {action.canonical_key!r}: {exc}") from exc

    hypotheses: list[dict] = []
    planned: list[_PlannedAction] = []
    next_factor = 1
    for (query_factor, factor_key), slot in sorted(factor_table.items()):
        factor = FactorNode(
            id=f"f.hyp.{next_factor:03d}", lane=Lane.CHECKER,
            statement=slot["statement"], outcome=slot["outcome"],
            origin=FactorOrigin.CHECKER, resolution=Resolution.UNRESOLVED)
        next_factor += 1
        builder.add(factor)
        builder.link(EdgeKind.FACTOR_FACTOR, query_factor, factor.id,
                     PathKind.EXTENDS)
        hypotheses.append({"id": factor.id, "key": factor_key,
                           "outcome": slot["outcome"].value,
                           "conflicts_with": query_factor,
                           "sources": sorted(set(slot["sources"]))})
        for key in sorted(slot["actions"]):
            entry = slot["actions"][key]
            planned.append(_PlannedAction(
                key,
                Criticality.CRITICAL if entry["critical"] else Criticality.SUPPORTING,
                factor.id,
                _adapt(entry["action"]),
                sorted(set(entry["sources"]))))
    for query_factor in sorted(direct_table):
        slot = direct_table[query_factor]
        for key in sorted(slot["actions"]):
            entry = slot["actions"][key]
            planned.append(_PlannedAction(
                key,
                Criticality.CRITICAL if entry["critical"] else Criticality.SUPPORTING,
                query_factor,
                _adapt(entry["action"]),
                sorted(set(entry["sources"]))))

    # (A) planned action nodes; (E) grounding against the query evidence pool
    evidence_pool = list(maker_graph.evidence())
    plans: list[dict] = []
    groundings: list[GroundingResult] = []
    requests: dict[str, str] = {}
    partial: set[str] = set()
    for i, plan in enumerate(planned, start=1):
        level, evidence_ids = ground_action(plan.adapted.required_tokens, evidence_pool)
        action = ActionNode(
            id=f"a.hyp.{i:03d}", lane=Lane.CHECKER, goal=plan.adapted.goal,
            canonical_key=plan.canonical_key, origin=ActionOrigin.HYPOTHESIZED,
            criticality=plan.criticality, status=_LEVEL_TO_STATUS[level])
        builder.add(action)
        builder.link(EdgeKind.ACTION_FACTOR, action.id, plan.factor_id)
        for evidence_id in evidence_ids if level is MatchLevel.COMPLETE else ():
            builder.link(EdgeKind.EVIDENCE_ACTION, evidence_id, action.id)
        groundings.append(GroundingResult(action.id, level, evidence_ids))
        requests[action.id] = plan.adapted.request
        if level is MatchLevel.PARTIAL:
            partial.add(action.id)
        plans.append({"id": action.id, "key": plan.canonical_key,
                      "goal": plan.adapted.goal, "criticality": plan.criticality.value,
                      "factor": plan.factor_id, "sources": plan.sources})

    graph = _refresh_resolutions(builder.build())
    report = validate(graph)
    if not report.passed:
        raise AdapterFailure(
            f"deduced graph fails validation: {report.violations[0].message}")
    return FaeResult(graph, tuple(hypotheses), tuple(plans), tuple(groundings),
                     requests, frozenset(partial))


def _eval_actions(graph: CaseGraph, factor_id: str) -> list[ActionNode]:
    return [graph.node(e.source) for e in graph.in_edges(factor_id, EdgeKind.ACTION_FACTOR)
            if graph.node(e.source).origin is ActionOrigin.HYPOTHESIZED]


def factor_resolution(graph: CaseGraph, factor_id: str) -> Resolution:
    """A factor is actionable once re-review has verified it: at least one
    planned action verified and no planned critical action unverified.

    Missing supporting actions weaken but do not block; factors with no
    planned actions at all stay unresolved (nothing re-examined them)."""
    actions = _eval_actions(graph, factor_id)
    if not actions:
        return Resolution.UNRESOLVED
    verified = [a for a in actions if a.status is ActionStatus.VERIFIED]
    missing_critical = [a for a in actions
                        if a.status is not ActionStatus.VERIFIED
                        and a.criticality is Criticality.CRITICAL]
    if verified and not missing_critical:
        return Resolution.ACTIONABLE
    return Resolution.UNRESOLVED


def _refresh_resolutions(graph: CaseGraph) -> CaseGraph:
    builder = graph.builder()
    for factor in graph.factors():
        if _eval_actions(graph, factor.id):
            builder.replace_node(replace(factor,
                                         resolution=factor_resolution(graph, factor.id)))
    return builder.build()


def action_status(graph: CaseGraph, action_id: str) -> ActionStatus:
    """Binary status of a planned checker action: verified means grounding
    found a complete evidence match; anything less is missing."""
    node = graph.node(action_id)
    if node.node_kind != "action" or node.lane is not Lane.CHECKER:
        raise UnknownNode(f"{action_id!r} is not a checker-lane action")
    return (ActionStatus.VERIFIED if node.status is ActionStatus.VERIFIED
            else ActionStatus.MISSING)


# --- adjudication ---------------------------------------------------------------


@dataclass(frozen=True)
class Recommendation:
    action: str
    canonical_key: str
    request_text: str


@dataclass(frozen=True)
class Trace:
    case_id: str
    steps: tuple[dict, ...] = ()

    def extended(self, *steps: dict) -> "Trace":
        return Trace(self.case_id, self.steps + tuple(steps))

    def render(self) -> str:
        return json.dumps({"format": TRACE_FORMAT, "case_id": self.case_id,
                           "steps": list(self.steps)},
                          sort_keys=True, ensure_ascii=False, indent=2) + "\n"


@dataclass(frozen=True)
class AdjudicationOutcome:
    verdict: Verdict
    recommendations: tuple[Recommendation, ...]
    trace: Trace

    def recommended_keys(self) -> list[str]:
        return [r.canonical_key for r in self.recommendations]


class AssessorInterface(Protocol):
    """Holistic verdict over the actionable factors; replaces rules 2-3 only."""

    def assess(self, factors: list[FactorNode]) -> Verdict: ...


def adjudicate(graph: CaseGraph, request_texts: Mapping[str, str] | None = None,
               assessor: AssessorInterface | None = None,
               partial_actions: frozenset[str] = frozenset()) -> AdjudicationOutcome:
    """Apply the decision table to a deduced graph.

    ``request_texts`` supplies per-action information requests (from
    adaptation); absent entries fall back to a generic phrasing built from the
    action goal. An assessor, when given, decides between approve and reject
    over the actionable factors — the structural gate of rule 1 and the
    nothing-actionable fallback of rule 4 are not delegated.
    """
    request_texts = dict(request_texts or {})
    eval_actions = sorted((a for a in graph.actions(Lane.CHECKER)
                           if a.origin is ActionOrigin.HYPOTHESIZED),
                          key=lambda a: a.id)
    if not eval_actions:
        raise EmptyCheckerLane(
            f"case {graph.case_id!r} has no planned checker actions to adjudicate")

    def recommend(actions: list[ActionNode]) -> tuple[Recommendation, ...]:
        recs = []
        for action in actions:
            text = request_texts.get(
                action.id, f"Please provide supporting evidence for: {action.goal}")
            if action.id in partial_actions:
                text += " (the evidence on file is inconclusive; please supplement it)"
            recs.append(Recommendation(action.id, action.canonical_key, text))
        return tuple(recs)

    missing = [a for a in eval_actions if a.status is not ActionStatus.VERIFIED]
    missing_critical = [a for a in missing if a.criticality is Criticality.CRITICAL]

    resolutions = {}
    relevant = sorted((f for f in graph.factors() if _eval_actions(graph, f.id)),
                      key=lambda f: f.id)
    for factor in relevant:
        resolutions[factor.id] = factor_resolution(graph, factor.id)
    actionable = [f for f in relevant if resolutions[f.id] is Resolution.ACTIONABLE]

    trace = Trace(graph.case_id).extended({
        "step": "resolve",
        "factors": [{"id": f.id, "outcome": f.outcome.value,
                     "resolution": resolutions[f.id].value} for f in relevant],
    })

    def done(rule: int, verdict: Verdict,
             recs: tuple[Recommendation, ...] = ()) -> AdjudicationOutcome:
        return AdjudicationOutcome(verdict, recs, trace.extended({
            "step": "adjudicate", "rule": rule, "verdict": verdict.value,
            "recommendations": [r.action for r in recs]}))

    if missing_critical:
        return done(1, Verdict.RMI, recommend(missing_critical))
    if not actionable:
        return done(4, Verdict.RMI, recommend(missing))
    if assessor is not None:
        verdict = assessor.assess(list(actionable))
        if verdict not in (Verdict.APPROVE, Verdict.REJECT):
            raise AdapterFailure(
                f"assessor returned {verdict!r}; only approve/reject allowed")
        return done(2 if verdict is Verdict.REJECT else 3, verdict)
    if any(f.outcome is FactorOutcome.CONTRADICT for f in actionable):
        return done(2, Verdict.REJECT)
    return done(3, Verdict.APPROVE)


def render_requests(recommendations: Iterable[Recommendation]) -> list[str]:
    """The human-readable information requests, in stable order."""
    return [r.request_text for r in sorted(recommendations, key=lambda r: r.action)]


# --- the feedback loop ------------------------------------------------------------


def attach_evidence(graph: CaseGraph, new_evidence: list[EvidenceNode],
                    grounder: LexicalGrounder | None = None) -> CaseGraph:
    """Add newly supplied evidence and re-ground the unverified planned actions.

    Verified actions are never touched, so evidence accretion is monotone: a
    status can move toward verified but never away from it. New evidence lands
    in the checker lane (it arrived during the re-review).
    """
    grounder = grounder or LexicalGrounder()
    builder = graph.builder()
    for node in new_evidence:
        if graph.has_node(node.id):
            raise DuplicateEvidenceId(f"evidence id {node.id!r} already in graph")
        builder.add(replace(node, lane=Lane.CHECKER))
    enlarged = builder.build()

    pool = list(enlarged.evidence())
    builder = enlarged.builder()
    for action in enlarged.actions(Lane.CHECKER):
        if action.origin is not ActionOrigin.HYPOTHESIZED:
            continue
        if action.status is ActionStatus.VERIFIED:
            continue
        level, evidence_ids = grounder.ground(action, pool)
        builder.replace_node(replace(action, status=_LEVEL_TO_STATUS[level]))
        if level is MatchLevel.COMPLETE:
            for evidence_id in evidence_ids:
                if not builder.has_edge(EdgeKind.EVIDENCE_ACTION, evidence_id, action.id):
                    builder.link(EdgeKind.EVIDENCE_ACTION, evidence_id, action.id)
    return _refresh_resolutions(builder.build())
