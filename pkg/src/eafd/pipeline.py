"""End-to-end adjudication pipeline over a knowledge base.

One object wires the pluggable pieces together and exposes the two entry
points the service and the evaluation harness share: adjudicate a fresh query
record, and re-adjudicate after more evidence arrives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .embed import EmbedderInterface, HashEmbedder
from .errors import EafdError, PipelineFailure
from .extract import AnnotationExtractor, ExtractorInterface
from .graph import ActionOrigin, ActionStatus, CaseGraph, EvidenceNode, Lane, Verdict
from .kb import KnowledgeBase, RefinerInterface, ScoredEntry, refine_candidates
from .reasoner import (
    AdapterInterface,
    AdjudicationOutcome,
    AssessorInterface,
    LexicalGrounder,
    MatcherInterface,
    TemplateAdapter,
    Trace,
    adjudicate,
    align_factors,
    attach_evidence,
    build_maker_graph,
    fae_deduce,
)
from .records import CaseRecord
from .summarize import SummarizerInterface, TemplateSummarizer
from .templates import DEFAULT_TEMPLATES, TemplateRegistry

log = logging.getLogger(__name__)

RETRIEVE_K = 20
REFINE_K = 5


@dataclass(frozen=True)
class CaseResult:
    record: CaseRecord
    graph: CaseGraph
    outcome: AdjudicationOutcome
    requests: dict
    partial_actions: frozenset


class Pipeline:
    def __init__(self, kb: KnowledgeBase,
                 extractor: ExtractorInterface | None = None,
                 summarizer: SummarizerInterface | None = None,
                 embedder: EmbedderInterface | None = None,
                 matcher: MatcherInterface | None = None,
                 adapter: AdapterInterface | None = None,
                 refiner: RefinerInterface | None = None,
                 assessor: AssessorInterface | None = None,
                 templates: TemplateRegistry | None = None,
                 retrieve_k: int = RETRIEVE_K,
                 refine_k: int = REFINE_K):
        self.kb = kb
        self.templates = templates or DEFAULT_TEMPLATES
        self.extractor = extractor or AnnotationExtractor()
        self.summarizer = summarizer or TemplateSummarizer()
        self.embedder = embedder or HashEmbedder(kb.dimension)
        self.matcher = matcher
        self.adapter = adapter or TemplateAdapter(self.templates)
        self.refiner = refiner
        self.assessor = assessor
        self.retrieve_k = retrieve_k
        self.refine_k = refine_k

    def _stage(self, name: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EafdError as exc:
            raise PipelineFailure(name, exc) from exc

    def adjudicate_case(self, record: CaseRecord) -> CaseResult:
        """Run the full query pipeline: maker graph, retrieval, refinement,
        alignment, top-down deduction, adjudication. Every stage failure is
        wrapped in :class:`PipelineFailure` with the stage name."""
        maker_graph = self._stage("extract", build_maker_graph, record, self.extractor)
        trace = Trace(record.case_id).extended({
            "step": "maker_graph",
            "factors": [{"id": f.id, "statement": f.statement, "outcome": f.outcome.value}
                        for f in maker_graph.factors(Lane.MAKER)],
            "actions": sum(1 for _ in maker_graph.actions()),
            "evidence": sum(1 for _ in maker_graph.evidence()),
        })

        summary = self._stage("summarize", self.summarizer.summarize, record)
        query_vec = self._stage("embed", self.embedder.embed, summary.rendered)
        candidates = self._stage("retrieve", self.kb.retrieve, query_vec, self.retrieve_k)
        trace = trace.extended({
            "step": "retrieve",
            "candidates": [{"case_id": c.entry.case_id,
                            "similarity": round(c.similarity, 6)} for c in candidates],
        })
        refined: list[ScoredEntry] = self._stage(
            "refine", refine_candidates, candidates, summary, self.refiner, self.refine_k)
        trace = trace.extended({
            "step": "refine", "selected": [c.entry.case_id for c in refined]})

        anchors = self._stage("align", align_factors, maker_graph,
                              [c.entry.graph for c in refined], self.matcher)
        trace = trace.extended({
            "step": "align",
            "anchors": [{"query_factor": a.query_factor,
                         "precedent_case": a.precedent_case,
                         "precedent_factor": a.precedent_factor,
                         "path_kind": a.path.kind.value,
                         "actions": [x.canonical_key for x in a.path.checker_actions]}
                        for a in anchors],
        })

        if not anchors:
            # No precedent offers a resolution path: never force a verdict.
            trace = trace.extended({
                "step": "adjudicate", "rule": 0, "verdict": Verdict.RMI.value,
                "flag": "no_applicable_precedent", "recommendations": []})
            outcome = AdjudicationOutcome(Verdict.RMI, (), trace)
            return CaseResult(record, maker_graph, outcome, {}, frozenset())

        fae = self._stage("deduce", fae_deduce, maker_graph, anchors, record, self.adapter)
        trace = trace.extended(
            {"step": "hypothesize", "factors": list(fae.hypotheses)},
            {"step": "plan", "actions": list(fae.plans)},
            {"step": "ground",
             "results": [{"action": g.action, "level": g.match_level.value,
                          "evidence": list(g.evidence_ids)} for g in fae.groundings]},
        )
        outcome = self._stage("adjudicate", adjudicate, fae.graph, fae.requests,
                              self.assessor, fae.partial_actions)
        outcome = replace(outcome, trace=trace.extended(*outcome.trace.steps))
        return CaseResult(record, fae.graph, outcome, dict(fae.requests),
                          fae.partial_actions)

    def grounder_for(self, record: CaseRecord) -> LexicalGrounder:
        return LexicalGrounder(self.templates, record)

    def respond(self, record: CaseRecord, graph: CaseGraph,
                new_evidence: list[EvidenceNode]) -> CaseResult:
        """The feedback loop: absorb newly supplied evidence and re-adjudicate.

        Everything needed — information-request texts, inconclusive-evidence
        markers — is rebuilt from the graph and record, so the loop works on a
        session reloaded from disk exactly as on a live one. A session that
        never found an applicable precedent has no planned actions to
        re-ground, so it goes back through the whole pipeline with the
        enlarged record instead.
        """
        if not any(a.origin is ActionOrigin.HYPOTHESIZED for a in graph.actions()):
            return self._resubmit(record, graph, new_evidence)
        graph = self._stage("attach", attach_evidence, graph, new_evidence,
                            self.grounder_for(record))
        planned = [a for a in graph.actions(Lane.CHECKER)
                   if a.origin is ActionOrigin.HYPOTHESIZED]
        requests = {a.id: self.adapter.adapt(a, record).request for a in planned}
        partial = frozenset(a.id for a in planned if a.status is ActionStatus.PARTIAL)
        trace_prefix = Trace(record.case_id).extended({
            "step": "attach_evidence",
            "evidence": sorted(n.id for n in new_evidence)})
        outcome = self._stage("adjudicate", adjudicate, graph, requests,
                              self.assessor, partial)
        outcome = replace(outcome, trace=trace_prefix.extended(*outcome.trace.steps))
        return CaseResult(record, graph, outcome, requests, partial)

    def _resubmit(self, record: CaseRecord, graph: CaseGraph,
                  new_evidence: list[EvidenceNode]) -> CaseResult:
        from .errors import DuplicateEvidenceId
        from .records import EvidenceItem

        known = {n.id for n in graph.nodes}
        for node in new_evidence:
            if node.id in known:
                raise PipelineFailure("attach", DuplicateEvidenceId(
                    f"evidence id {node.id!r} already in graph"))
        # the graph's evidence pool, not the original record, carries whatever
        # earlier responses already contributed
        pool = sorted(list(graph.evidence()) + new_evidence, key=lambda n: n.id)
        enlarged = replace(record, evidence_items=tuple(
            EvidenceItem(n.id, n.source_type, n.content, n.source_ref) for n in pool))
        return self.adjudicate_case(enlarged)

    def reattach(self, result: CaseResult, new_evidence: list[EvidenceNode]) -> CaseResult:
        return self.respond(result.record, result.graph, new_evidence)
