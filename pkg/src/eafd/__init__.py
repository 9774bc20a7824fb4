"""Dual-lane case-graph reasoning for two-tier review adjudication.

The package builds validated evidence/action/factor/decision graphs from
review records, indexes them for similarity retrieval, and adjudicates new
maker-rejected cases by projecting precedent resolution structures onto them —
approving, rejecting, or requesting exactly the missing critical verifications.
"""

from .annotations import AnnotatedStatement, parse_annotations, render_annotations
from .corpus import CorpusSpec, derive_labels, generate_corpus
from .errors import EafdError
from .extract import AnnotationExtractor, extract_graph, refine_actions
from .graph import (
    ActionNode,
    ActionOrigin,
    ActionStatus,
    CaseGraph,
    Criticality,
    DecisionNode,
    Edge,
    EdgeKind,
    EvidenceNode,
    FactorNode,
    FactorOrigin,
    FactorOutcome,
    GraphBuilder,
    Lane,
    PathKind,
    Resolution,
    Role,
    SourceType,
    Verdict,
    conflict_pairs,
    grounding_chain,
    link_nodes,
)
from .kb import KnowledgeBase, KbEntry, build_conflict_edges, refine_candidates
from .metrics import MetricsReport, action_hit_rate, cumulative_alignment, evaluate
from .pipeline import Pipeline
from .reasoner import (
    AdjudicationOutcome,
    adjudicate,
    align_factors,
    attach_evidence,
    build_maker_graph,
    fae_deduce,
)
from .records import CaseRecord, parse_case_record, render_case_record
from .serialize import parse_graph, render_graph
from .validate import ValidationReport, Violation, repair, validate

__version__ = "0.1.0"

__all__ = [
    "ActionNode", "ActionOrigin", "ActionStatus", "AdjudicationOutcome",
    "AnnotatedStatement", "AnnotationExtractor", "CaseGraph", "CaseRecord",
    "CorpusSpec", "Criticality", "DecisionNode", "EafdError", "Edge",
    "EdgeKind", "EvidenceNode", "FactorNode", "FactorOrigin", "FactorOutcome",
    "GraphBuilder", "KbEntry", "KnowledgeBase", "Lane", "MetricsReport",
    "PathKind", "Pipeline", "Resolution", "Role", "SourceType",
    "ValidationReport", "Verdict", "Violation", "action_hit_rate",
    "adjudicate", "align_factors", "attach_evidence", "build_conflict_edges",
    "build_maker_graph", "conflict_pairs", "cumulative_alignment",
    "derive_labels", "evaluate", "extract_graph", "fae_deduce",
    "generate_corpus", "grounding_chain", "link_nodes", "parse_annotations",
    "parse_case_record", "parse_graph", "refine_actions", "refine_candidates",
    "render_annotations", "render_case_record", "render_graph", "repair",
    "validate",
]
