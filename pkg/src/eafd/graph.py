"""Dual-lane case graphs: four node layers, four edge families.

A case graph records one appeal case as two parallel reasoning traces — the
maker's initial review and the checker's re-review — over a shared pool of
case evidence. Nodes are typed (evidence, action, factor, decision), each
belongs to exactly one lane, and edges are constrained to the layer pairs the
schema permits. Cross-lane edges are the correction signal: a factor-factor
conflict edge links a maker factor to the checker factor that overrides it,
and a checker action may attach directly to a maker factor when the checker
re-verified that factor rather than introducing a new one. Because checkers
work from the full case file, a checker action may also ground in evidence
that entered with the maker's review; the reverse direction is forbidden.

Graphs are immutable values once built; all construction and derivation goes
through :class:`GraphBuilder`. Construction-time checks cover node identity,
lane membership, and edge typing. Cardinality rules (one factor per action,
one conflict partner per factor) are deliberately *not* enforced here — they
are the validator's job, so that imperfect extractor output can be represented,
reported, and repaired instead of being silently rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import (
    CrossLaneViolation,
    DuplicateEdge,
    DuplicateNode,
    InvalidNode,
    TypeIncompatible,
    UnknownNode,
)


class Lane(str, Enum):
    MAKER = "maker"
    CHECKER = "checker"


class SourceType(str, Enum):
    SELLER_STATEMENT = "seller_statement"
    DOCUMENT = "document"
    IMAGE_EXTRACT = "image_extract"
    CHAT_LOG = "chat_log"
    SYSTEM_RECORD = "system_record"


class ActionOrigin(str, Enum):
    MAKER = "maker"
    CHECKER = "checker"
    HYPOTHESIZED = "hypothesized"


class Criticality(str, Enum):
    CRITICAL = "critical"
    SUPPORTING = "supporting"


class ActionStatus(str, Enum):
    UNEVALUATED = "unevaluated"
    VERIFIED = "verified"
    PARTIAL = "partial"
    MISSING = "missing"


class FactorOutcome(str, Enum):
    SUPPORT = "support"
    CONTRADICT = "contradict"


class FactorOrigin(str, Enum):
    MAKER = "maker"
    CHECKER = "checker"


class Resolution(str, Enum):
    ACTIONABLE = "actionable"
    UNRESOLVED = "unresolved"


class Role(str, Enum):
    MAKER = "maker"
    CHECKER = "checker"


class Verdict(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"
    RMI = "rmi"


class EdgeKind(str, Enum):
    EVIDENCE_ACTION = "evidence_action"
    ACTION_FACTOR = "action_factor"
    FACTOR_DECISION = "factor_decision"
    FACTOR_FACTOR = "factor_factor"


class PathKind(str, Enum):
    VERIFIES = "verifies"
    EXTENDS = "extends"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidNode(message)


@dataclass(frozen=True)
class EvidenceNode:
    """Atomic factual snippet, traceable to the original case materials."""

    id: str
    lane: Lane
    content: str
    source_ref: str
    source_type: SourceType

    node_kind = "evidence"

    def __post_init__(self):
        _require(bool(self.id), "evidence node id must be non-empty")
        _require(bool(self.content), f"evidence {self.id!r}: content must be non-empty")
        _require(bool(self.source_ref), f"evidence {self.id!r}: source_ref must be non-empty")


@dataclass(frozen=True)
class ActionNode:
    """Goal-oriented verification operation documented in (or planned from) a review."""

    id: str
    lane: Lane
    goal: str
    canonical_key: str
    origin: ActionOrigin
    criticality: Criticality = Criticality.SUPPORTING
    status: ActionStatus = ActionStatus.UNEVALUATED

    node_kind = "action"

    def __post_init__(self):
        _require(bool(self.id), "action node id must be non-empty")
        _require(bool(self.canonical_key), f"action {self.id!r}: canonical_key must be non-empty")


@dataclass(frozen=True)
class FactorNode:
    """Interpretable decision criterion with a support/contradict outcome."""

    id: str
    lane: Lane
    statement: str
    outcome: FactorOutcome
    origin: FactorOrigin
    resolution: Resolution = Resolution.UNRESOLVED

    node_kind = "factor"

    def __post_init__(self):
        _require(bool(self.id), "factor node id must be non-empty")
        _require(bool(self.statement), f"factor {self.id!r}: statement must be non-empty")


@dataclass(frozen=True)
class DecisionNode:
    """A lane's review outcome. Makers only ever reject in this problem setting."""

    id: str
    lane: Lane
    role: Role
    verdict: Verdict

    node_kind = "decision"

    def __post_init__(self):
        _require(bool(self.id), "decision node id must be non-empty")
        if self.role is Role.MAKER and self.verdict is not Verdict.REJECT:
            raise InvalidNode(f"decision {self.id!r}: maker decisions are always reject")


Node = Union[EvidenceNode, ActionNode, FactorNode, DecisionNode]


@dataclass(frozen=True)
class Edge:
    kind: EdgeKind
    source: str
    target: str
    path_kind: PathKind | None = None

    def sort_key(self) -> tuple[str, str, str]:
        return (self.kind.value, self.source, self.target)


# Permitted (source layer, target layer) per edge kind.
_ENDPOINT_TABLE: dict[EdgeKind, tuple[str, str]] = {
    EdgeKind.EVIDENCE_ACTION: ("evidence", "action"),
    EdgeKind.ACTION_FACTOR: ("action", "factor"),
    EdgeKind.FACTOR_DECISION: ("factor", "decision"),
    EdgeKind.FACTOR_FACTOR: ("factor", "factor"),
}


def endpoint_kinds(kind: EdgeKind) -> tuple[str, str]:
    """The (source layer, target layer) pair an edge kind requires."""
    return _ENDPOINT_TABLE[kind]


def lane_compatible(kind: EdgeKind, source: Node, target: Node) -> bool:
    """Lane rule table for an edge whose endpoint layers already match ``kind``.

    Same-lane is always permitted except for conflict edges, which must cross
    from a maker factor to a checker factor. Two asymmetric crossings reflect
    that the checker works from a superset of the maker's information:
    checker actions may verify maker factors directly, and may ground in
    maker-lane evidence. Nothing checker-side is ever visible to maker nodes.
    """
    if kind is EdgeKind.FACTOR_FACTOR:
        return source.lane is Lane.MAKER and target.lane is Lane.CHECKER
    if source.lane is target.lane:
        return True
    if kind is EdgeKind.ACTION_FACTOR:
        return source.lane is Lane.CHECKER and target.lane is Lane.MAKER
    if kind is EdgeKind.EVIDENCE_ACTION:
        return source.lane is Lane.MAKER and target.lane is Lane.CHECKER
    return False


@dataclass(frozen=True)
class CaseGraph:
    """Immutable dual-lane case graph. Build via :class:`GraphBuilder`."""

    case_id: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {n.id: n for n in self.nodes})

    # --- lookups ---------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(f"no node {node_id!r} in case {self.case_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def _layer(self, kind: str, lane: Lane | None = None) -> Iterator[Node]:
        for n in self.nodes:
            if n.node_kind == kind and (lane is None or n.lane is lane):
                yield n

    def evidence(self, lane: Lane | None = None) -> Iterator[EvidenceNode]:
        return self._layer("evidence", lane)

    def actions(self, lane: Lane | None = None) -> Iterator[ActionNode]:
        return self._layer("action", lane)

    def factors(self, lane: Lane | None = None) -> Iterator[FactorNode]:
        return self._layer("factor", lane)

    def decision(self, lane: Lane) -> DecisionNode | None:
        for n in self._layer("decision", lane):
            return n
        return None

    def out_edges(self, node_id: str, kind: EdgeKind | None = None) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id and (kind is None or e.kind is kind)]

    def in_edges(self, node_id: str, kind: EdgeKind | None = None) -> list[Edge]:
        return [e for e in self.edges if e.target == node_id and (kind is None or e.kind is kind)]

    @property
    def conflict_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.kind is EdgeKind.FACTOR_FACTOR)

    def has_lane(self, lane: Lane) -> bool:
        return any(n.lane is lane for n in self.nodes)

    def builder(self) -> "GraphBuilder":
        """A single-owner builder seeded with this graph's nodes and edges."""
        return GraphBuilder.from_graph(self)


class GraphBuilder:
    """Mutable, single-owner accumulator that freezes into a :class:`CaseGraph`.

    Identity, lane membership, and edge typing are checked as nodes and edges
    arrive; cardinality problems are left for the validator to report.
    """

    def __init__(self, case_id: str):
        if not case_id:
            raise InvalidNode("case_id must be non-empty")
        self.case_id = case_id
        self._nodes: dict[str, Node] = {}
        self._edges: dict[tuple[str, str, str], Edge] = {}

    @classmethod
    def from_graph(cls, graph: CaseGraph) -> "GraphBuilder":
        b = cls(graph.case_id)
        b._nodes = {n.id: n for n in graph.nodes}
        b._edges = {e.sort_key(): e for e in graph.edges}
        return b

    def add(self, node: Node) -> "GraphBuilder":
        if node.id in self._nodes:
            raise DuplicateNode(f"node id {node.id!r} already present")
        if node.node_kind == "decision":
            existing = [n for n in self._nodes.values()
                        if n.node_kind == "decision" and n.lane is node.lane]
            if existing:
                raise DuplicateNode(f"lane {node.lane.value} already has a decision node")
        self._nodes[node.id] = node
        return self

    def add_all(self, nodes: Iterable[Node]) -> "GraphBuilder":
        for n in nodes:
            self.add(n)
        return self

    def replace_node(self, node: Node) -> "GraphBuilder":
        """Swap in a new value for an existing node id (e.g. grounding statuses)."""
        if node.id not in self._nodes:
            raise UnknownNode(f"no node {node.id!r} to replace")
        if self._nodes[node.id].node_kind != node.node_kind:
            raise TypeIncompatible(f"cannot change node kind of {node.id!r}")
        self._nodes[node.id] = node
        return self

    def remove_node(self, node_id: str) -> "GraphBuilder":
        """Drop a node and every edge touching it (repair plumbing)."""
        if node_id not in self._nodes:
            raise UnknownNode(f"no node {node_id!r} to remove")
        del self._nodes[node_id]
        self._edges = {k: e for k, e in self._edges.items()
                       if e.source != node_id and e.target != node_id}
        return self

    def remove_edge(self, kind: EdgeKind, source: str, target: str) -> "GraphBuilder":
        key = (kind.value, source, target)
        if key not in self._edges:
            raise UnknownNode(f"no edge {key} to remove")
        del self._edges[key]
        return self

    def link(self, kind: EdgeKind, source: str, target: str,
             path_kind: PathKind | None = None) -> "GraphBuilder":
        if source not in self._nodes:
            raise UnknownNode(f"edge source {source!r} not in graph")
        if target not in self._nodes:
            raise UnknownNode(f"edge target {target!r} not in graph")
        src, tgt = self._nodes[source], self._nodes[target]
        want = _ENDPOINT_TABLE[kind]
        if (src.node_kind, tgt.node_kind) != want:
            raise TypeIncompatible(
                f"{kind.value} edge requires {want[0]}->{want[1]}, "
                f"got {src.node_kind}->{tgt.node_kind} ({source!r}->{target!r})")
        if not lane_compatible(kind, src, tgt):
            raise CrossLaneViolation(
                f"{kind.value} edge {source!r}->{target!r} spans lanes "
                f"{src.lane.value}->{tgt.lane.value}")
        if kind is EdgeKind.FACTOR_FACTOR and path_kind is None:
            path_kind = PathKind.EXTENDS
        edge = Edge(kind, source, target, path_kind)
        key = edge.sort_key()
        if key in self._edges:
            raise DuplicateEdge(f"duplicate {kind.value} edge {source!r}->{target!r}")
        self._edges[key] = edge
        return self

    def has_edge(self, kind: EdgeKind, source: str, target: str) -> bool:
        return (kind.value, source, target) in self._edges

    def build(self) -> CaseGraph:
        nodes = tuple(sorted(self._nodes.values(), key=lambda n: n.id))
        edges = tuple(sorted(self._edges.values(), key=Edge.sort_key))
        return CaseGraph(self.case_id, nodes, edges)


# --- structure-navigation operations -----------------------------------------


def link_nodes(graph: CaseGraph, edge: Edge) -> CaseGraph:
    """Return a new graph with ``edge`` added; the input graph is never mutated.

    Raises TypeIncompatible / CrossLaneViolation / DuplicateEdge / UnknownNode.
    Cardinality excesses (e.g. a second factor for one action) are accepted
    here and surface later in validation.
    """
    b = graph.builder()
    b.link(edge.kind, edge.source, edge.target, edge.path_kind)
    return b.build()


def grounding_chain(graph: CaseGraph, factor_id: str) -> list[tuple[ActionNode, list[EvidenceNode]]]:
    """Every action feeding ``factor_id``, each with its evidence set.

    Order is deterministic: actions sorted by node id, evidence within each
    action sorted by node id.
    """
    factor = graph.node(factor_id)
    if factor.node_kind != "factor":
        raise UnknownNode(f"node {factor_id!r} is a {factor.node_kind}, not a factor")
    chains = []
    for edge in sorted(graph.in_edges(factor_id, EdgeKind.ACTION_FACTOR), key=Edge.sort_key):
        action = graph.node(edge.source)
        evidence = [graph.node(e.source)
                    for e in graph.in_edges(action.id, EdgeKind.EVIDENCE_ACTION)]
        chains.append((action, sorted(evidence, key=lambda n: n.id)))
    return chains


def conflict_pairs(graph: CaseGraph) -> list[tuple[FactorNode, FactorNode, PathKind]]:
    """All factor-factor conflict edges as (maker factor, checker factor, path kind).

    Checker actions that verify a maker factor directly are represented as
    cross-lane action-factor edges, not conflict edges, so they never appear
    here. Deterministic order by (maker id, checker id).
    """
    pairs = []
    for edge in sorted(graph.conflict_edges, key=Edge.sort_key):
        pairs.append((graph.node(edge.source), graph.node(edge.target),
                      edge.path_kind or PathKind.EXTENDS))
    return pairs


def path_one_actions(graph: CaseGraph, maker_factor_id: str) -> list[ActionNode]:
    """Checker-lane actions attached directly to a maker factor (re-verification)."""
    actions = []
    for edge in graph.in_edges(maker_factor_id, EdgeKind.ACTION_FACTOR):
        node = graph.node(edge.source)
        if node.lane is Lane.CHECKER:
            actions.append(node)
    return sorted(actions, key=lambda n: n.id)


def with_action_status(graph: CaseGraph, action_id: str, status: ActionStatus) -> CaseGraph:
    """New graph with one action's status replaced."""
    action = graph.node(action_id)
    if action.node_kind != "action":
        raise UnknownNode(f"node {action_id!r} is a {action.node_kind}, not an action")
    return graph.builder().replace_node(replace(action, status=status)).build()
