"""Canonical graph serialization (format ``graph-v1``).

One JSON object per line: a header line, then node lines sorted by id, then
edge lines sorted by (kind, from, to). Keys are sorted inside every object and
separators are fixed, so equal graphs always serialize to identical bytes.
See ``docs/graph-format.md`` for the field tables.

The stance a factor-decision edge carries is derived here from the source
factor's outcome rather than stored on the edge, so the two can never diverge.
"""

from __future__ import annotations

import json

from .errors import DuplicateNode, InvalidNode, MalformedRecord
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
)

FORMAT = "graph-v1"


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def node_payload(node) -> dict:
    payload = {"type": "node", "node_kind": node.node_kind, "id": node.id,
               "lane": node.lane.value}
    if isinstance(node, EvidenceNode):
        payload.update(content=node.content, source_ref=node.source_ref,
                       source_type=node.source_type.value)
    elif isinstance(node, ActionNode):
        payload.update(goal=node.goal, canonical_key=node.canonical_key,
                       origin=node.origin.value, criticality=node.criticality.value,
                       status=node.status.value)
    elif isinstance(node, FactorNode):
        payload.update(statement=node.statement, outcome=node.outcome.value,
                       origin=node.origin.value, resolution=node.resolution.value)
    elif isinstance(node, DecisionNode):
        payload.update(role=node.role.value, verdict=node.verdict.value)
    return payload


def edge_payload(graph: CaseGraph, edge: Edge) -> dict:
    payload = {"type": "edge", "edge_kind": edge.kind.value,
               "from": edge.source, "to": edge.target}
    if edge.kind is EdgeKind.FACTOR_FACTOR:
        payload["path_kind"] = (edge.path_kind or PathKind.EXTENDS).value
    elif edge.kind is EdgeKind.FACTOR_DECISION:
        payload["stance"] = graph.node(edge.source).outcome.value
    return payload


def render_graph(graph: CaseGraph) -> str:
    """Serialize a graph to its canonical text form (byte-stable)."""
    lines = [_dumps({"type": "header", "format": FORMAT, "case_id": graph.case_id})]
    for node in sorted(graph.nodes, key=lambda n: n.id):
        lines.append(_dumps(node_payload(node)))
    for edge in sorted(graph.edges, key=Edge.sort_key):
        lines.append(_dumps(edge_payload(graph, edge)))
    return "\n".join(lines) + "\n"


def _node_from_payload(obj: dict):
    kind = obj["node_kind"]
    lane = Lane(obj["lane"])
    if kind == "evidence":
        return EvidenceNode(obj["id"], lane, obj["content"], obj["source_ref"],
                            SourceType(obj["source_type"]))
    if kind == "action":
        return ActionNode(obj["id"], lane, obj["goal"], obj["canonical_key"],
                          ActionOrigin(obj["origin"]), Criticality(obj["criticality"]),
                          ActionStatus(obj["status"]))
    if kind == "factor":
        return FactorNode(obj["id"], lane, obj["statement"], FactorOutcome(obj["outcome"]),
                          FactorOrigin(obj["origin"]), Resolution(obj["resolution"]))
    if kind == "decision":
        return DecisionNode(obj["id"], lane, Role(obj["role"]), Verdict(obj["verdict"]))
    raise MalformedRecord(f"unknown node_kind {kind!r}")


def parse_graph(text: str) -> CaseGraph:
    """Parse a canonical graph document.

    Parsing is deliberately permissive about schema-level problems: edges are
    reinstated verbatim (dangling endpoints excepted) so that the validator,
    not the parser, decides structural correctness.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedRecord("empty graph document")
    objs = []
    for i, line in enumerate(lines):
        try:
            objs.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {i + 1}: {exc.msg}", offset=exc.pos) from exc
    header = objs[0]
    if header.get("type") != "header" or header.get("format") != FORMAT:
        raise MalformedRecord(f"missing or unsupported header (want format {FORMAT!r})")
    try:
        builder = GraphBuilder(header["case_id"])
    except KeyError:
        raise MalformedRecord("header missing case_id") from None

    nodes, edges = [], []
    for obj in objs[1:]:
        kind = obj.get("type")
        if kind == "node":
            nodes.append(obj)
        elif kind == "edge":
            edges.append(obj)
        else:
            raise MalformedRecord(f"unknown line type {kind!r}")
    try:
        for obj in nodes:
            builder.add(_node_from_payload(obj))
    except (KeyError, ValueError, DuplicateNode, InvalidNode) as exc:
        raise MalformedRecord(f"bad node object: {exc}") from exc

    # Edges bypass builder.link so that schema-invalid documents round-trip
    # into graphs the validator can report on. Dangling refs stay hard errors.
    parsed_edges = {}
    for obj in edges:
        try:
            edge = Edge(EdgeKind(obj["edge_kind"]), obj["from"], obj["to"],
                        PathKind(obj["path_kind"]) if "path_kind" in obj else None)
        except (KeyError, ValueError) as exc:
            raise MalformedRecord(f"bad edge object: {exc}") from exc
        if not builder.has_edge(edge.kind, edge.source, edge.target):
            if edge.source not in builder._nodes or edge.target not in builder._nodes:
                raise MalformedRecord(
                    f"edge {edge.source!r}->{edge.target!r} references unknown nodes")
            parsed_edges[edge.sort_key()] = edge
    builder._edges.update(parsed_edges)
    return builder.build()


def load_graph(path) -> CaseGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def dump_graph(graph: CaseGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_graph(graph))
