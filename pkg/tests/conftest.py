"""Shared fixtures: toy graphs, randomized valid graphs, mutation operators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from eafd.graph import (
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

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def evidence(i: str, lane=Lane.MAKER, content=None):
    if content is None:
        content = f"evidence text {i}"
    return EvidenceNode(i, lane, content, f"src:{i}", SourceType.DOCUMENT)


def action(i: str, lane=Lane.MAKER, key=None, origin=None, criticality=Criticality.SUPPORTING,
           status=ActionStatus.VERIFIED):
    return ActionNode(i, lane, key or f"verify thing {i}", key or f"verify_thing_{i}",
                      origin or ActionOrigin(lane.value), criticality, status)


def factor(i: str, lane=Lane.MAKER, outcome=FactorOutcome.CONTRADICT, statement=None):
    return FactorNode(i, lane, statement or f"finding_{i}", outcome,
                      FactorOrigin(lane.value), Resolution.ACTIONABLE)


def decision(lane: Lane, verdict: Verdict):
    return DecisionNode(f"d.{lane.value}", lane, Role(lane.value), verdict)


def tiny_graph(case_id="case-tiny") -> CaseGraph:
    """Fully linked four-layer dual-lane graph: one maker factor (two evidence
    items behind one action), one conflicting checker factor, overturned."""
    b = GraphBuilder(case_id)
    b.add(decision(Lane.MAKER, Verdict.REJECT))
    b.add(decision(Lane.CHECKER, Verdict.APPROVE))
    b.add(factor("f.m.1", Lane.MAKER, FactorOutcome.CONTRADICT))
    b.add(factor("f.c.1", Lane.CHECKER, FactorOutcome.SUPPORT))
    b.add(action("a.m.1", Lane.MAKER))
    b.add(action("a.c.1", Lane.CHECKER))
    b.add(evidence("e1"))
    b.add(evidence("e2"))
    b.add(evidence("e3", Lane.CHECKER))
    b.link(EdgeKind.EVIDENCE_ACTION, "e1", "a.m.1")
    b.link(EdgeKind.EVIDENCE_ACTION, "e2", "a.m.1")
    b.link(EdgeKind.EVIDENCE_ACTION, "e3", "a.c.1")
    b.link(EdgeKind.ACTION_FACTOR, "a.m.1", "f.m.1")
    b.link(EdgeKind.ACTION_FACTOR, "a.c.1", "f.c.1")
    b.link(EdgeKind.FACTOR_DECISION, "f.m.1", "d.maker")
    b.link(EdgeKind.FACTOR_DECISION, "f.c.1", "d.checker")
    b.link(EdgeKind.FACTOR_FACTOR, "f.m.1", "f.c.1", PathKind.EXTENDS)
    return b.build()


def random_valid_graph(rng: random.Random, case_id=None, min_factors=1) -> CaseGraph:
    """A schema-valid graph with randomized shape, built through the builder so
    every structural invariant holds by construction."""
    case_id = case_id or f"case-{rng.randrange(10**8):08d}"
    b = GraphBuilder(case_id)
    b.add(decision(Lane.MAKER, Verdict.REJECT))
    seq = {"e": 0, "a": 0, "f": 0}

    def new_evidence(lane):
        seq["e"] += 1
        node = evidence(f"e{seq['e']:03d}", lane)
        b.add(node)
        return node

    def new_action(lane, target_factor_id):
        seq["a"] += 1
        node = action(f"a.{lane.value[0]}.{seq['a']:03d}", lane)
        b.add(node)
        b.link(EdgeKind.ACTION_FACTOR, node.id, target_factor_id)
        for _ in range(rng.randint(1, 2)):
            ev = new_evidence(lane)
            b.link(EdgeKind.EVIDENCE_ACTION, ev.id, node.id)
        return node

    def new_factor(lane, outcome):
        seq["f"] += 1
        node = factor(f"f.{lane.value[0]}.{seq['f']:03d}", lane, outcome)
        b.add(node)
        b.link(EdgeKind.FACTOR_DECISION, node.id, f"d.{lane.value}")
        for _ in range(rng.randint(1, 2)):
            new_action(lane, node.id)
        return node

    maker_factors = [new_factor(Lane.MAKER, FactorOutcome.CONTRADICT)
                     for _ in range(max(min_factors, rng.randint(1, 3)))]

    if rng.random() < 0.6:
        overturn = rng.random() < 0.7
        b.add(decision(Lane.CHECKER, Verdict.APPROVE if overturn else Verdict.REJECT))
        for mf in maker_factors:
            roll = rng.random()
            if overturn or roll < 0.4:
                cf = new_factor(Lane.CHECKER,
                                FactorOutcome.SUPPORT if overturn else FactorOutcome.CONTRADICT)
                b.link(EdgeKind.FACTOR_FACTOR, mf.id, cf.id, PathKind.EXTENDS)
            elif roll < 0.8:
                seq["a"] += 1
                node = action(f"a.c.{seq['a']:03d}", Lane.CHECKER)
                b.add(node)
                b.link(EdgeKind.ACTION_FACTOR, node.id, mf.id)
                ev = new_evidence(Lane.CHECKER)
                b.link(EdgeKind.EVIDENCE_ACTION, ev.id, node.id)
    return b.build()


# --- mutation operators (bypass the builder: they construct invalid values) ----


def _raw(graph: CaseGraph, nodes=None, edges=None) -> CaseGraph:
    return CaseGraph(graph.case_id,
                     tuple(nodes if nodes is not None else graph.nodes),
                     tuple(edges if edges is not None else graph.edges))


def mutate_invalid_direction(graph: CaseGraph, rng: random.Random) -> CaseGraph:
    candidates = [e for e in graph.edges if e.kind is not EdgeKind.FACTOR_FACTOR]
    victim = rng.choice(candidates)
    flipped = Edge(victim.kind, victim.target, victim.source, victim.path_kind)
    edges = [flipped if e is victim else e for e in graph.edges]
    return _raw(graph, edges=edges)


def mutate_orphan_factor(graph: CaseGraph, rng: random.Random) -> CaseGraph:
    victim = rng.choice([f.id for f in graph.factors()])
    edges = [e for e in graph.edges
             if not (e.kind is EdgeKind.ACTION_FACTOR and e.target == victim)]
    return _raw(graph, edges=edges)


def mutate_orphan_action(graph: CaseGraph, rng: random.Random) -> CaseGraph:
    victim = rng.choice([a.id for a in graph.actions()])
    edges = [e for e in graph.edges
             if not (e.kind is EdgeKind.EVIDENCE_ACTION and e.target == victim)]
    return _raw(graph, edges=edges)


def mutate_multi_factor_action(graph: CaseGraph, rng: random.Random) -> CaseGraph:
    actions = [a for a in graph.actions()]
    factors = [f for f in graph.factors()]
    victim = rng.choice(actions)
    current = {e.target for e in graph.out_edges(victim.id, EdgeKind.ACTION_FACTOR)}
    others = [f for f in factors if f.id not in current]
    extra = Edge(EdgeKind.ACTION_FACTOR, victim.id, rng.choice(others).id)
    return _raw(graph, edges=list(graph.edges) + [extra])


def mutate_self_conflict(graph: CaseGraph, rng: random.Random) -> CaseGraph:
    victim = rng.choice([f.id for f in graph.factors()])
    loop = Edge(EdgeKind.FACTOR_FACTOR, victim, victim, PathKind.EXTENDS)
    return _raw(graph, edges=list(graph.edges) + [loop])


MUTATIONS = {
    "invalid_direction": mutate_invalid_direction,
    "orphan_factor": mutate_orphan_factor,
    "orphan_action": mutate_orphan_action,
    "multi_factor_action": mutate_multi_factor_action,
    "self_conflict": mutate_self_conflict,
}


@pytest.fixture
def rng():
    return random.Random(0xEAFD)


def adjudication_graph(config, case_id="case-adj") -> CaseGraph:
    """Checker-lane graph for decision-table tests.

    ``config`` is a list of (outcome, actions) pairs, one per factor, where
    each action is a (criticality, status) pair with status verified/missing.
    Planned (hypothesized) actions are attached accordingly; verified ones get
    a grounding evidence node so the graph stays schema-valid.
    """
    b = GraphBuilder(case_id)
    n_action = 0
    for i, (outcome, actions) in enumerate(config, start=1):
        f = FactorNode(f"f.hyp.{i:03d}", Lane.CHECKER, f"finding_{i}",
                       FactorOutcome(outcome), FactorOrigin.CHECKER,
                       Resolution.UNRESOLVED)
        b.add(f)
        for crit, status in actions:
            n_action += 1
            a = ActionNode(f"a.hyp.{n_action:03d}", Lane.CHECKER,
                           f"verify item {n_action}", f"verify_item_{n_action}",
                           ActionOrigin.HYPOTHESIZED, Criticality(crit),
                           ActionStatus(status))
            b.add(a)
            b.link(EdgeKind.ACTION_FACTOR, a.id, f.id)
            if status == "verified":
                ev = EvidenceNode(f"e{n_action:03d}", Lane.MAKER,
                                  f"verify item {n_action} evidence", f"s:{n_action}",
                                  SourceType.DOCUMENT)
                b.add(ev)
                b.link(EdgeKind.EVIDENCE_ACTION, ev.id, a.id)
    return b.build()
