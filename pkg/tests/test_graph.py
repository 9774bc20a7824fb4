"""Graph model: typed linking, lane rules, navigation queries."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import action, decision, evidence, factor, random_valid_graph, tiny_graph
from eafd.errors import (
    CrossLaneViolation,
    DuplicateEdge,
    DuplicateNode,
    InvalidNode,
    TypeIncompatible,
    UnknownNode,
)
from eafd.graph import (
    ActionOrigin,
    Edge,
    EdgeKind,
    GraphBuilder,
    Lane,
    PathKind,
    Verdict,
    conflict_pairs,
    grounding_chain,
    link_nodes,
)


class TestNodeInvariants:
    def test_empty_evidence_content_rejected(self):
        with pytest.raises(InvalidNode):
            evidence("e1", content="")

    def test_empty_source_ref_rejected(self):
        from eafd.graph import EvidenceNode, SourceType
        with pytest.raises(InvalidNode):
            EvidenceNode("e1", Lane.MAKER, "text", "", SourceType.DOCUMENT)

    def test_maker_decision_must_reject(self):
        with pytest.raises(InvalidNode):
            decision(Lane.MAKER, Verdict.APPROVE)

    def test_empty_canonical_key_rejected(self):
        from eafd.graph import ActionNode
        with pytest.raises(InvalidNode):
            ActionNode("a1", Lane.MAKER, "goal", "", ActionOrigin.MAKER)


class TestBuilder:
    def test_duplicate_node_id(self):
        b = GraphBuilder("c1").add(evidence("e1"))
        with pytest.raises(DuplicateNode):
            b.add(evidence("e1"))

    def test_one_decision_per_lane(self):
        b = GraphBuilder("c1").add(decision(Lane.MAKER, Verdict.REJECT))
        from eafd.graph import DecisionNode, Role
        with pytest.raises(DuplicateNode):
            b.add(DecisionNode("d2", Lane.MAKER, Role.MAKER, Verdict.REJECT))

    def test_graphs_are_immutable_values(self):
        g = tiny_graph()
        with pytest.raises(Exception):
            g.case_id = "other"
        assert g == tiny_graph()
        assert hash(g) == hash(tiny_graph())


class TestLinkNodes:
    def test_schema_permitted_pair_accepted(self):
        b = GraphBuilder("c1").add(evidence("e1")).add(factor("f1"))
        b.add(action("a1"))
        g = b.build()
        linked = link_nodes(g, Edge(EdgeKind.EVIDENCE_ACTION, "e1", "a1"))
        assert linked.out_edges("e1", EdgeKind.EVIDENCE_ACTION)
        assert not g.out_edges("e1")  # original untouched

    def test_decision_to_factor_is_type_incompatible(self):
        b = GraphBuilder("c1").add(decision(Lane.MAKER, Verdict.REJECT))
        b.add(factor("f1"))
        g = b.build()
        with pytest.raises(TypeIncompatible):
            link_nodes(g, Edge(EdgeKind.FACTOR_DECISION, "d.maker", "f1"))

    def test_second_action_factor_edge_accepted_then_flagged(self):
        # cardinality is deferred to the validator
        from eafd.validate import validate
        b = GraphBuilder("c1").add(action("a1")).add(factor("f1")).add(factor("f2"))
        b.add(evidence("e1"))
        b.link(EdgeKind.EVIDENCE_ACTION, "e1", "a1")
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f1")
        g = link_nodes(b.build(), Edge(EdgeKind.ACTION_FACTOR, "a1", "f2"))
        assert len(g.out_edges("a1", EdgeKind.ACTION_FACTOR)) == 2
        report = validate(g)
        assert any(v.kind.value == "cardinality" and v.location == ("a1",)
                   for v in report.violations)

    def test_duplicate_edge_rejected(self):
        g = tiny_graph()
        with pytest.raises(DuplicateEdge):
            link_nodes(g, Edge(EdgeKind.ACTION_FACTOR, "a.m.1", "f.m.1"))

    def test_unknown_endpoint(self):
        g = tiny_graph()
        with pytest.raises(UnknownNode):
            link_nodes(g, Edge(EdgeKind.EVIDENCE_ACTION, "nope", "a.m.1"))

    def test_cross_lane_factor_decision_rejected(self):
        g = tiny_graph()
        with pytest.raises(CrossLaneViolation):
            link_nodes(g, Edge(EdgeKind.FACTOR_DECISION, "f.c.1", "d.maker"))

    def test_maker_action_cannot_target_checker_factor(self):
        g = tiny_graph()
        with pytest.raises(CrossLaneViolation):
            link_nodes(g, Edge(EdgeKind.ACTION_FACTOR, "a.m.1", "f.c.1"))

    def test_checker_action_may_verify_maker_factor(self):
        g = link_nodes(tiny_graph(), Edge(EdgeKind.ACTION_FACTOR, "a.c.1", "f.m.1"))
        assert any(e.target == "f.m.1" for e in g.out_edges("a.c.1"))

    def test_conflict_edge_must_run_maker_to_checker(self):
        g = tiny_graph()
        with pytest.raises(CrossLaneViolation):
            link_nodes(g, Edge(EdgeKind.FACTOR_FACTOR, "f.c.1", "f.m.1"))


class TestGroundingChain:
    def test_single_action_two_evidence(self):
        g = tiny_graph()
        chains = grounding_chain(g, "f.m.1")
        assert len(chains) == 1
        act, ev = chains[0]
        assert act.id == "a.m.1"
        assert [e.id for e in ev] == ["e1", "e2"]

    def test_factor_with_no_actions_is_empty(self):
        b = GraphBuilder("c1").add(factor("f1"))
        assert grounding_chain(b.build(), "f1") == []

    def test_non_factor_rejected(self):
        with pytest.raises(UnknownNode):
            grounding_chain(tiny_graph(), "a.m.1")

    def test_matches_brute_force_scan_on_random_graphs(self):
        rng = random.Random(7)
        for _ in range(30):
            g = random_valid_graph(rng)
            for f in g.factors():
                chains = grounding_chain(g, f.id)
                expected = sorted(
                    (e.source, tuple(sorted(x.source for x in g.edges
                                            if x.kind is EdgeKind.EVIDENCE_ACTION
                                            and x.target == e.source)))
                    for e in g.edges
                    if e.kind is EdgeKind.ACTION_FACTOR and e.target == f.id)
                got = [(a.id, tuple(x.id for x in ev)) for a, ev in chains]
                assert got == expected


class TestConflictPairs:
    def test_no_checker_lane_is_empty(self):
        b = GraphBuilder("c1").add(factor("f1"))
        assert conflict_pairs(b.build()) == []

    def test_overturned_fixture_has_one_extends_pair(self):
        pairs = conflict_pairs(tiny_graph())
        assert len(pairs) == 1
        maker, checker, kind = pairs[0]
        assert (maker.id, checker.id, kind) == ("f.m.1", "f.c.1", PathKind.EXTENDS)

    def test_direct_verification_not_emitted(self):
        # a checker action attached straight to the maker factor is not a
        # conflict edge, so a graph with only that structure yields nothing
        b = GraphBuilder("c1")
        b.add(decision(Lane.MAKER, Verdict.REJECT))
        b.add(decision(Lane.CHECKER, Verdict.REJECT))
        b.add(factor("f.m.1", Lane.MAKER))
        b.add(action("a.m.1", Lane.MAKER)).add(action("a.c.1", Lane.CHECKER))
        b.add(evidence("e1")).add(evidence("e2", Lane.CHECKER))
        b.link(EdgeKind.EVIDENCE_ACTION, "e1", "a.m.1")
        b.link(EdgeKind.EVIDENCE_ACTION, "e2", "a.c.1")
        b.link(EdgeKind.ACTION_FACTOR, "a.m.1", "f.m.1")
        b.link(EdgeKind.ACTION_FACTOR, "a.c.1", "f.m.1")
        b.link(EdgeKind.FACTOR_DECISION, "f.m.1", "d.maker")
        g = b.build()
        assert conflict_pairs(g) == []
        from eafd.graph import path_one_actions
        assert [a.id for a in path_one_actions(g, "f.m.1")] == ["a.c.1"]


class TestEdgeTypeProperty:
    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_constructed_edges_always_satisfy_kind_table(self, seed):
        from eafd.graph import endpoint_kinds
        g = random_valid_graph(random.Random(seed))
        for e in g.edges:
            src, tgt = g.node(e.source), g.node(e.target)
            assert (src.node_kind, tgt.node_kind) == endpoint_kinds(e.kind)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_conflict_edges_connect_maker_to_checker_only(self, seed):
        g = random_valid_graph(random.Random(seed))
        for e in g.conflict_edges:
            assert g.node(e.source).lane is Lane.MAKER
            assert g.node(e.target).lane is Lane.CHECKER

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_mutation_never_passes_unnoticed(self, seed):
        from conftest import MUTATIONS
        from eafd.validate import validate
        rng = random.Random(seed)
        g = random_valid_graph(rng, min_factors=2)
        name = rng.choice(sorted(MUTATIONS))
        mutated = MUTATIONS[name](g, rng)
        assert not validate(mutated).passed, name
