"""Validator: violation reporting, brute-force agreement, targeted repair."""

from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    MUTATIONS,
    action,
    decision,
    evidence,
    factor,
    random_valid_graph,
    tiny_graph,
)
from eafd.errors import RegeneratorFailure, RepairDiverged
from eafd.graph import (
    ActionOrigin,
    ActionStatus,
    CaseGraph,
    Edge,
    EdgeKind,
    GraphBuilder,
    Lane,
    PathKind,
    Verdict,
)
from eafd.validate import ValidationReport, ViolationKind, repair, validate
from oracles import brute_force_check


def report_as_set(report: ValidationReport):
    return {(v.kind.value, v.location) for v in report.violations}


class TestValidate:
    def test_fully_linked_graph_passes(self):
        report = validate(tiny_graph())
        assert report.passed
        assert report.violations == ()

    def test_factor_without_action_is_completeness(self):
        b = GraphBuilder("c1").add(factor("f1"))
        report = validate(b.build())
        assert [(v.kind, v.location) for v in report.violations] == [
            (ViolationKind.COMPLETENESS, ("f1",))]

    def test_action_with_two_factors_is_cardinality(self):
        b = GraphBuilder("c1").add(action("a1")).add(factor("f1")).add(factor("f2"))
        b.add(evidence("e1"))
        b.link(EdgeKind.EVIDENCE_ACTION, "e1", "a1")
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f1")
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f2")
        kinds = {v.kind for v in validate(b.build()).violations if v.location == ("a1",)}
        assert kinds == {ViolationKind.CARDINALITY}

    def test_self_referential_conflict_is_cardinality_and_type(self):
        g = tiny_graph()
        loop = Edge(EdgeKind.FACTOR_FACTOR, "f.m.1", "f.m.1", PathKind.EXTENDS)
        mutated = CaseGraph(g.case_id, g.nodes, g.edges + (loop,))
        kinds = {v.kind for v in validate(mutated).violations}
        assert kinds == {ViolationKind.CARDINALITY, ViolationKind.TYPE_COMPAT}

    def test_unverified_planned_action_needs_no_evidence(self):
        b = GraphBuilder("c1")
        b.add(factor("f1", Lane.CHECKER))
        b.add(action("a1", Lane.CHECKER, origin=ActionOrigin.HYPOTHESIZED,
                     status=ActionStatus.MISSING))
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f1")
        assert validate(b.build()).passed

    def test_verified_planned_action_does_need_evidence(self):
        b = GraphBuilder("c1")
        b.add(factor("f1", Lane.CHECKER))
        b.add(action("a1", Lane.CHECKER, origin=ActionOrigin.HYPOTHESIZED,
                     status=ActionStatus.VERIFIED))
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f1")
        assert not validate(b.build()).passed

    def test_partnerless_checker_factor_is_note_not_violation(self):
        b = GraphBuilder("c1")
        b.add(decision(Lane.CHECKER, Verdict.REJECT))
        b.add(factor("f.c.1", Lane.CHECKER)).add(action("a1", Lane.CHECKER))
        b.add(evidence("e1", Lane.CHECKER))
        b.link(EdgeKind.EVIDENCE_ACTION, "e1", "a1")
        b.link(EdgeKind.ACTION_FACTOR, "a1", "f.c.1")
        b.link(EdgeKind.FACTOR_DECISION, "f.c.1", "d.checker")
        report = validate(b.build())
        assert report.passed
        assert report.notes and "f.c.1" in report.notes[0]

    def test_idempotent_byte_for_byte(self):
        rng = random.Random(3)
        for _ in range(20):
            g = random_valid_graph(rng, min_factors=2)
            m = MUTATIONS[rng.choice(sorted(MUTATIONS))](g, rng)
            assert validate(m).render() == validate(m).render()

    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_agrees_with_brute_force_on_random_graphs(self, seed):
        rng = random.Random(seed)
        g = random_valid_graph(rng, min_factors=2)
        assert validate(g).passed
        assert brute_force_check(g) == set()
        mutated = MUTATIONS[rng.choice(sorted(MUTATIONS))](g, rng)
        assert report_as_set(validate(mutated)) == brute_force_check(mutated)


class _EdgeRestorer:
    """Oracle regenerator: knows exactly which edges were removed."""

    def __init__(self, missing_edges):
        self.missing = list(missing_edges)
        self.calls = 0

    def regenerate(self, graph, report):
        self.calls += 1
        named = report.named_nodes()
        b = graph.builder()
        for e in self.missing:
            if (e.source in named or e.target in named) and not b.has_edge(
                    e.kind, e.source, e.target):
                b.link(e.kind, e.source, e.target, e.path_kind)
        return b.build()


class _Noop:
    def regenerate(self, graph, report):
        return graph


class _Vandal:
    """Touches a node no violation names."""

    def regenerate(self, graph, report):
        named = report.named_nodes()
        victim = next(n for n in graph.nodes
                      if n.id not in named and n.node_kind == "evidence")
        b = graph.builder()
        b.replace_node(replace(victim, content=victim.content + " tampered"))
        return b.build()


def _drop_one_af_edge(graph, rng):
    af = [e for e in graph.edges if e.kind is EdgeKind.ACTION_FACTOR]
    victim = rng.choice(af)
    pruned = CaseGraph(graph.case_id, graph.nodes,
                       tuple(e for e in graph.edges if e != victim))
    return pruned, victim


class TestRepair:
    def test_single_missing_edge_fixed_in_one_round(self, rng):
        g = random_valid_graph(rng)
        pruned, victim = _drop_one_af_edge(g, rng)
        regen = _EdgeRestorer([victim])
        fixed, report = repair(pruned, validate(pruned), regen)
        assert report.passed and regen.calls == 1
        assert fixed == g

    def test_fixed_point_regenerator_diverges(self, rng):
        g = random_valid_graph(rng)
        pruned, _ = _drop_one_af_edge(g, rng)
        with pytest.raises(RepairDiverged) as exc:
            repair(pruned, validate(pruned), _Noop(), max_rounds=3)
        assert exc.value.report is not None and not exc.value.report.passed

    def test_vandal_regenerator_rejected(self, rng):
        g = random_valid_graph(rng)
        pruned, _ = _drop_one_af_edge(g, rng)
        with pytest.raises(RegeneratorFailure):
            repair(pruned, validate(pruned), _Vandal())

    def test_passing_graph_returns_without_calling_regenerator(self):
        g = tiny_graph()
        regen = _Noop()
        fixed, report = repair(g, validate(g), regen)
        assert fixed is g and report.passed

    def test_clean_nodes_bit_identical_across_three_violations(self, rng):
        from eafd.serialize import node_payload
        for _ in range(10):
            g = random_valid_graph(rng, min_factors=3)
            af = [e for e in g.edges if e.kind is EdgeKind.ACTION_FACTOR]
            victims = rng.sample(af, min(3, len(af)))
            pruned = CaseGraph(g.case_id, g.nodes,
                               tuple(e for e in g.edges if e not in victims))
            report = validate(pruned)
            named = report.named_nodes()
            before = {n.id: node_payload(n) for n in pruned.nodes if n.id not in named}
            fixed, final = repair(pruned, report, _EdgeRestorer(victims))
            assert final.passed
            for node_id, payload in before.items():
                assert node_payload(fixed.node(node_id)) == payload

    def test_max_rounds_must_be_positive(self):
        g = tiny_graph()
        with pytest.raises(ValueError):
            repair(g, validate(g), _Noop(), max_rounds=0)
