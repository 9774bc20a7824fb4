"""Extraction: statements to validated graphs, and action refinement."""

from __future__ import annotations

import json

import pytest

from conftest import FIXTURES
from eafd.errors import ExtractionFailed
from eafd.extract import AnnotationExtractor, extract_graph, refine_actions
from eafd.graph import (
    Criticality,
    EdgeKind,
    Lane,
    PathKind,
    Verdict,
    conflict_pairs,
    grounding_chain,
)
from eafd.records import load_case_record, parse_case_record
from eafd.validate import validate

EXTRACTOR = AnnotationExtractor()


def make_record(maker_analysis, checker_analysis=None, checker_verdict="approve",
                evidence_ids=("e1", "e2", "e3", "e4"), case_id="c-x", entities=None):
    obj = {
        "case_id": case_id,
        "violation_category": "PQ.EXPIRED_PRODUCTS",
        "timestamp": "2025-01-06T00:00:00Z",
        "evidence_items": [
            {"id": e, "source_type": "document", "content": f"content {e}",
             "source_ref": f"s:{e}"} for e in evidence_ids
        ],
        "maker_record": {"verdict": "reject", "analysis": maker_analysis},
    }
    if checker_analysis is not None:
        obj["checker_record"] = {"verdict": checker_verdict,
                                 "analysis": checker_analysis}
    if entities:
        obj["entities"] = entities
    return parse_case_record(json.dumps(obj))


class TestExtractGraph:
    def test_two_statements_two_factors_with_links(self):
        record = make_record(
            "ACTION[check_invoice]{e1,e2} => FACTOR[invoice_suspect|contradict]\n"
            "ACTION[review_listing]{e3} => FACTOR[listing_violation|contradict]")
        g = extract_graph(record, EXTRACTOR)
        assert validate(g).passed
        factors = sorted(g.factors(Lane.MAKER), key=lambda f: f.id)
        assert [f.statement for f in factors] == ["invoice_suspect", "listing_violation"]
        chains = grounding_chain(g, factors[0].id)
        assert [e.id for e in chains[0][1]] == ["e1", "e2"]
        assert g.decision(Lane.MAKER).verdict is Verdict.REJECT
        assert g.decision(Lane.CHECKER) is None

    def test_query_record_has_maker_lane_only_and_all_evidence(self):
        record = make_record("ACTION[check_invoice]{e1} => FACTOR[bad_invoice|contradict]")
        g = extract_graph(record, EXTRACTOR)
        assert not g.has_lane(Lane.CHECKER)
        assert {e.id for e in g.evidence()} == {"e1", "e2", "e3", "e4"}

    def test_empty_checker_analysis_fails(self):
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[bad_invoice|contradict]",
            checker_analysis="no annotations here")
        with pytest.raises(ExtractionFailed):
            extract_graph(record, EXTRACTOR)

    def test_unknown_evidence_reference_fails(self):
        record = make_record("ACTION[check_invoice]{e9} => FACTOR[bad|contradict]")
        with pytest.raises(ExtractionFailed):
            extract_graph(record, EXTRACTOR)

    def test_conflict_clause_builds_cross_lane_edge(self):
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
            "ACTION[verify_invoice]{e2} => FACTOR[invoice_cleared|support]"
            " ~> CONFLICTS[invoice_suspect|extends]")
        g = extract_graph(record, EXTRACTOR)
        pairs = conflict_pairs(g)
        assert len(pairs) == 1
        maker, checker, kind = pairs[0]
        assert maker.statement == "invoice_suspect"
        assert checker.statement == "invoice_cleared"
        assert kind is PathKind.EXTENDS

    def test_verifies_clause_attaches_to_maker_factor(self):
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
            "ACTION[recheck_invoice]{e2} => FACTOR[invoice_suspect|contradict]"
            " ~> CONFLICTS[invoice_suspect|verifies]",
            checker_verdict="reject")
        g = extract_graph(record, EXTRACTOR)
        assert conflict_pairs(g) == []
        assert not list(g.factors(Lane.CHECKER))
        maker_factor = next(iter(g.factors(Lane.MAKER)))
        checker_actions = [g.node(e.source)
                           for e in g.in_edges(maker_factor.id, EdgeKind.ACTION_FACTOR)
                           if g.node(e.source).lane is Lane.CHECKER]
        assert len(checker_actions) == 1

    def test_checker_only_evidence_lands_in_checker_lane(self):
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
            "ACTION[verify_invoice]{e1,e2} => FACTOR[cleared|support]"
            " ~> CONFLICTS[invoice_suspect|extends]")
        g = extract_graph(record, EXTRACTOR)
        assert g.node("e1").lane is Lane.MAKER   # shared with the maker
        assert g.node("e2").lane is Lane.CHECKER  # checker-only reference
        assert g.node("e3").lane is Lane.MAKER   # unreferenced: original case file

    def test_deterministic_function_of_record_bytes(self):
        from eafd.serialize import render_graph
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
            "ACTION[verify_invoice]{e2} => FACTOR[cleared|support]"
            " ~> CONFLICTS[invoice_suspect|extends]")
        a = render_graph(extract_graph(record, EXTRACTOR))
        b = render_graph(extract_graph(record, EXTRACTOR))
        assert a == b

    def test_emitted_evidence_subset_of_record(self):
        record = load_case_record(FIXTURES / "d2" / "case-expired-food.json")
        g = extract_graph(record, EXTRACTOR)
        record_ids = record.evidence_ids()
        for a in g.actions():
            for e in g.in_edges(a.id, EdgeKind.EVIDENCE_ACTION):
                assert e.source in record_ids

    def test_fixture_checker_lane_has_three_actions(self):
        record = load_case_record(FIXTURES / "d2" / "case-expired-food.json")
        g = extract_graph(record, EXTRACTOR)
        assert validate(g).passed
        checker_actions = sorted(g.actions(Lane.CHECKER), key=lambda a: a.id)
        assert [a.canonical_key for a in checker_actions] == [
            "review_inventory_records", "verify_warehouse_storage", "contact_supplier"]
        critical = [a for a in checker_actions if a.criticality is Criticality.CRITICAL]
        assert [a.canonical_key for a in critical] == ["contact_supplier"]
        # three grounded verification chains behind the conflicting factor
        checker_factor = next(iter(g.factors(Lane.CHECKER)))
        assert len(grounding_chain(g, checker_factor.id)) == 3


class TestRefineActions:
    def test_same_goal_same_factor_merges(self):
        record = make_record(
            "ACTION[review]{e1} => FACTOR[base|contradict]",
            "ACTION[manual registry check]{e2} => FACTOR[supplier_ok|support]"
            " ~> CONFLICTS[base|extends]\n"
            "ACTION[Checked Supplier Legitimacy]{e3} => FACTOR[supplier_ok|support]\n"
            "ACTION[verify_supplier_legitimacy]{e4} => FACTOR[supplier_ok|support]")
        g = extract_graph(record, EXTRACTOR)
        # the first checker action keys differently from the other two
        (refined,), merge_map = refine_actions([g])
        assert validate(refined).passed
        keys = sorted(a.canonical_key for a in refined.actions(Lane.CHECKER))
        assert keys == ["manual_registry_verify", "verify_supplier_legitimacy"]
        merged_ids = merge_map[g.case_id]
        assert len({v for v in merged_ids.values()}) == 1
        survivor = next(iter(merged_ids.values()))
        evidence = {e.source for e in refined.in_edges(survivor, EdgeKind.EVIDENCE_ACTION)}
        assert evidence == {"e3", "e4"}  # unioned

    def test_same_key_different_factor_not_merged(self):
        record = make_record(
            "ACTION[check_stock]{e1} => FACTOR[stock_low|contradict]\n"
            "ACTION[check_stock]{e2} => FACTOR[warehouse_messy|contradict]")
        g = extract_graph(record, EXTRACTOR)
        (refined,), merge_map = refine_actions([g])
        assert len(list(refined.actions())) == 2
        assert merge_map == {}

    def test_idempotent(self):
        record = make_record(
            "ACTION[review]{e1} => FACTOR[base|contradict]",
            "ACTION[check_supplier]{e2} => FACTOR[ok|support] ~> CONFLICTS[base|extends]\n"
            "ACTION[verify supplier]{e3} => FACTOR[ok|support]")
        g = extract_graph(record, EXTRACTOR)
        (once,), _ = refine_actions([g])
        (twice,), second_map = refine_actions([once])
        assert once == twice and second_map == {}

    def test_factors_and_decisions_untouched(self):
        record = make_record(
            "ACTION[review]{e1} => FACTOR[base|contradict]",
            "ACTION[check_supplier]{e2} => FACTOR[ok|support] ~> CONFLICTS[base|extends]\n"
            "ACTION[verify supplier]{e3} => FACTOR[ok|support]")
        g = extract_graph(record, EXTRACTOR)
        (refined,), _ = refine_actions([g])
        assert set(f for f in g.factors()) == set(f for f in refined.factors())
        assert g.decision(Lane.MAKER) == refined.decision(Lane.MAKER)
        assert g.decision(Lane.CHECKER) == refined.decision(Lane.CHECKER)


def test_fixture_grounding_chains_match_annotations():
    # frozen from the fixture's annotated statements: every chain is exactly
    # the statement's action with its declared evidence set
    record = load_case_record(FIXTURES / "d2" / "case-expired-food.json")
    g = extract_graph(record, EXTRACTOR)
    maker_factor = next(iter(g.factors(Lane.MAKER)))
    maker_chains = [(a.canonical_key, [e.id for e in ev])
                    for a, ev in grounding_chain(g, maker_factor.id)]
    assert maker_chains == [("review_complaint", ["e01", "e02"])]
    checker_factor = next(iter(g.factors(Lane.CHECKER)))
    checker_chains = [(a.canonical_key, [e.id for e in ev])
                      for a, ev in grounding_chain(g, checker_factor.id)]
    assert checker_chains == [
        ("review_inventory_records", ["e05", "e08", "e12"]),
        ("verify_warehouse_storage", ["e06"]),
        ("contact_supplier", ["e07", "e13"]),
    ]
