"""Corpus generator: determinism, quotas, structural soundness."""

from __future__ import annotations

import pytest

from eafd.annotations import parse_annotations
from eafd.corpus import (
    CONFIRM_CONTENT,
    SUPPORT_CONTENT,
    CorpusSpec,
    chronological_split,
    corpus_templates,
    derive_labels,
    generate_corpus,
)
from eafd.errors import InvalidSpec
from eafd.extract import AnnotationExtractor, extract_graph
from eafd.graph import Verdict
from eafd.kb import build_conflict_edges
from eafd.records import render_case_record
from eafd.reasoner import ground_action, MatchLevel
from eafd.text import key_tokens, tokenize
from eafd.validate import validate


def test_deterministic_given_seed():
    spec = CorpusSpec(n_cases=40, seed=7)
    a = [render_case_record(r) for r in generate_corpus(spec)]
    b = [render_case_record(r) for r in generate_corpus(spec)]
    assert a == b


def test_different_seed_differs():
    a = [r.case_id for r in generate_corpus(CorpusSpec(n_cases=40, seed=1))]
    b = [render_case_record(r) for r in generate_corpus(CorpusSpec(n_cases=40, seed=1))]
    c = [render_case_record(r) for r in generate_corpus(CorpusSpec(n_cases=40, seed=2))]
    assert len(a) == 40 and b != c


def test_quotas_hit_exactly_at_default_spec():
    spec = CorpusSpec(n_cases=200, seed=11)
    records = generate_corpus(spec)
    labels = derive_labels(records)
    overturned = [r for r in records if r.checker_record.verdict is Verdict.APPROVE]
    assert len(overturned) == round(0.70 * 200)

    def checker_action_count(record):
        return len(parse_annotations(record.checker_record.analysis))

    over_counts = [checker_action_count(r) for r in overturned]
    non_counts = [checker_action_count(r) for r in records
                  if r.checker_record.verdict is not Verdict.APPROVE]
    assert abs(sum(over_counts) / len(over_counts) - 4.89) <= 0.10 * 4.89
    assert abs(sum(non_counts) / len(non_counts) - 2.00) <= 0.10 * 2.00
    # withheld-evidence cases are the rmi-labelled share of the overturn bucket
    rmi_cases = [cid for cid, label in labels.items() if label is Verdict.RMI]
    assert len(rmi_cases) == round(0.05 * len(overturned))


def test_overturn_ratio_zero_means_all_reject():
    records = generate_corpus(CorpusSpec(n_cases=20, seed=3, overturn_ratio=0.0))
    assert all(r.checker_record.verdict is Verdict.REJECT for r in records)


def test_timestamps_strictly_increase():
    records = generate_corpus(CorpusSpec(n_cases=30, seed=5))
    stamps = [r.timestamp for r in records]
    assert stamps == sorted(stamps) and len(set(stamps)) == len(stamps)


def test_invalid_specs_rejected():
    with pytest.raises(InvalidSpec):
        CorpusSpec(n_cases=5).check()
    with pytest.raises(InvalidSpec):
        CorpusSpec(n_cases=20, overturn_ratio=1.5).check()
    with pytest.raises(InvalidSpec):
        CorpusSpec(n_cases=20, category_pool=("NOT.A.CATEGORY",)).check()
    with pytest.raises(InvalidSpec):
        generate_corpus(CorpusSpec(n_cases=20, rmi_share=0.5,
                                   category_pool=("POL.RESTRICTED_ITEM",)))


def test_every_record_extracts_to_valid_conflict_complete_graph():
    records = generate_corpus(CorpusSpec(n_cases=60, seed=9))
    extractor = AnnotationExtractor()
    for record in records:
        graph = extract_graph(record, extractor)
        assert validate(graph).passed
        build_conflict_edges(graph)  # raises if an overturn lacks its structure


def test_linkage_control_varies_late_factor_keys():
    spec = CorpusSpec(n_cases=60, seed=13, precedent_linkage=0.0)
    records = generate_corpus(spec)
    tail = records[int(0.8 * 60):]
    variants = [r for r in tail
                if "variant" in parse_annotations(r.maker_record.analysis)[0].factor_key]
    assert len(variants) == len(tail)
    fully_linked = generate_corpus(CorpusSpec(n_cases=60, seed=13, precedent_linkage=1.0))
    assert all("variant" not in parse_annotations(r.maker_record.analysis)[0].factor_key
               for r in fully_linked)


def test_split_is_chronological():
    records = generate_corpus(CorpusSpec(n_cases=50, seed=1))
    train, test = chronological_split(records)
    assert len(train) == 40 and len(test) == 10
    assert max(r.timestamp for r in train) <= min(r.timestamp for r in test)


def test_content_templates_cover_their_action_tokens():
    # grounding contract: each action's evidence text covers its key tokens
    # (entity slots included), so generated queries are resolvable
    templates = corpus_templates()
    for key, content in SUPPORT_CONTENT.items():
        required = set(key_tokens(key))
        template = templates.get(key)
        entity = "Acme Holdings"
        filled = content.replace("{entity}", entity)
        if template and template.slots:
            required |= set(tokenize(entity))
        level, _ = ground_action(frozenset(required), [_node(filled)])
        assert level is MatchLevel.COMPLETE, key
    for key, content in CONFIRM_CONTENT.items():
        level, _ = ground_action(frozenset(key_tokens(key)), [_node(content)])
        assert level is MatchLevel.COMPLETE, key


def _node(content):
    from eafd.graph import EvidenceNode, Lane, SourceType
    return EvidenceNode("e1", Lane.MAKER, content, "s", SourceType.DOCUMENT)
