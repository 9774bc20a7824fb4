"""Baselines: retrieval majority vote and the scripted direct-model path."""

from __future__ import annotations

import pytest

from eafd.baselines import (
    ScriptedClient,
    baseline_cbr_majority,
    baseline_model_direct,
)
from eafd.embed import HashEmbedder
from eafd.errors import ClientFailure, EmptyKnowledgeBase, UnparsableReply
from eafd.graph import Verdict
from eafd.kb import KbEntry, KnowledgeBase
from eafd.summarize import TemplateSummarizer
from test_extract import make_record

EMBEDDER = HashEmbedder(64)
SUMMARIZER = TemplateSummarizer()


def _kb_with_verdicts(verdicts):
    kb = KnowledgeBase(64)
    for i, verdict in enumerate(verdicts, start=1):
        record = make_record(
            "ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
            ("ACTION[verify_invoice]{e2} => FACTOR[cleared|support]"
             " ~> CONFLICTS[invoice_suspect|extends]") if verdict == "approve" else
            ("ACTION[recheck_invoice]{e2} => FACTOR[invoice_suspect|contradict]"
             " ~> CONFLICTS[invoice_suspect|verifies]"),
            checker_verdict=verdict, case_id=f"c-{i}")
        from eafd.extract import AnnotationExtractor, extract_graph
        graph = extract_graph(record, AnnotationExtractor())
        summary = SUMMARIZER.summarize(record)
        kb.add(KbEntry(graph, summary, EMBEDDER.embed(summary.rendered + f" {i}"),
                       f"2025-01-{i:02d}T00:00:00Z"))
    return kb


def _query():
    return make_record("ACTION[check_invoice]{e1} => FACTOR[invoice_suspect|contradict]",
                       case_id="c-query")


class TestMajorityVote:
    def test_majority_approve(self):
        kb = _kb_with_verdicts(["approve", "approve", "reject"])
        assert baseline_cbr_majority(_query(), kb, 3) is Verdict.APPROVE

    def test_tie_goes_to_reject(self):
        kb = _kb_with_verdicts(["approve", "reject"])
        assert baseline_cbr_majority(_query(), kb, 2) is Verdict.REJECT

    def test_empty_kb_rejected(self):
        with pytest.raises(EmptyKnowledgeBase):
            baseline_cbr_majority(_query(), KnowledgeBase(64), 3)


class TestModelDirect:
    def test_echoed_verdict(self):
        client = ScriptedClient(["after careful review: REJECT."])
        assert baseline_model_direct(_query(), client) is Verdict.REJECT

    def test_rmi_reply_without_rmi_mode_unparsable(self):
        client = ScriptedClient(["rmi"])
        with pytest.raises(UnparsableReply):
            baseline_model_direct(_query(), client, with_rmi=False)

    def test_rmi_mode_accepts_rmi(self):
        client = ScriptedClient(["rmi"])
        assert baseline_model_direct(_query(), client, with_rmi=True) is Verdict.RMI

    def test_gibberish_unparsable(self):
        with pytest.raises(UnparsableReply):
            baseline_model_direct(_query(), ScriptedClient(["polar bears"]))

    def test_exhausted_client_fails(self):
        client = ScriptedClient([])
        with pytest.raises(ClientFailure):
            baseline_model_direct(_query(), client)

    def test_prompt_axes(self):
        kb = _kb_with_verdicts(["approve", "reject"])
        client = ScriptedClient(["approve", "approve"])
        baseline_model_direct(_query(), client, with_rmi=True, with_retrieval=True, kb=kb)
        baseline_model_direct(_query(), client, with_rmi=False)
        grounded, plain = client.prompts
        assert "Similar resolved cases:" in grounded
        assert "cannot be grounded" in grounded and "rmi" in grounded
        assert "Similar resolved cases:" not in plain
        assert "rmi" not in plain

    def test_retrieval_requires_kb(self):
        with pytest.raises(EmptyKnowledgeBase):
            baseline_model_direct(_query(), ScriptedClient(["approve"]),
                                  with_retrieval=True, kb=None)

    def test_scripted_replay_reproduces_fixed_outcomes(self):
        # record-replay: a canned reply sheet maps to a fixed verdict sequence
        replies = ["approve", "reject", "obviously REJECT", "rmi"]
        client = ScriptedClient(replies)
        got = [baseline_model_direct(_query(), client, with_rmi=True)
               for _ in range(4)]
        assert got == [Verdict.APPROVE, Verdict.REJECT, Verdict.REJECT, Verdict.RMI]


def test_twenty_four_case_replay_reproduces_stored_metrics():
    # Record-replay fixture: 24 labelled queries against a scripted reply
    # sheet. The expected metrics are frozen from an independent hand
    # computation over the planned confusion matrix:
    #   approve: TP=10 FP=1 FN=2 -> F1 = 20/23
    #   reject:  TP=8  FP=2 FN=1 -> F1 = 16/19
    #   rmi:     TP=2  FP=1 FN=1 -> F1 = 2/3
    from eafd.metrics import classification_metrics

    labels = (["approve"] * 12 + ["reject"] * 9 + ["rmi"] * 3)
    replies = (["approve"] * 10 + ["reject"] * 2       # two approvals missed
               + ["reject"] * 8 + ["rmi"]              # one rejection escalated
               + ["rmi"] * 2 + ["approve"])            # one info request skipped
    client = ScriptedClient(replies)
    predictions = [baseline_model_direct(_query(), client, with_rmi=True)
                   for _ in range(24)]
    stats = classification_metrics(labels, [p.value for p in predictions])
    assert stats["accuracy"] == pytest.approx(20 / 24, abs=1e-12)
    assert stats["per_class"]["approve"]["f1"] == pytest.approx(20 / 23, abs=1e-12)
    assert stats["per_class"]["reject"]["f1"] == pytest.approx(16 / 19, abs=1e-12)
    assert stats["per_class"]["rmi"]["f1"] == pytest.approx(2 / 3, abs=1e-12)
    assert stats["macro_f1"] == pytest.approx((20 / 23 + 16 / 19 + 2 / 3) / 3, abs=1e-12)
