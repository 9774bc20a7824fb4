"""Evaluation metrics over {approve, reject, rmi} plus the online series.

The macro convention is fixed: macro scores are unweighted means over all
three classes, and a precision/recall whose denominator is empty counts as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .annotations import parse_annotations
from .errors import LabelMismatch
from .graph import ActionOrigin, Lane, Verdict
from .pipeline import Pipeline
from .records import CaseRecord
from .text import normalize_key

FORMAT = "metrics-v1"

CLASSES = (Verdict.APPROVE, Verdict.REJECT, Verdict.RMI)


def _as_verdict(value) -> Verdict:
    try:
        return Verdict(value)
    except ValueError:
        raise LabelMismatch(f"unknown outcome class {value!r}") from None


def confusion_matrix(labels: Sequence, predictions: Sequence) -> dict[tuple[str, str], int]:
    if len(labels) != len(predictions):
        raise LabelMismatch("labels and predictions differ in length")
    matrix = {(t.value, p.value): 0 for t in CLASSES for p in CLASSES}
    for raw_t, raw_p in zip(labels, predictions):
        matrix[(_as_verdict(raw_t).value, _as_verdict(raw_p).value)] += 1
    return matrix


def classification_metrics(labels: Sequence, predictions: Sequence) -> dict:
    matrix = confusion_matrix(labels, predictions)
    total = len(labels)
    per_class = {}
    for cls in (c.value for c in CLASSES):
        tp = matrix[(cls, cls)]
        fp = sum(matrix[(other.value, cls)] for other in CLASSES if other.value != cls)
        fn = sum(matrix[(cls, other.value)] for other in CLASSES if other.value != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
        per_class[cls] = {"precision": precision, "recall": recall, "f1": f1,
                          "support": tp + fn}
    diagonal = sum(matrix[(c.value, c.value)] for c in CLASSES)
    return {
        "accuracy": diagonal / total if total else 0.0,
        "macro_f1": sum(v["f1"] for v in per_class.values()) / len(per_class),
        "macro_recall": sum(v["recall"] for v in per_class.values()) / len(per_class),
        "per_class": per_class,
        "confusion": matrix,
    }


def cumulative_alignment(stream: Iterable[tuple[str, bool]]) -> list[float]:
    """Prefix alignment rate over a timestamp-ordered correctness stream."""
    series = []
    correct = 0
    last = None
    for i, (timestamp, aligned) in enumerate(stream, start=1):
        if last is not None and timestamp < last:
            raise ValueError("cumulative alignment requires nondecreasing timestamps")
        last = timestamp
        correct += bool(aligned)
        series.append(correct / i)
    return series


def action_hit_rate(predicted: Sequence[str], documented: Sequence[str]) -> float:
    """Fraction of predicted action keys matching any documented checker action."""
    if not predicted:
        return 0.0
    documented_keys = {normalize_key(k) for k in documented}
    hits = sum(1 for key in predicted if normalize_key(key) in documented_keys)
    return hits / len(predicted)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_f1: float
    macro_recall: float
    per_class: dict
    confusion: dict
    cumulative_alignment: tuple[float, ...]
    action_hit_rate: dict
    n_cases: int

    def render(self) -> str:
        """Deterministic ``metrics-v1`` text: sorted key, tab, value lines."""
        rows: dict[str, str] = {
            "format": FORMAT,
            "n_cases": str(self.n_cases),
            "accuracy": f"{self.accuracy:.6f}",
            "macro_f1": f"{self.macro_f1:.6f}",
            "macro_recall": f"{self.macro_recall:.6f}",
            "cumulative_alignment.final":
                f"{self.cumulative_alignment[-1]:.6f}" if self.cumulative_alignment else "",
        }
        for cls, stats in self.per_class.items():
            for name, value in stats.items():
                formatted = str(value) if name == "support" else f"{value:.6f}"
                rows[f"per_class.{cls}.{name}"] = formatted
        for (true_cls, pred_cls), count in self.confusion.items():
            rows[f"confusion.{true_cls}.{pred_cls}"] = str(count)
        for bucket, value in self.action_hit_rate.items():
            rows[f"action_hit_rate.{bucket}"] = f"{value:.6f}"
        return "".join(f"{k}\t{rows[k]}\n" for k in sorted(rows))


def documented_checker_keys(record: CaseRecord) -> list[str]:
    if record.checker_record is None:
        return []
    return sorted({normalize_key(s.action_key)
                   for s in parse_annotations(record.checker_record.analysis)})


def predicted_action_keys(graph) -> list[str]:
    return sorted({a.canonical_key for a in graph.actions(Lane.CHECKER)
                   if a.origin is ActionOrigin.HYPOTHESIZED})


def evaluate(pipeline: Pipeline, test_records: list[CaseRecord],
             ground_truth: Mapping[str, Verdict]) -> MetricsReport:
    """Adjudicate every held-out record (as its query view) and score against
    the ground-truth labels.

    Split hygiene is enforced, not assumed: a test case already present in the
    pipeline's knowledge base, or older than anything indexed, is an error.
    """
    ordered = sorted(test_records, key=lambda r: (r.timestamp, r.case_id))
    newest_indexed = pipeline.kb.max_timestamp()
    for record in ordered:
        if record.case_id in pipeline.kb:
            raise LabelMismatch(f"test case {record.case_id!r} is indexed in the KB")
        if newest_indexed is not None and record.timestamp < newest_indexed:
            raise LabelMismatch(
                f"test case {record.case_id!r} predates indexed history "
                f"({record.timestamp} < {newest_indexed})")

    labels, predictions, stream = [], [], []
    hit_values = {"overturn": [], "non_overturn": [], "overall": []}
    for record in ordered:
        try:
            label = _as_verdict(ground_truth[record.case_id])
        except KeyError:
            raise LabelMismatch(f"no ground truth for {record.case_id!r}") from None
        result = pipeline.adjudicate_case(record.as_query())
        predicted = result.outcome.verdict
        labels.append(label)
        predictions.append(predicted)
        stream.append((record.timestamp, predicted is label))

        documented = documented_checker_keys(record)
        if documented:
            rate = action_hit_rate(predicted_action_keys(result.graph), documented)
            bucket = "overturn" if label is Verdict.APPROVE else "non_overturn"
            hit_values[bucket].append(rate)
            hit_values["overall"].append(rate)

    core = classification_metrics(labels, predictions)
    hit_rates = {bucket: (sum(values) / len(values) if values else 0.0)
                 for bucket, values in hit_values.items()}
    return MetricsReport(
        accuracy=core["accuracy"],
        macro_f1=core["macro_f1"],
        macro_recall=core["macro_recall"],
        per_class=core["per_class"],
        confusion=core["confusion"],
        cumulative_alignment=tuple(cumulative_alignment(stream)),
        action_hit_rate=hit_rates,
        n_cases=len(ordered),
    )
