"""Unified command-line entry point.

The knowledge-base directory defaults to ``$EAFD_KB_DIR`` wherever a command
takes ``--kb``.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .baselines import ScriptedClient, baseline_cbr_majority, baseline_model_direct
from .corpus import (
    CorpusSpec,
    chronological_split,
    corpus_templates,
    derive_labels,
    generate_corpus,
)
from .embed import HashEmbedder
from .errors import DuplicateCaseId
from .extract import AnnotationExtractor, extract_graph, refine_actions
from .kb import KbEntry, KnowledgeBase, build_conflict_edges
from .metrics import classification_metrics, evaluate
from .pipeline import Pipeline
from .records import dump_case_record, load_case_record
from .report import write_report
from .serialize import load_graph
from .summarize import TemplateSummarizer
from .templates import DEFAULT_TEMPLATES, TemplateRegistry
from .validate import validate

_kb_option = click.option("--kb", "kb_dir", envvar="EAFD_KB_DIR", required=True,
                          type=click.Path(), help="Knowledge base directory "
                          "(defaults to $EAFD_KB_DIR).")


def friendly_errors(fn):
    """Surface package errors as clean command failures, not tracebacks."""
    import functools

    from .errors import EafdError

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EafdError as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper
_templates_option = click.option("--templates", "templates_path", type=click.Path(exists=True),
                                 default=None, help="Action template registry JSON; "
                                 "defaults to the built-in vocabulary.")


def _load_templates(path) -> TemplateRegistry:
    return TemplateRegistry.load(path) if path else DEFAULT_TEMPLATES


def _record_files(directory) -> list[Path]:
    files = sorted(p for p in Path(directory).iterdir()
                   if p.is_file() and p.suffix == ".json")
    if not files:
        raise click.ClickException(f"no .json case records under {directory}")
    return files


def _open_or_create(kb_dir, dimension) -> KnowledgeBase:
    kb_dir = Path(kb_dir)
    if (kb_dir / "manifest").exists():
        return KnowledgeBase.open(kb_dir)
    return KnowledgeBase.create(kb_dir, dimension)


def _ingest_directory(kb_dir, record_dir, dimension) -> tuple[int, int]:
    kb = _open_or_create(kb_dir, dimension)
    extractor = AnnotationExtractor()
    summarizer = TemplateSummarizer()
    embedder = HashEmbedder(kb.dimension)
    added = skipped = 0
    for path in _record_files(record_dir):
        record = load_case_record(path)
        if record.is_query:
            raise click.ClickException(
                f"{path.name}: query record (no checker record); the knowledge "
                "base only ingests resolved history")
        graph = extract_graph(record, extractor)
        (graph,), _ = refine_actions([graph])
        graph = build_conflict_edges(graph)
        summary = summarizer.summarize(record)
        try:
            kb.add(KbEntry(graph, summary, embedder.embed(summary.rendered),
                           record.timestamp))
            added += 1
        except DuplicateCaseId:
            skipped += 1
    return added, skipped


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """Case-graph adjudication toolkit: validate graphs, build the knowledge
    base, generate synthetic corpora, evaluate, and serve the review API."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@main.command()
@click.argument("graph_file", type=click.Path(exists=True))
@click.option("--format", "out_format", type=click.Choice(["text", "report-v1"]),
              default="text", show_default=True)
@friendly_errors
def validate_cmd(graph_file, out_format):
    """Check a serialized graph; exits nonzero when violations are found."""
    report = validate(load_graph(graph_file))
    if out_format == "report-v1":
        click.echo(report.render(), nl=False)
    else:
        if report.passed:
            click.echo(f"{graph_file}: ok")
        for v in report.violations:
            click.echo(f"{v.kind.value}\t{','.join(v.location)}\t{v.message}")
        for note in report.notes:
            click.echo(f"note\t{note}")
    if not report.passed:
        sys.exit(1)


main.add_command(validate_cmd, name="validate")


@main.command()
@click.argument("record_dir", type=click.Path(exists=True, file_okay=False))
@_kb_option
@click.option("--dimension", default=512, show_default=True)
@friendly_errors
def ingest(record_dir, kb_dir, dimension):
    """Extract, refine, and index every historical record in a directory."""
    added, skipped = _ingest_directory(kb_dir, record_dir, dimension)
    click.echo(f"indexed {added} cases into {kb_dir}"
               + (f" ({skipped} already present)" if skipped else ""))


@main.command()
@click.option("--spec", "spec_file", type=click.Path(exists=True), required=True,
              help="Corpus spec JSON (n_cases, seed, overturn_ratio, ...).")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--split", type=float, default=None,
              help="Also write train/ and test/ subdirectories at this fraction.")
@friendly_errors
def generate(spec_file, out_dir, split):
    """Generate a seeded synthetic corpus of case records."""
    raw = json.loads(Path(spec_file).read_text(encoding="utf-8"))
    if "category_pool" in raw:
        raw["category_pool"] = tuple(raw["category_pool"])
    spec = CorpusSpec(**raw)
    records = generate_corpus(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for record in records:
        dump_case_record(record, out / f"{record.case_id}.json")
    corpus_templates().dump(out / "templates.json")
    if split is not None:
        train, test = chronological_split(records, split)
        for name, part in (("train", train), ("test", test)):
            sub = out / name
            sub.mkdir(exist_ok=True)
            for record in part:
                dump_case_record(record, sub / f"{record.case_id}.json")
        click.echo(f"wrote {len(records)} records to {out} "
                   f"({len(train)} train / {len(test)} test)")
    else:
        click.echo(f"wrote {len(records)} records to {out}")


@main.command()
@_kb_option
@click.option("--test", "test_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--report", "report_dir", type=click.Path(), required=True)
@_templates_option
@friendly_errors
def evaluate_cmd(kb_dir, test_dir, report_dir, templates_path):
    """Adjudicate a held-out directory and write the metrics report."""
    kb = KnowledgeBase.open(kb_dir)
    records = [load_case_record(p) for p in _record_files(test_dir)]
    labels = derive_labels(records)
    pipeline = Pipeline(kb, templates=_load_templates(templates_path))
    report = evaluate(pipeline, records, labels)
    paths = write_report(report, report_dir)
    click.echo(f"accuracy {report.accuracy:.3f}  macro_f1 {report.macro_f1:.3f}  "
               f"macro_recall {report.macro_recall:.3f}  ({report.n_cases} cases)")
    click.echo("wrote " + ", ".join(str(p) for p in paths))


main.add_command(evaluate_cmd, name="evaluate")


@main.command()
@click.option("--name", type=click.Choice(["cbr", "direct"]), required=True)
@_kb_option
@click.option("--test", "test_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--k", default=20, show_default=True)
@click.option("--with-rmi/--no-rmi", default=False, show_default=True)
@click.option("--with-retrieval/--no-retrieval", default=False, show_default=True)
@click.option("--replies", "replies_file", type=click.Path(exists=True), default=None,
              help="Reply script for the direct baseline (one per line).")
@click.option("--report", "report_file", type=click.Path(), default=None)
@friendly_errors
def baseline(name, kb_dir, test_dir, k, with_rmi, with_retrieval, replies_file,
             report_file):
    """Run a comparison baseline over a held-out directory."""
    kb = KnowledgeBase.open(kb_dir)
    records = [load_case_record(p) for p in _record_files(test_dir)]
    labels = derive_labels(records)
    ordered = sorted(records, key=lambda r: (r.timestamp, r.case_id))
    if name == "cbr":
        predictions = [baseline_cbr_majority(r.as_query(), kb, k) for r in ordered]
    else:
        if not replies_file:
            raise click.ClickException("--name direct requires --replies")
        replies = Path(replies_file).read_text(encoding="utf-8").splitlines()
        client = ScriptedClient([r for r in replies if r.strip()])
        predictions = [baseline_model_direct(r.as_query(), client, with_rmi,
                                             with_retrieval, kb, k)
                       for r in ordered]
    truth = [labels[r.case_id] for r in ordered]
    stats = classification_metrics(truth, predictions)
    click.echo(f"{name}: accuracy {stats['accuracy']:.3f}  "
               f"macro_f1 {stats['macro_f1']:.3f}  ({len(ordered)} cases)")
    if report_file:
        payload = {"baseline": name, "k": k, "with_rmi": with_rmi,
                   "with_retrieval": with_retrieval,
                   "accuracy": stats["accuracy"], "macro_f1": stats["macro_f1"],
                   "macro_recall": stats["macro_recall"],
                   "predictions": {r.case_id: p.value
                                   for r, p in zip(ordered, predictions)}}
        Path(report_file).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                                     encoding="utf-8")
        click.echo(f"wrote {report_file}")


@main.group()
def kb():
    """Knowledge-base maintenance."""


@kb.command("ingest")
@click.argument("record_dir", type=click.Path(exists=True, file_okay=False))
@_kb_option
@click.option("--dimension", default=512, show_default=True)
@friendly_errors
def kb_ingest(record_dir, kb_dir, dimension):
    """Same as the top-level ingest command."""
    added, skipped = _ingest_directory(kb_dir, record_dir, dimension)
    click.echo(f"indexed {added} cases into {kb_dir}"
               + (f" ({skipped} already present)" if skipped else ""))


@kb.command("stats")
@_kb_option
@friendly_errors
def kb_stats(kb_dir):
    """Print store statistics."""
    stats = KnowledgeBase.open(kb_dir).stats()
    for key in sorted(stats):
        click.echo(f"{key}\t{stats[key]}")


@kb.command("query")
@_kb_option
@click.option("--text", "query_text", default=None, help="Free-text query.")
@click.option("--case", "case_id", default=None, help="Query by an indexed case's vector.")
@click.option("-k", "top_k", default=5, show_default=True)
@friendly_errors
def kb_query(kb_dir, query_text, case_id, top_k):
    """Rank indexed cases against a text or an existing case."""
    if bool(query_text) == bool(case_id):
        raise click.ClickException("pass exactly one of --text or --case")
    store = KnowledgeBase.open(kb_dir)
    vector = (store.entry(case_id).vector if case_id
              else HashEmbedder(store.dimension).embed(query_text))
    for scored in store.retrieve(vector, top_k):
        entry = scored.entry
        click.echo(f"{scored.similarity:.6f}\t{entry.case_id}\t"
                   f"{entry.summary.violation_category}\t{entry.timestamp}")


@main.command()
@_kb_option
@click.option("--listen", default="127.0.0.1:8085", show_default=True,
              help="host:port to bind.")
@click.option("--console", "console_dir", type=click.Path(), default=None,
              help="Directory of built reviewer-console assets to serve at /console/.")
@_templates_option
@friendly_errors
def serve(kb_dir, listen, console_dir, templates_path):
    """Run the adjudication service until interrupted."""
    from .service import serve_forever
    try:
        serve_forever(kb_dir, listen, console_dir, _load_templates(templates_path))
    except KeyboardInterrupt:
        click.echo("shutting down")


if __name__ == "__main__":
    main()
