"""
Corpus ingestion: manifests, spec strings, and filtered streaming
=================================================================

A corpus is a set of JSONL files (one article object per line) described by
a small JSON manifest that records each file's state and year. Subsets are
selected with a spec string `dataset[:year-or-range[:state,...]]`, and the
selection never opens files whose metadata rules them out.
"""

import json
import tempfile
from pathlib import Path

from ndv import (
    StreamReport,
    load_manifest,
    parse_corpus_spec,
    stream_articles,
    validate_article,
)

# Build a tiny corpus on disk: two states, three years.
workdir = Path(tempfile.mkdtemp(prefix="ndv-demo-"))
files = {
    "alabama_1900.jsonl": ("Alabama", 1900, [
        {"id": "al-1", "source": "gazette", "date": "1900-02-03",
         "text": "The harbor reopened after the winter storm."},
        {"id": "al-2", "source": "courier", "date": "1900-07-19",
         "text": "Farmers reported record cotton prices."},
    ]),
    "alabama_1901.jsonl": ("Alabama", 1901, [
        {"id": "al-3", "source": "gazette", "date": "1901-01-12",
         "text": "A new rail line reached the county seat."},
    ]),
    "georgia_1900.jsonl": ("Georgia", 1900, [
        {"id": "ga-1", "source": "constitution", "date": "1900-05-30",
         "text": "The exposition drew large crowds downtown."},
    ]),
}
manifest = {"schema_version": 1, "dataset_name": "american stories", "files": []}
for name, (state, year, rows) in files.items():
    with open(workdir / name, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    manifest["files"].append({"path": name, "state": state, "year": year})
(workdir / "manifest.json").write_text(json.dumps(manifest))

# Spec strings: omitted fields mean "everything".
for raw in ["american stories:1900:Alabama", "american stories:1900-1901",
            "american stories"]:
    spec = parse_corpus_spec(raw)
    print(f"{raw!r}\n  -> dataset={spec.dataset!r} years={spec.years} "
          f"states={spec.states}")

# Stream the 1900 Alabama subset. The report counts skipped rows.
mf = load_manifest(workdir / "manifest.json")
report = StreamReport()
spec = parse_corpus_spec("american stories:1900:Alabama")
print("\narticles matching", spec)
for article in stream_articles(mf, spec, base_dir=workdir, report=report):
    print(f"  {article.id}  {article.date}  {article.text[:40]}...")
print(f"(files read: {report.files_read}, rows skipped: {report.skipped})")

# Validation is strict about the row contract.
print("\nvalidation:")
good = validate_article({"id": "x", "source": "s", "date": "1900-01-01", "text": "ok"})
print("  good row ->", good.id)
for bad in [{"id": "x", "source": "s", "date": "1900-13-01", "text": "t"},
            {"id": "x", "source": "s", "date": "1900-01-01", "text": ""}]:
    try:
        validate_article(bad)
    except Exception as err:
        print(f"  bad row  -> {type(err).__name__}: {err}")
