"""Corpus ingestion: manifests, article validation, and filtered streaming.

A corpus is a set of JSONL files described by a small JSON manifest. Each
manifest entry carries the file's state and year, so subsetting by
``dataset:years:states`` spec strings never has to open files it will skip.
Corpus rows are ``{id, source, date, text, headline?}``; unknown keys are
ignored for forward compatibility.
"""

from __future__ import annotations

import json
import re
import tempfile
from dataclasses import dataclass, field
from datetime import date as _date
from pathlib import Path
from typing import Iterator, Optional

from .errors import (
    BadDate,
    CorruptFileError,
    EmptyText,
    IoError,
    ManifestError,
    ManifestVersionError,
    MissingField,
    SpecParseError,
    ValidationError,
)

SCHEMA_VERSION = 1

_ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_YEAR_RE = re.compile(r"^\d{1,4}$")
_YEAR_RANGE_RE = re.compile(r"^(\d{1,4})-(\d{1,4})$")


@dataclass(frozen=True)
class Article:
    """One news text, used both as a corpus row and as a query."""

    id: str
    source: str
    date: str  # ISO-8601 calendar date, validated at ingestion
    text: str
    headline: Optional[str] = None

    def year(self) -> int:
        return int(self.date[:4])


@dataclass(frozen=True)
class ManifestFile:
    path: str
    state: str
    year: int


@dataclass(frozen=True)
class DatasetManifest:
    dataset_name: str
    files: list[ManifestFile]
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True)
class CorpusSpec:
    """Parsed subset selector. ``None`` for years/states means "all"."""

    dataset: str
    years: Optional[frozenset[int]] = None
    states: Optional[frozenset[str]] = None

    def matches(self, entry: ManifestFile) -> bool:
        if self.years is not None and entry.year not in self.years:
            return False
        if self.states is not None and entry.state not in self.states:
            return False
        return True


@dataclass
class StreamReport:
    """Mutable counters filled in while :func:`stream_articles` runs."""

    yielded: int = 0
    skipped: int = 0
    files_read: int = 0
    skipped_by_file: dict[str, int] = field(default_factory=dict)


def parse_corpus_spec(spec: str) -> CorpusSpec:
    """Parse a ``dataset[:year-or-range[:state[,state...]]]`` selector.

    Year ranges ``A-B`` are inclusive. Omitted or empty fields select
    everything. Examples::

        parse_corpus_spec("american stories:1900:Alabama")
        parse_corpus_spec("american stories:1870-1880")
        parse_corpus_spec("american stories")

    Raises SpecParseError for an empty dataset, malformed year tokens,
    empty state tokens, or trailing fields.
    """
    if not spec or not spec.strip():
        raise SpecParseError("empty corpus spec")
    parts = spec.split(":")
    if len(parts) > 3:
        raise SpecParseError(f"too many ':'-separated fields in {spec!r}")

    dataset = parts[0].strip()
    if not dataset:
        raise SpecParseError(f"empty dataset name in {spec!r}")

    years: Optional[frozenset[int]] = None
    if len(parts) >= 2 and parts[1].strip():
        years = frozenset(_parse_year_token(parts[1].strip()))

    states: Optional[frozenset[str]] = None
    if len(parts) == 3 and parts[2].strip():
        toks = [s.strip() for s in parts[2].split(",")]
        if any(not s for s in toks):
            raise SpecParseError(f"empty state name in {spec!r}")
        states = frozenset(toks)

    return CorpusSpec(dataset=dataset, years=years, states=states)


def _parse_year_token(token: str) -> set[int]:
    m = _YEAR_RANGE_RE.match(token)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise SpecParseError(f"descending year range {token!r}")
        return set(range(lo, hi + 1))
    if _YEAR_RE.match(token):
        return {int(token)}
    raise SpecParseError(f"malformed year token {token!r}")


def load_manifest(path) -> DatasetManifest:
    """Load and validate a dataset manifest JSON file.

    File order is preserved; it defines streaming order downstream.
    """
    p = Path(path)
    try:
        raw_text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read manifest {p}: {e}") from e
    try:
        raw = json.loads(raw_text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest {p} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ManifestError(f"manifest {p} must be a JSON object")

    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ManifestVersionError(
            f"manifest {p} has schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    for key in ("dataset_name", "files"):
        if key not in raw:
            raise ManifestError(f"manifest {p} missing required key {key!r}")
    if not isinstance(raw["files"], list):
        raise ManifestError(f"manifest {p} 'files' must be a list")

    files: list[ManifestFile] = []
    seen_paths: set[str] = set()
    for i, entry in enumerate(raw["files"]):
        if not isinstance(entry, dict):
            raise ManifestError(f"manifest {p} files[{i}] is not an object")
        for key in ("path", "state", "year"):
            if key not in entry:
                raise ManifestError(f"manifest {p} files[{i}] missing {key!r}")
        fpath = str(entry["path"])
        if fpath in seen_paths:
            raise ManifestError(f"manifest {p} lists path {fpath!r} twice")
        seen_paths.add(fpath)
        try:
            year = int(entry["year"])
        except (TypeError, ValueError):
            raise ManifestError(f"manifest {p} files[{i}] year is not an integer")
        if not 1500 <= year <= 2100:
            raise ManifestError(f"manifest {p} files[{i}] year {year} out of range")
        files.append(ManifestFile(path=fpath, state=str(entry["state"]), year=year))

    return DatasetManifest(
        dataset_name=str(raw["dataset_name"]), files=files, schema_version=version
    )


def validate_article(raw) -> Article:
    """Turn one parsed JSONL record into a validated Article.

    Unknown keys are ignored. Raises MissingField, BadDate, or EmptyText.
    """
    if not isinstance(raw, dict):
        raise MissingField("corpus row is not a JSON object")
    for key in ("id", "source", "date", "text"):
        if key not in raw or raw[key] is None:
            raise MissingField(f"corpus row missing required field {key!r}")

    art_id = raw["id"]
    if isinstance(art_id, int):
        art_id = str(art_id)
    if not isinstance(art_id, str) or not art_id:
        raise MissingField("corpus row 'id' must be a nonempty string")

    text = raw["text"]
    if not isinstance(text, str):
        raise MissingField("corpus row 'text' must be a string")
    if not text:
        raise EmptyText(f"article {art_id!r} has empty text")

    date = raw["date"]
    if not isinstance(date, str) or not _ISO_DATE_RE.match(date):
        raise BadDate(f"article {art_id!r} date {date!r} is not ISO-8601 (YYYY-MM-DD)")
    try:
        _date.fromisoformat(date)
    except ValueError as e:
        raise BadDate(f"article {art_id!r} date {date!r}: {e}") from e

    headline = raw.get("headline")
    if headline is not None:
        headline = str(headline)

    return Article(
        id=art_id,
        source=str(raw["source"]),
        date=date,
        text=text,
        headline=headline,
    )


def serialize_article(article: Article) -> dict:
    """Inverse of validate_article on valid articles (round-trip identity)."""
    row = {
        "id": article.id,
        "source": article.source,
        "date": article.date,
        "text": article.text,
    }
    if article.headline is not None:
        row["headline"] = article.headline
    return row


def stream_articles(
    manifest: DatasetManifest,
    spec: CorpusSpec,
    base_dir=None,
    report: Optional[StreamReport] = None,
) -> Iterator[Article]:
    """Yield valid articles from every manifest file matching the spec.

    Files are visited in manifest order and rows in line order, so two passes
    over the same inputs yield identical sequences. Invalid rows (bad JSON,
    failed validation, duplicate ids) are skipped and counted in ``report``;
    a file where more than half the lines are invalid raises
    CorruptFileError after it has been read. Relative manifest paths resolve
    against ``base_dir``.
    """
    if report is None:
        report = StreamReport()
    base = Path(base_dir) if base_dir is not None else Path(".")
    seen_ids: set[str] = set()

    for entry in manifest.files:
        if not spec.matches(entry):
            continue
        path = _materialize(entry.path, base)
        try:
            fh = open(path, "r", encoding="utf-8")
        except OSError as e:
            raise IoError(f"cannot read corpus file {path}: {e}") from e

        lines_total = 0
        lines_bad = 0
        with fh:
            report.files_read += 1
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                lines_total += 1
                try:
                    art = validate_article(json.loads(line))
                except (json.JSONDecodeError, MissingField, BadDate, EmptyText):
                    lines_bad += 1
                    continue
                if art.id in seen_ids:
                    lines_bad += 1
                    continue
                seen_ids.add(art.id)
                report.yielded += 1
                yield art

        if lines_bad:
            report.skipped += lines_bad
            report.skipped_by_file[entry.path] = lines_bad
        if lines_total > 0 and lines_bad * 2 > lines_total:
            raise CorruptFileError(
                f"{entry.path}: {lines_bad}/{lines_total} lines invalid"
            )


def _materialize(path: str, base: Path) -> Path:
    """Resolve a manifest path; remote mirror URLs are fetched to a temp file."""
    if path.startswith(("http://", "https://")):
        import requests

        try:
            resp = requests.get(path, timeout=60)
            resp.raise_for_status()
        except Exception as e:
            raise IoError(f"cannot fetch corpus file {path}: {e}") from e
        tmp = tempfile.NamedTemporaryFile(
            mode="wb", suffix=".jsonl", delete=False
        )
        with tmp:
            tmp.write(resp.content)
        return Path(tmp.name)
    p = Path(path)
    return p if p.is_absolute() else base / p


def read_articles_jsonl(path) -> list[Article]:
    """Load a plain JSONL article file, validating every row (strict)."""
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"cannot read {p}: {e}") from e
    articles = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            articles.append(validate_article(json.loads(line)))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{p} line {line_no}: invalid JSON ({e})") from e
    return articles


def download(
    spec: str | CorpusSpec,
    manifest,
    out=None,
    report: Optional[StreamReport] = None,
) -> list[Article]:
    """Materialize the subset a spec string selects from a manifest.

    Returns the articles in order; when ``out`` is a directory, also writes
    them to ``<out>/corpus.jsonl``.
    """
    parsed = parse_corpus_spec(spec) if isinstance(spec, str) else spec
    mpath = Path(manifest)
    mf = load_manifest(mpath)
    articles = list(
        stream_articles(mf, parsed, base_dir=mpath.parent, report=report)
    )
    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "corpus.jsonl", "w", encoding="utf-8") as fh:
            for art in articles:
                fh.write(json.dumps(serialize_article(art), ensure_ascii=False))
                fh.write("\n")
    return articles
