"""Shared fixtures: synthetic corpora and manifest/file scaffolding."""

from __future__ import annotations

import json

import pytest

from ndv.corpus import Article

# Lowercase-only filler vocabulary (never masked by the stub tagger) plus
# capitalized name fragments that are.
_FILLER = [
    "the", "a", "crowd", "gathered", "near", "harbor", "after", "storm",
    "officials", "said", "prices", "rose", "sharply", "during", "winter",
    "farmers", "reported", "heavy", "losses", "while", "council", "debated",
    "new", "rules", "for", "street", "markets", "and", "local", "mills",
]
_NAMES = ["John Smith", "Mary Ford", "James Holt", "Eleanor Swift"]
_PLACES = ["Paris", "Boston", "Chicago", "Berlin"]


def make_article(i: int, rng, source: str = "daily-courier", year: int = 1910) -> Article:
    """Deterministic synthetic article: unique filler word guarantees that no
    two articles mask to the same text."""
    words = [_FILLER[rng.integers(len(_FILLER))] for _ in range(rng.integers(12, 25))]
    words.insert(int(rng.integers(1, len(words))), f"storyword{i}")
    text = " ".join(words)
    name = _NAMES[int(rng.integers(len(_NAMES)))]
    place = _PLACES[int(rng.integers(len(_PLACES)))]
    text = f"{text}. {name} spoke near {place} yesterday."
    month = int(rng.integers(1, 13))
    day = int(rng.integers(1, 28))
    return Article(
        id=f"art-{i:04d}",
        source=source,
        date=f"{year:04d}-{month:02d}-{day:02d}",
        text=text,
        headline=f"Dispatch {i}",
    )


@pytest.fixture
def article_factory():
    return make_article


@pytest.fixture
def toy_corpus():
    import numpy as np

    rng = np.random.default_rng(1234)
    return [make_article(i, rng) for i in range(20)]


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


@pytest.fixture
def corpus_tree(tmp_path):
    """Manifest + three year files (1899/1900/1901, Alabama and Georgia)."""
    rows_by_file = {
        "al_1899.jsonl": [
            {"id": "al99-1", "source": "gazette", "date": "1899-03-01", "text": "old news one"},
            {"id": "al99-2", "source": "gazette", "date": "1899-04-02", "text": "old news two"},
        ],
        "al_1900.jsonl": [
            {"id": "al00-1", "source": "gazette", "date": "1900-01-05", "text": "turn of century"},
            {"id": "al00-2", "source": "courier", "date": "1900-06-11", "text": "summer report"},
            {"id": "al00-3", "source": "courier", "date": "1900-09-23", "text": "harvest notes"},
        ],
        "al_1901.jsonl": [
            {"id": "al01-1", "source": "gazette", "date": "1901-02-14", "text": "new year story"},
        ],
        "ga_1900.jsonl": [
            {"id": "ga00-1", "source": "constitution", "date": "1900-07-04", "text": "georgia news"},
        ],
    }
    for name, rows in rows_by_file.items():
        write_jsonl(tmp_path / name, rows)
    manifest = {
        "schema_version": 1,
        "dataset_name": "american stories",
        "files": [
            {"path": "al_1899.jsonl", "state": "Alabama", "year": 1899},
            {"path": "al_1900.jsonl", "state": "Alabama", "year": 1900},
            {"path": "al_1901.jsonl", "state": "Alabama", "year": 1901},
            {"path": "ga_1900.jsonl", "state": "Georgia", "year": 1900},
        ],
    }
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps(manifest), encoding="utf-8")
    return tmp_path, mpath, rows_by_file
