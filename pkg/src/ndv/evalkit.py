"""Evaluation arithmetic and training-data construction procedures.

Covers the scoring used around the retriever: P/R/F1 arithmetic, pairwise
same-story classification over embedding similarity, positive-pair assembly
from story groups, hard-negative mining against a pool, split bookkeeping,
and the topic-match annotation workflow (sheet export and rate).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import Article
from .embed import EmbeddingStore
from .errors import (
    DimMismatchError,
    DomainError,
    EmptyAnnotationError,
    NoNegativeAvailable,
    ShapeError,
)
from .nermask import PRF


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0.

    Inputs may be fractions in [0, 1] or percentages (detected when either
    value exceeds 1); the result comes back in the same scale.
    """
    if precision < 0 or recall < 0:
        raise DomainError("precision/recall must be non-negative")
    if precision > 100 or recall > 100:
        raise DomainError("precision/recall cannot exceed 100")
    percent = precision > 1 or recall > 1
    p, r = (precision / 100, recall / 100) if percent else (precision, recall)
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return f1 * 100 if percent else f1


def pairwise_classify(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]], threshold: float
) -> list[bool]:
    """Label each (unit vector, unit vector) pair positive iff cosine >= threshold."""
    labels = []
    for a, b in pairs:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise DimMismatchError(f"pair dims differ: {a.shape} vs {b.shape}")
        labels.append(bool(float(np.dot(a, b)) >= threshold))
    return labels


def pairwise_prf(predicted: Sequence[bool], gold: Sequence[bool]) -> PRF:
    """P/R/F1 of the positive class over parallel label lists."""
    if len(predicted) != len(gold):
        raise ShapeError(f"{len(predicted)} predictions for {len(gold)} gold labels")
    tp = sum(1 for p, g in zip(predicted, gold) if p and g)
    n_pred = sum(bool(p) for p in predicted)
    n_gold = sum(bool(g) for g in gold)
    return PRF.from_counts(tp, n_pred=n_pred, n_gold=n_gold)


def best_threshold(cosines: Sequence[float], gold: Sequence[bool]) -> float:
    """Pick the classification threshold that maximizes F1 on a labeled split.

    Candidates are the observed similarities; among equal-F1 candidates the
    highest threshold wins (the most conservative classifier).
    """
    if len(cosines) != len(gold):
        raise ShapeError(f"{len(cosines)} scores for {len(gold)} gold labels")
    if not cosines:
        raise ShapeError("cannot tune a threshold on an empty split")
    best_t, best_f1 = None, -1.0
    for t in sorted(set(float(c) for c in cosines), reverse=True):
        pred = [c >= t for c in cosines]
        f1 = pairwise_prf(pred, list(gold)).f1
        if f1 > best_f1:
            best_t, best_f1 = t, f1
    return best_t


# --- pair construction --------------------------------------------------------


@dataclass(frozen=True)
class PairExample:
    """A labeled article pair; (a_id, b_id) is unordered."""

    a_id: str
    b_id: str
    label: str  # "positive" | "negative"
    split: str  # "train" | "val" | "test"

    def __post_init__(self):
        if self.a_id == self.b_id:
            raise ValueError(f"pair of an article with itself: {self.a_id!r}")


@dataclass(frozen=True)
class StoryGroup:
    """Articles covering one story, as collated by a news aggregator."""

    story_id: str
    member_ids: tuple[str, ...]
    sources: tuple[str, ...] = ()
    topic_page_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ArticleMeta:
    """Mining metadata: where an article came from and which pages list it."""

    source: str
    story_ids: frozenset[str] = frozenset()
    topic_page_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class TopicAnnotation:
    """A human judgment on one modern/historical pair."""

    modern_id: str
    historical_id: str
    on_topic: bool
    topic_name: str = ""


def assemble_positive_pairs(
    groups: Sequence[StoryGroup], split: str = "train"
) -> list[PairExample]:
    """All unordered within-group member pairs, deduplicated across groups."""
    seen: set[frozenset[str]] = set()
    pairs: list[PairExample] = []
    for group in groups:
        members = group.member_ids
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if members[i] == members[j]:
                    continue
                key = frozenset((members[i], members[j]))
                if key in seen:
                    continue
                seen.add(key)
                pairs.append(
                    PairExample(members[i], members[j], label="positive", split=split)
                )
    return pairs


def mine_hard_negative(
    anchor_id: str,
    pool: EmbeddingStore,
    meta: Mapping[str, ArticleMeta],
) -> str:
    """Closest pool article that cannot be about the anchor's story.

    Legal candidates share no story page and no topic page with the anchor.
    Preference goes to candidates from the anchor's own news source (the
    hardest negatives); when no same-source candidate exists the constraint
    relaxes and the best cross-source candidate is returned. Cosine ties
    break toward the earlier pool row.
    """
    if anchor_id not in meta:
        raise ValueError(f"no metadata for anchor {anchor_id!r}")
    try:
        anchor_row = pool.ids.index(anchor_id)
    except ValueError:
        raise ValueError(f"anchor {anchor_id!r} not embedded in the pool") from None
    anchor_meta = meta[anchor_id]

    scores = pool.matrix.astype(np.float64) @ pool.matrix[anchor_row].astype(np.float64)
    best_same: Optional[tuple[float, int]] = None
    best_cross: Optional[tuple[float, int]] = None
    for row, candidate_id in enumerate(pool.ids):
        if candidate_id == anchor_id:
            continue
        if candidate_id not in meta:
            raise ValueError(f"no metadata for pool member {candidate_id!r}")
        m = meta[candidate_id]
        if m.story_ids & anchor_meta.story_ids:
            continue
        if m.topic_page_ids & anchor_meta.topic_page_ids:
            continue
        entry = (float(scores[row]), row)
        if m.source == anchor_meta.source:
            if best_same is None or entry[0] > best_same[0]:
                best_same = entry
        else:
            if best_cross is None or entry[0] > best_cross[0]:
                best_cross = entry
    chosen = best_same if best_same is not None else best_cross
    if chosen is None:
        raise NoNegativeAvailable(f"no legal negative for anchor {anchor_id!r}")
    return pool.ids[chosen[1]]


def split_counts(pairs: Sequence[PairExample]) -> dict[str, dict[str, int]]:
    """Count pairs per (split, label); the 'total' row sums the splits."""
    table: dict[str, dict[str, int]] = {}
    for pair in pairs:
        per_split = table.setdefault(pair.split, {})
        per_split[pair.label] = per_split.get(pair.label, 0) + 1
    totals: dict[str, int] = {}
    for per_split in table.values():
        for label, n in per_split.items():
            totals[label] = totals.get(label, 0) + n
    table["total"] = totals
    return table


# --- topic-match annotation ---------------------------------------------------

SHEET_COLUMNS = [
    "modern_id",
    "historical_id",
    "modern_headline",
    "historical_headline",
    "on_topic",
    "topic_name",
]


def topic_match_rate(annotations: Sequence[TopicAnnotation]) -> float:
    """Share of annotated pairs judged to be on the same topic."""
    if not annotations:
        raise EmptyAnnotationError("no annotation records")
    return sum(a.on_topic for a in annotations) / len(annotations)


def export_annotation_sheet(
    queries: Sequence[Article],
    hits: Sequence[Sequence],
    corpus: Mapping[str, Article],
    path,
    k: int = 5,
) -> int:
    """Write a CSV for human topic annotation; returns the data row count.

    One row per (modern query, historical hit) pair, first k hits per query,
    with on_topic and topic_name left blank for the annotator.
    """
    if len(queries) != len(hits):
        raise ShapeError(f"{len(queries)} queries but {len(hits)} hit lists")
    rows = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SHEET_COLUMNS)
        for query, per_query in zip(queries, hits):
            for hit in list(per_query)[:k]:
                hit_id = hit.id if hasattr(hit, "id") else hit[0]
                historical = corpus.get(hit_id)
                writer.writerow(
                    [
                        query.id,
                        hit_id,
                        query.headline or "",
                        (historical.headline or "") if historical else "",
                        "",
                        "",
                    ]
                )
                rows += 1
    return rows


_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def read_annotation_sheet(path) -> list[TopicAnnotation]:
    """Read a filled annotation sheet back; every on_topic cell must be set."""
    records: list[TopicAnnotation] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for line_no, row in enumerate(reader, start=2):
            raw = (row.get("on_topic") or "").strip().lower()
            if raw in _TRUE:
                on_topic = True
            elif raw in _FALSE:
                on_topic = False
            else:
                raise ValueError(
                    f"{path} line {line_no}: on_topic is {raw!r}, expected true/false"
                )
            records.append(
                TopicAnnotation(
                    modern_id=row.get("modern_id", ""),
                    historical_id=row.get("historical_id", ""),
                    on_topic=on_topic,
                    topic_name=(row.get("topic_name") or "").strip(),
                )
            )
    return records
