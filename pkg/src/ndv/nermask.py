"""BIO decoding, entity masking, span-level scoring, and NER backends.

Character offsets throughout are Unicode code-point indices into the article
text, never byte offsets: corpus text is multibyte UTF-8 and byte-indexed
masking could splice invalid sequences.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from . import _http
from .corpus import Article
from .errors import (
    AnnotationError,
    ProtocolError,
    SpanBoundsError,
    SpanOverlapError,
)

MASK_TOKEN = "[MASK]"


class EntityClass(str, Enum):
    PER = "PER"
    ORG = "ORG"
    LOC = "LOC"
    MISC = "MISC"


VALID_TAGS = frozenset(
    {"O"}
    | {f"{prefix}-{cls.value}" for prefix in ("B", "I") for cls in EntityClass}
)


@dataclass(frozen=True)
class TokenAnnotation:
    """One token of an article with its BIO tag and half-open char range."""

    token: str
    start: int
    end: int
    tag: str


@dataclass(frozen=True)
class EntitySpan:
    """Half-open character range [start, end) tagged with an entity class."""

    start: int
    end: int
    label: EntityClass


@dataclass(frozen=True)
class MaskedArticle:
    """Masked text plus the number of [MASK] tokens it now contains.

    span_count counts mask tokens after whitespace-adjacent spans collapse,
    so it always equals masked_text.count(MASK_TOKEN).
    """

    id: str
    masked_text: str
    span_count: int


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gold: int) -> "PRF":
        # Degenerate conventions: nothing to find and nothing found is a
        # perfect score; otherwise an empty side scores zero.
        if n_pred == 0 and n_gold == 0:
            return cls(1.0, 1.0, 1.0)
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_gold if n_gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f1)


def _check_token_order(annotations: Sequence[TokenAnnotation]) -> None:
    prev_end = 0
    for ann in annotations:
        if ann.start < 0 or ann.start >= ann.end:
            raise AnnotationError(f"bad token range [{ann.start}, {ann.end})")
        if ann.start < prev_end:
            raise AnnotationError(
                f"token {ann.token!r} at {ann.start} overlaps the previous token"
            )
        if ann.tag not in VALID_TAGS:
            raise AnnotationError(f"unknown tag {ann.tag!r}")
        prev_end = ann.end


def decode_bio(annotations: Sequence[TokenAnnotation]) -> list[EntitySpan]:
    """Decode token-level BIO tags into entity spans.

    Maximal B-X (I-X)* runs become one span from the first token's start to
    the last token's end. A dangling I-X (no preceding B-X or I-X of the same
    class) is repaired to B-X, which favors recall on noisy tagger output.
    O tokens close any open span.
    """
    _check_token_order(annotations)
    spans: list[EntitySpan] = []
    open_label: Optional[EntityClass] = None
    open_start = 0
    open_end = 0

    def close() -> None:
        nonlocal open_label
        if open_label is not None:
            spans.append(EntitySpan(start=open_start, end=open_end, label=open_label))
            open_label = None

    for ann in annotations:
        if ann.tag == "O":
            close()
            continue
        prefix, _, cls_name = ann.tag.partition("-")
        label = EntityClass(cls_name)
        if prefix == "B" or open_label != label:
            # B always starts a span; a mismatched I is the repair case.
            close()
            open_label = label
            open_start = ann.start
        open_end = ann.end
    close()
    return spans


def encode_bio(
    token_offsets: Sequence[tuple[int, int]], spans: Sequence[EntitySpan]
) -> list[str]:
    """Encode spans as BIO tags over a tokenization (inverse of decode_bio).

    Every span must start on a token start and end on a token end; anything
    else cannot be represented and raises AnnotationError.
    """
    ordered = sorted(spans, key=lambda s: s.start)
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise AnnotationError("spans overlap")
    tags = ["O"] * len(token_offsets)
    starts = {s: i for i, (s, _) in enumerate(token_offsets)}
    ends = {e: i for i, (_, e) in enumerate(token_offsets)}
    for span in ordered:
        if span.start not in starts or span.end not in ends:
            raise AnnotationError(
                f"span [{span.start}, {span.end}) not aligned to token boundaries"
            )
        first, last = starts[span.start], ends[span.end]
        tags[first] = f"B-{span.label.value}"
        for i in range(first + 1, last + 1):
            tags[i] = f"I-{span.label.value}"
    return tags


def mask_spans(
    text: str, spans: Sequence[EntitySpan], article_id: str = ""
) -> MaskedArticle:
    """Replace each entity span with the literal mask token.

    Consecutive spans separated only by whitespace collapse into a single
    mask token (the whitespace between them is consumed); a multi-token
    entity split by the tagger should not leak its token count. All text
    outside the collapsed groups is preserved exactly.
    """
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    prev_end = None
    for span in ordered:
        if span.start < 0 or span.end > len(text):
            raise SpanBoundsError(f"span [{span.start}, {span.end}) outside text")
        if span.start >= span.end:
            raise SpanBoundsError(f"empty or inverted span [{span.start}, {span.end})")
        if prev_end is not None and span.start < prev_end:
            raise SpanOverlapError(f"span at {span.start} overlaps the previous span")
        prev_end = span.end

    # Collapse groups: runs of spans whose gaps are pure whitespace.
    groups: list[tuple[int, int]] = []
    for span in ordered:
        if groups and text[groups[-1][1] : span.start].strip() == "":
            groups[-1] = (groups[-1][0], span.end)
        else:
            groups.append((span.start, span.end))

    parts: list[str] = []
    cursor = 0
    for gstart, gend in groups:
        parts.append(text[cursor:gstart])
        parts.append(MASK_TOKEN)
        cursor = gend
    parts.append(text[cursor:])
    return MaskedArticle(
        id=article_id, masked_text="".join(parts), span_count=len(groups)
    )


def score_spans(
    gold: Sequence[EntitySpan],
    pred: Sequence[EntitySpan],
    class_agnostic: bool = False,
) -> PRF:
    """Exact-boundary span P/R/F1; no partial credit.

    With class_agnostic=True a prediction matches on boundaries alone, which
    is the relevant score when every entity gets the same mask token.
    """

    def key(span: EntitySpan):
        return (span.start, span.end) if class_agnostic else (span.start, span.end, span.label)

    gold_keys = {key(s) for s in gold}
    pred_keys = {key(s) for s in pred}
    tp = len(gold_keys & pred_keys)
    return PRF.from_counts(tp, n_pred=len(pred_keys), n_gold=len(gold_keys))


# --- backends ----------------------------------------------------------------


def tokenize_ws(text: str) -> list[tuple[str, int, int]]:
    """Whitespace tokens with code-point offsets: (token, start, end)."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        tokens.append((text[i:j], i, j))
        i = j
    return tokens


# Maps a cleaned lowercase token to the class it votes for. Deliberately
# tiny; everything else defaults to MISC.
_GAZETTEER: dict[str, EntityClass] = {
    "john": EntityClass.PER,
    "mary": EntityClass.PER,
    "james": EntityClass.PER,
    "smith": EntityClass.PER,
    "roosevelt": EntityClass.PER,
    "eleanor": EntityClass.PER,
    "truman": EntityClass.PER,
    "paris": EntityClass.LOC,
    "london": EntityClass.LOC,
    "berlin": EntityClass.LOC,
    "washington": EntityClass.LOC,
    "chicago": EntityClass.LOC,
    "boston": EntityClass.LOC,
    "alabama": EntityClass.LOC,
    "texas": EntityClass.LOC,
    "york": EntityClass.LOC,
    "america": EntityClass.LOC,
    "congress": EntityClass.ORG,
    "senate": EntityClass.ORG,
    "army": EntityClass.ORG,
    "navy": EntityClass.ORG,
    "church": EntityClass.ORG,
    "court": EntityClass.ORG,
    "university": EntityClass.ORG,
    "tribune": EntityClass.ORG,
    "herald": EntityClass.ORG,
}

_SENTENCE_END = ".!?"


class StubNerBackend:
    """Deterministic rule-based tagger standing in for a neural NER model.

    Rule: maximal runs of capitalized whitespace tokens are entities, except
    that a single capitalized token at a sentence start is ignored (it is
    usually just sentence case). The first run token found in a small fixed
    gazetteer picks the class; the default is MISC. Exists solely to make
    the pipeline testable without model inference.
    """

    name = "stub"

    def annotate_batch(self, texts: Sequence[str]) -> list[list[TokenAnnotation]]:
        return [self._annotate_one(text) for text in texts]

    def _annotate_one(self, text: str) -> list[TokenAnnotation]:
        tokens = tokenize_ws(text)
        tags = ["O"] * len(tokens)
        i = 0
        while i < len(tokens):
            if not _is_capitalized(tokens[i][0]):
                i += 1
                continue
            j = i
            while j + 1 < len(tokens) and _is_capitalized(tokens[j + 1][0]):
                j += 1
            run = list(range(i, j + 1))
            if len(run) >= 2 or not _sentence_initial(tokens, i):
                label = _run_label(tokens, run)
                tags[run[0]] = f"B-{label.value}"
                for idx in run[1:]:
                    tags[idx] = f"I-{label.value}"
            i = j + 1
        return [
            TokenAnnotation(token=tok, start=s, end=e, tag=tag)
            for (tok, s, e), tag in zip(tokens, tags)
        ]


def _is_capitalized(token: str) -> bool:
    return bool(token) and token[0].isupper()


def _sentence_initial(tokens: list[tuple[str, int, int]], idx: int) -> bool:
    if idx == 0:
        return True
    prev = tokens[idx - 1][0]
    return prev.rstrip(")\"'").endswith(tuple(_SENTENCE_END))


def _run_label(tokens, run: list[int]) -> EntityClass:
    for idx in run:
        cleaned = tokens[idx][0].strip(string.punctuation).lower()
        if cleaned in _GAZETTEER:
            return _GAZETTEER[cleaned]
    return EntityClass.MISC


class RemoteNerBackend:
    """Client for the NER wire protocol.

    Request: {"texts": [string, ...]}
    Reply:   {"annotations": [[{"token", "start", "end", "tag"}, ...], ...]}
    """

    def __init__(self, url: str, retries: int = _http.DEFAULT_RETRIES,
                 timeout_s: float = _http.DEFAULT_TIMEOUT_S):
        self.url = url.rstrip("/")
        self.retries = retries
        self.timeout_s = timeout_s

    @property
    def name(self) -> str:
        return self.url

    def annotate_batch(self, texts: Sequence[str]) -> list[list[TokenAnnotation]]:
        body = _http.post_json(
            self.url, {"texts": list(texts)},
            retries=self.retries, timeout_s=self.timeout_s,
        )
        raw = body.get("annotations")
        if not isinstance(raw, list) or len(raw) != len(texts):
            raise ProtocolError(
                f"NER backend returned {type(raw).__name__} of wrong length"
            )
        out: list[list[TokenAnnotation]] = []
        for per_text in raw:
            if not isinstance(per_text, list):
                raise ProtocolError("per-text annotations must be a list")
            anns = []
            for item in per_text:
                try:
                    anns.append(
                        TokenAnnotation(
                            token=str(item["token"]),
                            start=int(item["start"]),
                            end=int(item["end"]),
                            tag=str(item["tag"]),
                        )
                    )
                except (TypeError, KeyError, ValueError) as e:
                    raise ProtocolError(f"malformed annotation object: {item!r}") from e
            out.append(anns)
        return out


def make_ner_backend(spec: str):
    """Resolve 'stub' or an http(s) URL to a backend instance."""
    if spec == "stub":
        return StubNerBackend()
    if spec.startswith(("http://", "https://")):
        return RemoteNerBackend(spec)
    raise ValueError(f"unknown NER backend {spec!r} (expected 'stub' or a URL)")


def annotate(backend, texts: Sequence[str]) -> list[list[TokenAnnotation]]:
    """Run a NER backend over a batch and validate what comes back.

    One annotation list per input, order preserved. Replies whose offsets
    fall outside their text, overlap, or carry unknown tags raise
    ProtocolError regardless of which backend produced them.
    """
    if not texts:
        return []
    results = backend.annotate_batch(texts)
    if len(results) != len(texts):
        raise ProtocolError(
            f"backend returned {len(results)} annotation lists for {len(texts)} texts"
        )
    for text, anns in zip(texts, results):
        try:
            _check_token_order(anns)
        except AnnotationError as e:
            raise ProtocolError(f"backend reply invalid: {e}") from e
        if anns and anns[-1].end > len(text):
            raise ProtocolError(
                f"backend reply has offsets past text end ({anns[-1].end} > {len(text)})"
            )
    return results


def entity_type_shares(
    annotated: Iterable[tuple[Article, Sequence[TokenAnnotation]]],
) -> dict[int, dict[EntityClass, float]]:
    """Per-year share of tokens belonging to each entity class.

    share(year, class) = entity tokens of that class / all tokens, over the
    whitespace tokenization the annotations cover. Years with no articles do
    not appear; shares within a year sum to at most 1.
    """
    token_totals: dict[int, int] = {}
    class_counts: dict[int, dict[EntityClass, int]] = {}
    for article, anns in annotated:
        year = article.year()
        token_totals[year] = token_totals.get(year, 0) + len(anns)
        per_class = class_counts.setdefault(year, {c: 0 for c in EntityClass})
        for ann in anns:
            if ann.tag != "O":
                per_class[EntityClass(ann.tag.split("-", 1)[1])] += 1
    return {
        year: {
            cls: (class_counts[year][cls] / total if total else 0.0)
            for cls in EntityClass
        }
        for year, total in token_totals.items()
    }


# --- JSONL (de)serialization used by the CLI and wire protocol ---------------


def annotation_to_dict(ann: TokenAnnotation) -> dict:
    return {"token": ann.token, "start": ann.start, "end": ann.end, "tag": ann.tag}


def annotation_from_dict(d: dict) -> TokenAnnotation:
    return TokenAnnotation(
        token=str(d["token"]), start=int(d["start"]), end=int(d["end"]), tag=str(d["tag"])
    )
