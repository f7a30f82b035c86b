"""Composes corpus -> NER -> mask -> embed -> search into one API.

The fused operations here are definitionally equal to chaining the single
stages: they call the same functions in the same order, batch by batch.
Stage failures are re-raised as StageError carrying the stage name and the
article id(s) being processed, so a 430-million-row run can say exactly
where it died. Batches within a stage are independent and may be fanned out
to workers, as long as outputs are reassembled in input order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import index as index_mod
from .corpus import Article
from .embed import (
    DEFAULT_MODEL,
    STUB_DIM,
    EmbeddingStore,
    embed_batch,
    make_embed_backend,
)
from .errors import NdvError, StageError
from .nermask import (
    MaskedArticle,
    TokenAnnotation,
    annotate,
    decode_bio,
    make_ner_backend,
    mask_spans,
)

DEFAULT_NER_MODEL = "historical_newspaper_ner"


@dataclass
class PipelineConfig:
    """Everything the composed pipeline needs to run.

    Backends are named by 'stub' or an http(s) URL. embed_dim applies to the
    stub backend (remote backends report their own dim). max_chars truncates
    masked text before embedding; None embeds in full. seed is accepted for
    reproducibility plumbing; the stub pipeline itself has no random stage.
    """

    ner_backend: str = "stub"
    embed_backend: str = "stub"
    model_name: str = DEFAULT_MODEL
    ner_model_name: str = DEFAULT_NER_MODEL
    k: int = 1
    ner_batch_size: int = 64
    embed_batch_size: int = 256
    embed_dim: int = STUB_DIM
    max_chars: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.ner_batch_size < 1 or self.embed_batch_size < 1:
            raise ValueError("batch sizes must be >= 1")

    def make_ner(self):
        return make_ner_backend(self.ner_backend)

    def make_embed(self):
        return make_embed_backend(
            self.embed_backend, model=self.model_name, dim=self.embed_dim
        )


def _batches(items: Sequence, size: int):
    for lo in range(0, len(items), size):
        yield items[lo : lo + size]


def ner(
    articles: Sequence[Article],
    backend="stub",
    batch_size: int = 64,
) -> list[list[TokenAnnotation]]:
    """Annotate articles, one token-annotation list per article."""
    if isinstance(backend, str):
        backend = make_ner_backend(backend)
    results: list[list[TokenAnnotation]] = []
    for chunk in _batches(list(articles), batch_size):
        texts = [a.text for a in chunk]
        try:
            results.extend(annotate(backend, texts))
        except NdvError as e:
            raise StageError("ner", [a.id for a in chunk], e) from e
    return results


def mask(
    articles: Sequence[Article],
    annotations: Sequence[Sequence[TokenAnnotation]],
) -> list[MaskedArticle]:
    """Decode each article's BIO tags and mask the resulting spans."""
    if len(articles) != len(annotations):
        raise ValueError(
            f"{len(articles)} articles but {len(annotations)} annotation lists"
        )
    masked: list[MaskedArticle] = []
    for article, anns in zip(articles, annotations):
        try:
            spans = decode_bio(anns)
        except NdvError as e:
            raise StageError("decode", [article.id], e) from e
        try:
            masked.append(mask_spans(article.text, spans, article_id=article.id))
        except NdvError as e:
            raise StageError("mask", [article.id], e) from e
    return masked


def embed(
    masked: Sequence[MaskedArticle],
    backend="stub",
    model: str = DEFAULT_MODEL,
    batch_size: int = 256,
    dim: int = STUB_DIM,
    max_chars: Optional[int] = None,
) -> EmbeddingStore:
    """Embed masked articles into a unit-norm store, rows in input order."""
    if isinstance(backend, str):
        backend = make_embed_backend(backend, model=model, dim=dim)
    ids = [m.id for m in masked]
    vectors: list[np.ndarray] = []
    for chunk in _batches(list(masked), batch_size):
        texts = [m.masked_text for m in chunk]
        if max_chars is not None:
            texts = [t[:max_chars] for t in texts]
        try:
            vectors.extend(embed_batch(backend, texts))
        except NdvError as e:
            raise StageError("embed", [m.id for m in chunk], e) from e
    store_dim = getattr(backend, "dim", None) or dim
    return EmbeddingStore.from_vectors(ids, vectors, dim=store_dim)


def mask_and_embed(
    articles: Sequence[Article],
    config: Optional[PipelineConfig] = None,
    ner_backend=None,
    embed_backend=None,
) -> EmbeddingStore:
    """NER + mask + embed in one call; row i is article i's masked text.

    Equal to the manual composition ner() -> mask() -> embed() because it is
    that composition.
    """
    config = config or PipelineConfig()
    articles = list(articles)
    annotations = ner(
        articles,
        backend=ner_backend if ner_backend is not None else config.make_ner(),
        batch_size=config.ner_batch_size,
    )
    masked = mask(articles, annotations)
    return embed(
        masked,
        backend=embed_backend if embed_backend is not None else config.make_embed(),
        batch_size=config.embed_batch_size,
        dim=config.embed_dim,
        max_chars=config.max_chars,
    )


def find_nearest_neighbours(
    query_store: EmbeddingStore,
    corpus_store: EmbeddingStore,
    k: int = 1,
) -> tuple[list[list[float]], list[list[str]]]:
    """Top-k corpus neighbours for every query row.

    Returns (score lists, id lists), both aligned to query row order and
    sorted best-first.
    """
    idx = index_mod.build([corpus_store])
    per_query = index_mod.search_batch(idx, query_store.matrix, k)
    scores = [[hit.score for hit in hits] for hits in per_query]
    ids = [[hit.id for hit in hits] for hits in per_query]
    return scores, ids


def search_nearest_story(
    query_articles: Sequence[Article],
    config: Optional[PipelineConfig] = None,
    corpus_embed: Optional[EmbeddingStore] = None,
    ner_backend=None,
    embed_backend=None,
) -> list[list[tuple[str, float]]]:
    """Full query-side pipeline: mask, embed, retrieve.

    Returns one ranked list of (corpus id, score) per query article.
    """
    if corpus_embed is None:
        raise ValueError("corpus_embed store is required")
    config = config or PipelineConfig()
    query_store = mask_and_embed(
        query_articles, config, ner_backend=ner_backend, embed_backend=embed_backend
    )
    try:
        idx = index_mod.build([corpus_embed])
        per_query = index_mod.search_batch(idx, query_store.matrix, config.k)
    except NdvError as e:
        raise StageError("search", [a.id for a in query_articles], e) from e
    return [[(hit.id, hit.score) for hit in hits] for hits in per_query]
