"""Entity-masked semantic search over historical news corpora.

The inference pipeline in one sitting::

    import ndv

    corpus = ndv.download("american stories:1900:Alabama", manifest="manifest.json")
    annotations = ndv.ner(corpus, "stub")
    masked = ndv.mask(corpus, annotations)
    corpus_store = ndv.embed(masked, "stub")

    hits = ndv.search_nearest_story(queries, corpus_embed=corpus_store)
    scores, ids = ndv.find_nearest_neighbours(query_store, corpus_store, k=1)

Named entities are masked before embedding so retrieval keys on how a story
is told, not on who it names; vectors are L2-normalized so the exact
inner-product search ranks by cosine similarity.
"""

from . import errors
from .corpus import (
    Article,
    CorpusSpec,
    DatasetManifest,
    StreamReport,
    download,
    load_manifest,
    parse_corpus_spec,
    read_articles_jsonl,
    serialize_article,
    stream_articles,
    validate_article,
)
from .embed import (
    EmbeddingStore,
    StubEmbedBackend,
    RemoteEmbedBackend,
    embed_batch,
    l2_normalize,
    make_embed_backend,
    read_store,
    write_store,
)
from .evalkit import (
    ArticleMeta,
    PairExample,
    StoryGroup,
    TopicAnnotation,
    assemble_positive_pairs,
    best_threshold,
    export_annotation_sheet,
    f1_from_pr,
    mine_hard_negative,
    pairwise_classify,
    pairwise_prf,
    read_annotation_sheet,
    split_counts,
    topic_match_rate,
)
from .index import FlatIndex, SearchHit, build, merge_topk, search, search_batch
from .nermask import (
    MASK_TOKEN,
    EntityClass,
    EntitySpan,
    MaskedArticle,
    PRF,
    RemoteNerBackend,
    StubNerBackend,
    TokenAnnotation,
    annotate,
    decode_bio,
    encode_bio,
    entity_type_shares,
    make_ner_backend,
    mask_spans,
    score_spans,
    tokenize_ws,
)
from .pipeline import (
    PipelineConfig,
    embed,
    find_nearest_neighbours,
    mask,
    mask_and_embed,
    ner,
    search_nearest_story,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    # corpus
    "Article", "CorpusSpec", "DatasetManifest", "StreamReport",
    "download", "load_manifest", "parse_corpus_spec", "read_articles_jsonl",
    "serialize_article", "stream_articles", "validate_article",
    # ner + masking
    "MASK_TOKEN", "EntityClass", "EntitySpan", "MaskedArticle", "PRF",
    "RemoteNerBackend", "StubNerBackend", "TokenAnnotation",
    "annotate", "decode_bio", "encode_bio", "entity_type_shares",
    "make_ner_backend", "mask_spans", "score_spans", "tokenize_ws",
    # embeddings
    "EmbeddingStore", "StubEmbedBackend", "RemoteEmbedBackend",
    "embed_batch", "l2_normalize", "make_embed_backend", "read_store", "write_store",
    # index
    "FlatIndex", "SearchHit", "build", "merge_topk", "search", "search_batch",
    # pipeline
    "PipelineConfig", "embed", "find_nearest_neighbours", "mask",
    "mask_and_embed", "ner", "search_nearest_story",
    # evaluation
    "ArticleMeta", "PairExample", "StoryGroup", "TopicAnnotation",
    "assemble_positive_pairs", "best_threshold", "export_annotation_sheet",
    "f1_from_pr", "mine_hard_negative", "pairwise_classify", "pairwise_prf",
    "read_annotation_sheet", "split_counts", "topic_match_rate",
]
