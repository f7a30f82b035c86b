"""Read-only HTTP query service: masked-embed-search plus article lookup.

The search handler runs the exact query-side pipeline the library exposes
(annotate -> decode -> mask -> embed -> top-k), so service responses match
library and CLI output for the same configuration. All state is loaded once
at startup and never mutated; handlers are free to interleave.
"""

from __future__ import annotations

import time
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from . import index as index_mod
from .corpus import Article
from .embed import embed_batch
from .errors import BackendUnavailable, NdvError
from .nermask import annotate, decode_bio, mask_spans
from .pipeline import PipelineConfig

MAX_K = 50
DEFAULT_K = 5
SNIPPET_CHARS = 300


def create_app(
    flat_index: Optional[index_mod.FlatIndex] = None,
    corpus: Optional[dict[str, Article]] = None,
    config: Optional[PipelineConfig] = None,
) -> FastAPI:
    """Build the service app around an already-loaded index and corpus map.

    Pass flat_index=None to get an app that answers 503 until real state
    exists (useful for probing the unloaded behavior).
    """
    config = config or PipelineConfig()
    app = FastAPI(title="entity-masked semantic search")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.index = flat_index
    app.state.corpus = corpus or {}
    app.state.config = config
    # Backends are created once and shared by every request handler.
    app.state.ner_backend = config.make_ner()
    app.state.embed_backend = config.make_embed()

    @app.get("/health")
    def health():
        idx = app.state.index
        if idx is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        return {"status": "ok", "index_total": idx.total, "dim": idx.dim}

    @app.post("/search")
    async def search(request: Request):
        idx = app.state.index
        if idx is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")

        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="text must be a nonempty string")
        k = body.get("k", DEFAULT_K)
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
            raise HTTPException(
                status_code=400, detail=f"k must be an integer in 1..{MAX_K}"
            )
        do_mask = body.get("mask", True)
        if not isinstance(do_mask, bool):
            raise HTTPException(status_code=400, detail="mask must be a boolean")

        started = time.perf_counter()
        if do_mask:
            try:
                annotations = annotate(app.state.ner_backend, [text])[0]
            except BackendUnavailable as e:
                raise HTTPException(status_code=503, detail=f"ner backend down: {e}")
            spans = decode_bio(annotations)
            masked_query = mask_spans(text, spans).masked_text
        else:
            masked_query = text
        try:
            vector = embed_batch(app.state.embed_backend, [masked_query])[0]
        except BackendUnavailable as e:
            raise HTTPException(status_code=503, detail=f"embed backend down: {e}")
        try:
            hits = index_mod.search(idx, vector, k)
        except NdvError as e:
            raise HTTPException(status_code=500, detail=f"search failed: {e}")
        elapsed_ms = int((time.perf_counter() - started) * 1000)

        payload = []
        for hit in hits:
            article = app.state.corpus.get(hit.id)
            payload.append(
                {
                    "id": hit.id,
                    "score": hit.score,
                    "headline": (article.headline if article else None),
                    "date": (article.date if article else None),
                    "source": (article.source if article else None),
                    "snippet": (article.text[:SNIPPET_CHARS] if article else None),
                }
            )
        return {"hits": payload, "masked_query": masked_query, "timing_ms": elapsed_ms}

    @app.get("/article/{article_id:path}")
    def get_article(article_id: str):
        article = app.state.corpus.get(article_id)
        if article is None:
            raise HTTPException(status_code=404, detail=f"unknown article {article_id!r}")
        return {
            "id": article.id,
            "source": article.source,
            "date": article.date,
            "text": article.text,
            "headline": article.headline,
        }

    return app
