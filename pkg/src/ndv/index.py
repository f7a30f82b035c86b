"""Exact top-k maximum-inner-product search over embedding stores.

The index never copies vectors: it scans each shard's matrix in row blocks
(cache-friendly over a memory-mapped store), scores a whole block against the
query batch in one float32 matrix product, and keeps a bounded candidate set
of size k per query. Time is O(total * dim) per query and extra space is
O(k); exactness is guaranteed because every row is scored.

Ordering contract: hits are sorted by score descending, ties broken by
ascending global ordinal (shard order, then row order). This rule is what
makes any partition of the rows into shards, searched independently and
merged with merge_topk, return the identical hit list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embed import EmbeddingStore
from .errors import BadK, DimMismatchError, DuplicateIdError, EmptyIndex

DEFAULT_BLOCK_ROWS = 4096


@dataclass(frozen=True)
class SearchHit:
    """One retrieved row: corpus id, global ordinal, inner-product score."""

    id: str
    ordinal: int
    score: float


@dataclass
class FlatIndex:
    """Shard list plus the (shard, row) <-> global ordinal bookkeeping."""

    shards: list[EmbeddingStore]
    dim: int
    total: int
    offsets: list[int]  # offsets[i] = global ordinal of shard i's row 0
    ids: list[str]  # flattened, ids[ordinal]
    block_rows: int = DEFAULT_BLOCK_ROWS

    def locate(self, ordinal: int) -> tuple[int, int]:
        """Map a global ordinal back to (shard index, row)."""
        if not 0 <= ordinal < self.total:
            raise IndexError(f"ordinal {ordinal} out of range 0..{self.total - 1}")
        shard_idx = int(np.searchsorted(self.offsets, ordinal, side="right")) - 1
        return shard_idx, ordinal - self.offsets[shard_idx]


def build(shards: Sequence[EmbeddingStore], block_rows: int = DEFAULT_BLOCK_ROWS) -> FlatIndex:
    """Assemble shards into a searchable index without copying any matrix."""
    shards = list(shards)
    if not shards:
        raise EmptyIndex("cannot build an index from zero shards")
    dim = shards[0].dim
    for s in shards[1:]:
        if s.dim != dim:
            raise DimMismatchError(f"shard dims differ: {dim} vs {s.dim}")
    ids: list[str] = []
    offsets: list[int] = []
    for s in shards:
        offsets.append(len(ids))
        ids.extend(s.ids)
    seen: set[str] = set()
    for article_id in ids:
        if article_id in seen:
            raise DuplicateIdError(f"id {article_id!r} appears in more than one shard")
        seen.add(article_id)
    return FlatIndex(
        shards=shards, dim=dim, total=len(ids), offsets=offsets, ids=ids,
        block_rows=max(1, block_rows),
    )


def search_batch(
    index: FlatIndex, queries, k: int
) -> list[list[SearchHit]]:
    """Exact top-k for each query; results aligned to query order.

    k is clamped to the index size. Scores are float32 inner products from
    one scan over the rows; per block the running candidate set and the
    block's scores are re-ranked together under the (score desc, ordinal
    asc) rule, so ties at the boundary can never evict a lower ordinal.
    """
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    Q = np.asarray(queries, dtype=np.float32)
    if Q.ndim == 1:
        Q = Q.reshape(1, -1)
    if Q.shape[0] == 0:
        return []
    if Q.shape[1] != index.dim:
        raise DimMismatchError(f"query dim {Q.shape[1]} != index dim {index.dim}")

    nq = Q.shape[0]
    keff = min(k, index.total)
    qt = np.ascontiguousarray(Q.T)
    best_scores = [np.empty(0, dtype=np.float32) for _ in range(nq)]
    best_ords = [np.empty(0, dtype=np.int64) for _ in range(nq)]

    for shard_idx, store in enumerate(index.shards):
        base = index.offsets[shard_idx]
        matrix = store.matrix
        for lo in range(0, store.count, index.block_rows):
            hi = min(lo + index.block_rows, store.count)
            scores = matrix[lo:hi] @ qt  # (rows, nq) float32
            ordinals = np.arange(base + lo, base + hi, dtype=np.int64)
            for qi in range(nq):
                s = np.concatenate([best_scores[qi], scores[:, qi]])
                o = np.concatenate([best_ords[qi], ordinals])
                top = np.lexsort((o, -s))[:keff]
                best_scores[qi] = s[top]
                best_ords[qi] = o[top]

    return [
        [
            SearchHit(id=index.ids[int(o)], ordinal=int(o), score=float(s))
            for s, o in zip(best_scores[qi], best_ords[qi])
        ]
        for qi in range(nq)
    ]


def search(index: FlatIndex, query, k: int) -> list[SearchHit]:
    """Top-k for a single query vector (the batch path with one query)."""
    q = np.asarray(query, dtype=np.float32)
    if q.ndim != 1:
        raise DimMismatchError(f"expected a 1-D query, got shape {q.shape}")
    return search_batch(index, q.reshape(1, -1), k)[0]


def merge_topk(per_shard: Sequence[Sequence[SearchHit]], k: int) -> list[SearchHit]:
    """Merge per-shard top-k lists into the global top-k.

    Inputs must carry global ordinals and each be sorted by the global
    order rule; the merge is then invariant under shard permutation.
    """
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    merged = [hit for hits in per_shard for hit in hits]
    merged.sort(key=lambda h: (-h.score, h.ordinal))
    return merged[:k]
