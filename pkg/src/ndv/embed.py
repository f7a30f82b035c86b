"""Embedding backends, L2 normalization, and the on-disk vector store.

Vectors are float32 and unit-norm everywhere past the backend boundary:
normalization is applied after every backend call and checked again whenever
a store is written or read. On unit vectors the inner product used by the
search index equals cosine similarity, which is the property the whole
retrieval stack relies on.

Store file layout (little-endian), matrix at a fixed offset so it can be
memory-mapped:

    magic   4 bytes  b"NDJV"
    version u32      1
    dim     u32
    count   u64
    matrix  count * dim * f4, row-major
    ids     count * (u32 byte length + UTF-8 bytes)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _http
from .errors import (
    CorruptStoreError,
    FormatError,
    InvariantError,
    ProtocolError,
    ZeroVectorError,
)

MAGIC = b"NDJV"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIIQ")  # magic, version, dim, count
NORM_TOL = 1e-5

STUB_DIM = 256
DEFAULT_MODEL = "same-story"


def l2_normalize(v) -> np.ndarray:
    """Return v / ||v||2 as float32.

    The norm is accumulated in float64 in numpy's fixed order, so equal
    inputs give bitwise-equal outputs. Idempotent within NORM_TOL.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    norm = np.sqrt(np.dot(arr, arr))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize an all-zero vector")
    return (arr / norm).astype(np.float32)


# --- backends ----------------------------------------------------------------

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


class StubEmbedBackend:
    """Hashed bag-of-ngrams embedder standing in for the bi-encoder.

    Features are lowercase whitespace unigrams and adjacent bigrams (joined
    with a single space). Each feature is FNV-1a-64 hashed; the hash picks a
    bucket (h mod dim) and its top bit picks the sign. Occurrence counts
    accumulate and the caller normalizes. Integer hashing only, so outputs
    are bitwise reproducible across platforms, and shared vocabulary still
    moves cosine the way lexical overlap should.
    """

    def __init__(self, dim: int = STUB_DIM):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    name = "stub"

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = text.lower().split()
        features = list(tokens)
        features.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
        for feat in features:
            h = fnv1a_64(feat.encode("utf-8"))
            sign = 1.0 if (h >> 63) == 0 else -1.0
            vec[h % self.dim] += sign
        return vec


class RemoteEmbedBackend:
    """Client for the embedding wire protocol.

    Request: {"texts": [string, ...], "model": string}
    Reply:   {"dim": int, "vectors": [[float, ...], ...]}

    The dim reported by the first reply is pinned; any later disagreement is
    a protocol violation.
    """

    def __init__(self, url: str, model: str = DEFAULT_MODEL,
                 retries: int = _http.DEFAULT_RETRIES,
                 timeout_s: float = _http.DEFAULT_TIMEOUT_S):
        self.url = url.rstrip("/")
        self.model = model
        self.retries = retries
        self.timeout_s = timeout_s
        self.dim: int | None = None

    @property
    def name(self) -> str:
        return self.url

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        body = _http.post_json(
            self.url, {"texts": list(texts), "model": self.model},
            retries=self.retries, timeout_s=self.timeout_s,
        )
        try:
            dim = int(body["dim"])
            vectors = body["vectors"]
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"embedding reply missing dim/vectors: {e}") from e
        if self.dim is None:
            if dim < 1:
                raise ProtocolError(f"embedding backend reported dim {dim}")
            self.dim = dim
        elif dim != self.dim:
            raise ProtocolError(f"backend dim changed from {self.dim} to {dim}")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError("embedding reply vector count does not match batch")
        out = []
        for row in vectors:
            arr = np.asarray(row, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self.dim:
                raise ProtocolError(
                    f"embedding row has dim {arr.shape}, expected {self.dim}"
                )
            out.append(arr)
        return out


def make_embed_backend(spec: str, model: str = DEFAULT_MODEL, dim: int = STUB_DIM):
    """Resolve 'stub' or an http(s) URL to a backend instance."""
    if spec == "stub":
        return StubEmbedBackend(dim=dim)
    if spec.startswith(("http://", "https://")):
        return RemoteEmbedBackend(spec, model=model)
    raise ValueError(f"unknown embedding backend {spec!r} (expected 'stub' or a URL)")


def embed_batch(backend, texts: Sequence[str]) -> list[np.ndarray]:
    """Embed a batch and normalize every vector, whatever the backend did.

    One float32 unit vector per input, order preserved. Empty input texts
    are rejected; a backend emitting rows of differing lengths raises
    ProtocolError.
    """
    if not texts:
        return []
    for i, t in enumerate(texts):
        if not t:
            raise ValueError(f"text {i} in batch is empty")
    raw = backend.embed(texts)
    if len(raw) != len(texts):
        raise ProtocolError(
            f"backend returned {len(raw)} vectors for {len(texts)} texts"
        )
    dims = {np.asarray(v).shape for v in raw}
    if len(dims) > 1:
        raise ProtocolError(f"backend dim mismatch across batch: {sorted(dims)}")
    return [l2_normalize(v) for v in raw]


# --- the store ---------------------------------------------------------------


@dataclass
class EmbeddingStore:
    """Unit-norm float32 matrix with a parallel id table.

    Immutable by convention after construction; validation happens here and
    at every (de)serialization boundary.
    """

    ids: list[str]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def count(self) -> int:
        return int(self.matrix.shape[0])

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2:
            raise InvariantError(f"matrix must be 2-D, got shape {self.matrix.shape}")
        if self.matrix.shape[1] < 1:
            raise InvariantError("store dim must be >= 1")
        if len(self.ids) != self.matrix.shape[0]:
            raise InvariantError(
                f"{len(self.ids)} ids for {self.matrix.shape[0]} rows"
            )

    def validate(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise InvariantError("store ids are not unique")
        if self.count:
            norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
            worst = float(np.max(np.abs(norms - 1.0)))
            if worst > NORM_TOL:
                raise InvariantError(
                    f"store rows are not unit-norm (worst |norm-1| = {worst:.2e})"
                )

    @classmethod
    def from_vectors(
        cls, ids: Sequence[str], vectors: Sequence[np.ndarray], dim: int | None = None
    ) -> "EmbeddingStore":
        """Build a validated store; dim is required when vectors is empty."""
        if len(vectors) == 0:
            if dim is None:
                raise InvariantError("empty store needs an explicit dim")
            store = cls(ids=list(ids), matrix=np.zeros((0, dim), dtype=np.float32))
        else:
            store = cls(ids=list(ids), matrix=np.vstack([np.asarray(v, dtype=np.float32) for v in vectors]))
        store.validate()
        return store

    def row_for(self, article_id: str) -> np.ndarray:
        return self.matrix[self.ids.index(article_id)]


def write_store(store: EmbeddingStore, path) -> None:
    """Persist a store; read_store(write_store(s)) is bit-exact on the floats."""
    store.validate()
    matrix = np.ascontiguousarray(store.matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, FORMAT_VERSION, store.dim, store.count))
        fh.write(matrix.tobytes())
        for article_id in store.ids:
            encoded = article_id.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)


def read_store(path, mmap: bool = False) -> EmbeddingStore:
    """Load a store, checking magic, version, sizes, id uniqueness, and norms.

    With mmap=True the matrix region stays on disk as a read-only map
    (norms are still verified, which touches every row once).
    """
    p = Path(path)
    try:
        size = p.stat().st_size
        fh = open(p, "rb")
    except OSError as e:
        raise FormatError(f"cannot open store {p}: {e}") from e

    with fh:
        header = fh.read(HEADER.size)
        if len(header) < HEADER.size:
            raise FormatError(f"store {p} truncated inside header")
        magic, version, dim, count = HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"store {p} has bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"store {p} has version {version}, expected {FORMAT_VERSION}")
        if dim < 1:
            raise FormatError(f"store {p} declares dim {dim}")

        matrix_bytes = count * dim * 4
        if size < HEADER.size + matrix_bytes:
            raise FormatError(f"store {p} truncated inside matrix region")
        if mmap and count:
            matrix = np.memmap(p, dtype="<f4", mode="r",
                               offset=HEADER.size, shape=(count, dim))
            fh.seek(HEADER.size + matrix_bytes)
        else:
            buf = fh.read(matrix_bytes)
            matrix = np.frombuffer(buf, dtype="<f4").reshape(count, dim).copy()

        ids = []
        for _ in range(count):
            raw_len = fh.read(4)
            if len(raw_len) < 4:
                raise FormatError(f"store {p} truncated inside id table")
            (id_len,) = struct.unpack("<I", raw_len)
            raw_id = fh.read(id_len)
            if len(raw_id) < id_len:
                raise FormatError(f"store {p} truncated inside id table")
            ids.append(raw_id.decode("utf-8"))
        if fh.read(1):
            raise FormatError(f"store {p} has trailing bytes after id table")

    store = EmbeddingStore(ids=ids, matrix=matrix)
    try:
        store.validate()
    except InvariantError as e:
        raise CorruptStoreError(f"store {p}: {e}") from e
    return store
