"""
Embeddings: unit vectors and the bit-exact binary store
=======================================================

Every vector is L2-normalized at the backend boundary, which makes the
inner product the index uses equal to cosine similarity. Stores persist a
float32 matrix plus an id table in a little-endian format whose matrix
region sits at a fixed offset, so large stores can be memory-mapped.
"""

import tempfile
from pathlib import Path

import numpy as np

from ndv import StubEmbedBackend, embed_batch, l2_normalize, read_store, write_store
from ndv.embed import EmbeddingStore

# 1. Normalization: [3, 4] becomes the 3-4-5 unit vector.
print("l2_normalize([3, 4]) =", l2_normalize([3.0, 4.0]))

# 2. The stub embedder hashes lowercase unigrams and bigrams into buckets
#    (FNV-1a, sign from the top hash bit). Deterministic and cheap; lexical
#    overlap moves cosine the way you would expect.
backend = StubEmbedBackend(dim=256)
texts = [
    "the storm flooded the harbor overnight",
    "the storm flooded the harbor again",
    "parliament debated the new tax bill",
]
vectors = embed_batch(backend, texts)
sim = lambda a, b: float(np.dot(a, b))
print("\ncosine(similar texts)  =", round(sim(vectors[0], vectors[1]), 4))
print("cosine(unrelated text) =", round(sim(vectors[0], vectors[2]), 4))

# 3. Inner product on unit vectors IS cosine on the raw vectors.
raw_a, raw_b = np.array([3.0, 1.0, -2.0]), np.array([1.0, 4.0, 0.5])
cos_raw = float(np.dot(raw_a, raw_b) / (np.linalg.norm(raw_a) * np.linalg.norm(raw_b)))
ip_unit = float(np.dot(l2_normalize(raw_a), l2_normalize(raw_b)))
print(f"\ncosine(raw)={cos_raw:.6f}  inner(normalized)={ip_unit:.6f}")

# 4. Store round trip is bit-exact on the matrix bytes.
workdir = Path(tempfile.mkdtemp(prefix="ndv-demo-"))
store = EmbeddingStore(ids=[f"t{i}" for i in range(3)], matrix=np.vstack(vectors))
path = workdir / "demo.ndjv"
write_store(store, path)
loaded = read_store(path)
print("\nstore header bytes:", path.read_bytes()[:4], "| rows:", loaded.count,
      "| dim:", loaded.dim)
print("round trip bit-exact:", loaded.matrix.tobytes() == store.matrix.tobytes())

# 5. Reads validate everything; a flipped magic byte is rejected outright.
corrupt = bytearray(path.read_bytes())
corrupt[0] = ord("X")
bad_path = workdir / "corrupt.ndjv"
bad_path.write_bytes(bytes(corrupt))
try:
    read_store(bad_path)
except Exception as err:
    print(f"corrupted file -> {type(err).__name__}: {err}")
