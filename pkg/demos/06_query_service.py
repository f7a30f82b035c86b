"""
The HTTP query service
======================

`ndv serve` wraps the query pipeline behind three endpoints:

    GET  /health          -> {"status", "index_total", "dim"}
    POST /search          -> masked-embed-search over the loaded index
    GET  /article/{id}    -> the full stored article

This demo drives the app in-process. Against a real deployment the same
requests work over the network, e.g.:

    ndv serve --stores store.ndjv --corpus corpus.jsonl --port 8080
    curl -s localhost:8080/search -X POST -H 'Content-Type: application/json' \
         -d '{"text": "a storm closed the harbor", "k": 3}'
"""

import json

import numpy as np
from fastapi.testclient import TestClient

from ndv import Article, build, mask_and_embed
from ndv.service import create_app

rng = np.random.default_rng(12)
corpus = [
    Article(f"doc-{i}", "gazette", f"19{10 + i:02d}-06-01",
            f"Edition {i}: John Smith reported from Paris that the harvest "
            f"of year 19{10 + i:02d} exceeded every forecast on record.",
            headline=f"Harvest news {i}")
    for i in range(8)
]
store = mask_and_embed(corpus)
app = create_app(flat_index=build([store]),
                 corpus={a.id: a for a in corpus})
client = TestClient(app)

print("health:", client.get("/health").json())

body = client.post("/search", json={"text": corpus[3].text, "k": 3}).json()
print("\nmasked query:", body["masked_query"][:70], "...")
print("hits:")
for hit in body["hits"]:
    print(f"  {hit['id']:8s} score={hit['score']:.3f} headline={hit['headline']!r}")

article = client.get(f"/article/{body['hits'][0]['id']}").json()
print("\nfull article for the top hit:")
print(json.dumps(article, indent=2)[:300])

print("\nvalidation examples:")
print("  k=0      ->", client.post("/search", json={"text": "x", "k": 0}).status_code)
print("  no text  ->", client.post("/search", json={"k": 1}).status_code)
print("  bad id   ->", client.get("/article/nope").status_code)
