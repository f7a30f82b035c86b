"""Command-line interface: every pipeline stage as a verb, plus eval and serve.

Stages communicate through files (JSONL and .ndjv stores) rather than only
in memory, so any stage of a long run can be resumed from its inputs.

    ndv download            materialize a manifest subset as JSONL
    ndv ner                 annotate articles with a NER backend
    ndv mask                mask annotated entities
    ndv embed               embed masked text into a vector store
    ndv search              exact top-k over one or more stores
    ndv mask-and-embed      fused ner+mask+embed
    ndv search-nearest-story  fused query pipeline against a store
    ndv eval ...            evaluation utilities
    ndv serve               run the HTTP query service

Global flags: --config <file.toml|file.json> supplies defaults for options,
--seed reserves a reproducibility knob threaded into the pipeline config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evalkit
from . import index as index_mod
from . import nermask
from . import pipeline
from .embed import STUB_DIM, EmbeddingStore, read_store, write_store
from .errors import NdvError

CONFIG_KEYS = (
    "ner_backend",
    "embed_backend",
    "model_name",
    "ner_model_name",
    "k",
    "ner_batch_size",
    "embed_batch_size",
    "embed_dim",
    "max_chars",
)


def load_config_file(path) -> dict:
    p = Path(path)
    text = p.read_bytes()
    if p.suffix == ".json":
        return json.loads(text)
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:  # tomllib ships with Python 3.11+
            raise SystemExit(
                "TOML config requires Python >= 3.11; use a JSON config here"
            )
        return tomllib.loads(text.decode("utf-8"))
    raise SystemExit(f"config {p} must end in .json or .toml")


def build_pipeline_config(args, file_cfg: dict) -> pipeline.PipelineConfig:
    """CLI flags beat config-file values beat dataclass defaults."""
    kwargs = {}
    for key in CONFIG_KEYS:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            kwargs[key] = flag_val
        elif key in file_cfg:
            kwargs[key] = file_cfg[key]
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    return pipeline.PipelineConfig(**kwargs)


def _write_jsonl(path, rows) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def _read_jsonl(path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return rows


def _read_stores(spec: str) -> list[EmbeddingStore]:
    return [read_store(p) for p in spec.split(",") if p]


# --- command handlers ---------------------------------------------------------


def cmd_download(args, cfg):
    report = corpus_mod.StreamReport()
    articles = corpus_mod.download(
        args.spec, args.manifest, out=args.out, report=report
    )
    print(
        f"wrote {len(articles)} articles to {Path(args.out) / 'corpus.jsonl'} "
        f"({report.skipped} invalid rows skipped)"
    )
    return 0


def cmd_ner(args, cfg):
    articles = corpus_mod.read_articles_jsonl(args.in_path)
    annotations = pipeline.ner(
        articles, backend=cfg.ner_backend, batch_size=cfg.ner_batch_size
    )
    rows = (
        {
            "id": art.id,
            "text": art.text,
            "annotations": [nermask.annotation_to_dict(a) for a in anns],
        }
        for art, anns in zip(articles, annotations)
    )
    n = _write_jsonl(args.out, rows)
    print(f"annotated {n} articles -> {args.out}")
    return 0


def cmd_mask(args, cfg):
    rows = _read_jsonl(args.in_path)
    out_rows = []
    for row in rows:
        anns = [nermask.annotation_from_dict(d) for d in row["annotations"]]
        spans = nermask.decode_bio(anns)
        masked = nermask.mask_spans(row["text"], spans, article_id=row["id"])
        out_rows.append(
            {
                "id": masked.id,
                "masked_text": masked.masked_text,
                "span_count": masked.span_count,
            }
        )
    n = _write_jsonl(args.out, out_rows)
    print(f"masked {n} articles -> {args.out}")
    return 0


def cmd_embed(args, cfg):
    rows = _read_jsonl(args.in_path)
    masked = [
        nermask.MaskedArticle(
            id=row["id"],
            masked_text=row["masked_text"],
            span_count=int(row.get("span_count", 0)),
        )
        for row in rows
    ]
    store = pipeline.embed(
        masked,
        backend=cfg.embed_backend,
        model=cfg.model_name,
        batch_size=cfg.embed_batch_size,
        dim=cfg.embed_dim,
        max_chars=cfg.max_chars,
    )
    write_store(store, args.out)
    print(f"embedded {store.count} texts (dim {store.dim}) -> {args.out}")
    return 0


def cmd_search(args, cfg):
    idx = index_mod.build(_read_stores(args.store))
    query_store = read_store(args.query_store)
    k = args.k if args.k is not None else cfg.k
    per_query = index_mod.search_batch(idx, query_store.matrix, k)
    rows = (
        {"query_id": qid, "rank": rank, "id": hit.id, "score": hit.score}
        for qid, hits in zip(query_store.ids, per_query)
        for rank, hit in enumerate(hits, start=1)
    )
    n = _write_jsonl(args.out, rows)
    print(f"searched {len(per_query)} queries, wrote {n} hits -> {args.out}")
    return 0


def cmd_mask_and_embed(args, cfg):
    articles = corpus_mod.read_articles_jsonl(args.in_path)
    store = pipeline.mask_and_embed(articles, cfg)
    write_store(store, args.out)
    print(f"masked+embedded {store.count} articles (dim {store.dim}) -> {args.out}")
    return 0


def cmd_search_nearest_story(args, cfg):
    queries = corpus_mod.read_articles_jsonl(args.queries)
    stores = _read_stores(args.store)
    idx = index_mod.build(stores)
    # Reuse the fused pipeline against the merged shards via a single store
    # view when more than one shard is given.
    if len(stores) == 1:
        corpus_store = stores[0]
    else:
        import numpy as np

        corpus_store = EmbeddingStore(
            ids=idx.ids, matrix=np.vstack([s.matrix for s in stores])
        )
    if args.k is not None:
        cfg.k = args.k
    results = pipeline.search_nearest_story(queries, cfg, corpus_embed=corpus_store)
    rows = (
        {"query_id": q.id, "rank": rank, "id": hit_id, "score": score}
        for q, hits in zip(queries, results)
        for rank, (hit_id, score) in enumerate(hits, start=1)
    )
    n = _write_jsonl(args.out, rows)
    print(f"retrieved for {len(queries)} queries, wrote {n} hits -> {args.out}")
    return 0


def cmd_eval_f1(args, cfg):
    print(f"{evalkit.f1_from_pr(args.p, args.r):.4f}")
    return 0


def _read_labels(path) -> list[bool]:
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if not line:
            continue
        if line in ("1", "true", "positive"):
            labels.append(True)
        elif line in ("0", "false", "negative"):
            labels.append(False)
        else:
            raise SystemExit(f"{path}: unknown label {line!r}")
    return labels


def cmd_eval_pairs(args, cfg):
    prf = evalkit.pairwise_prf(_read_labels(args.pred), _read_labels(args.gold))
    print(f"precision={prf.precision:.4f} recall={prf.recall:.4f} f1={prf.f1:.4f}")
    return 0


def cmd_eval_mine_negatives(args, cfg):
    pool = read_store(args.pool)
    meta = {
        row["id"]: evalkit.ArticleMeta(
            source=row["source"],
            story_ids=frozenset(row.get("story_ids", [])),
            topic_page_ids=frozenset(row.get("topic_page_ids", [])),
        )
        for row in _read_jsonl(args.meta)
    }
    anchors = [
        line.strip()
        for line in Path(args.anchors).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    out_rows = []
    for anchor in anchors:
        negative = evalkit.mine_hard_negative(anchor, pool, meta)
        out_rows.append({"anchor": anchor, "negative": negative})
    if args.out:
        _write_jsonl(args.out, out_rows)
        print(f"mined {len(out_rows)} negatives -> {args.out}")
    else:
        for row in out_rows:
            print(f"{row['anchor']}\t{row['negative']}")
    return 0


def cmd_eval_topic_rate(args, cfg):
    records = evalkit.read_annotation_sheet(args.sheet)
    print(f"{evalkit.topic_match_rate(records):.4f}")
    return 0


def cmd_eval_export_sheet(args, cfg):
    queries = corpus_mod.read_articles_jsonl(args.queries)
    corpus = {a.id: a for a in corpus_mod.read_articles_jsonl(args.corpus)}
    hits_by_query: dict[str, list[tuple[str, float]]] = {}
    for row in _read_jsonl(args.hits):
        hits_by_query.setdefault(row["query_id"], []).append(
            (row["id"], float(row["score"]))
        )
    ordered_hits = [hits_by_query.get(q.id, []) for q in queries]
    n = evalkit.export_annotation_sheet(
        queries, ordered_hits, corpus, args.out, k=args.k
    )
    print(f"wrote {n} annotation rows -> {args.out}")
    return 0


def cmd_serve(args, cfg):
    import uvicorn

    from .service import create_app

    stores = _read_stores(args.stores)
    idx = index_mod.build(stores)
    corpus = {a.id: a for a in corpus_mod.read_articles_jsonl(args.corpus)}
    app = create_app(flat_index=idx, corpus=corpus, config=cfg)
    print(f"serving {idx.total} articles (dim {idx.dim}) on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# --- parser -------------------------------------------------------------------


def _add_backend_flags(p: argparse.ArgumentParser, which=("ner", "embed")):
    if "ner" in which:
        p.add_argument("--ner-backend", dest="ner_backend", help="'stub' or a URL")
        p.add_argument("--ner-batch-size", dest="ner_batch_size", type=int)
    if "embed" in which:
        p.add_argument("--embed-backend", dest="embed_backend", help="'stub' or a URL")
        p.add_argument("--embed-batch-size", dest="embed_batch_size", type=int)
        p.add_argument("--model", dest="model_name", help="embedding model name")
        p.add_argument("--dim", dest="embed_dim", type=int,
                       help=f"stub embedding dim (default {STUB_DIM})")
        p.add_argument("--max-chars", dest="max_chars", type=int,
                       help="truncate masked text before embedding")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ndv", description="Entity-masked semantic search over news corpora."
    )
    parser.add_argument("--config", help="TOML/JSON file with option defaults")
    parser.add_argument("--seed", type=int, help="reproducibility seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("download", help="materialize a manifest subset as JSONL")
    p.add_argument("--spec", required=True, help="dataset[:years[:states]]")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_download)

    p = sub.add_parser("ner", help="annotate articles")
    p.add_argument("--in", dest="in_path", required=True, help="corpus JSONL")
    p.add_argument("--backend", dest="ner_backend", help="'stub' or a URL")
    p.add_argument("--batch-size", dest="ner_batch_size", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_ner)

    p = sub.add_parser("mask", help="mask annotated entities")
    p.add_argument("--in", dest="in_path", required=True, help="ner JSONL")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_mask)

    p = sub.add_parser("embed", help="embed masked articles into a store")
    p.add_argument("--in", dest="in_path", required=True, help="masked JSONL")
    p.add_argument("--backend", dest="embed_backend", help="'stub' or a URL")
    p.add_argument("--batch-size", dest="embed_batch_size", type=int)
    p.add_argument("--model", dest="model_name")
    p.add_argument("--dim", dest="embed_dim", type=int)
    p.add_argument("--max-chars", dest="max_chars", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("search", help="exact top-k over stores")
    p.add_argument("--store", required=True, help="store path(s), comma-separated")
    p.add_argument("--query-store", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--out", required=True, help="hits JSONL")
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("mask-and-embed", help="fused ner+mask+embed")
    p.add_argument("--in", dest="in_path", required=True, help="corpus JSONL")
    p.add_argument("--out", required=True, help="output store")
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_mask_and_embed)

    p = sub.add_parser("search-nearest-story", help="fused query pipeline")
    p.add_argument("--queries", required=True, help="query articles JSONL")
    p.add_argument("--store", required=True, help="corpus store path(s)")
    p.add_argument("--k", type=int)
    p.add_argument("--out", required=True, help="hits JSONL")
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_search_nearest_story)

    pe = sub.add_parser("eval", help="evaluation utilities")
    esub = pe.add_subparsers(dest="eval_command", required=True)

    p = esub.add_parser("f1", help="harmonic mean of precision and recall")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.set_defaults(handler=cmd_eval_f1)

    p = esub.add_parser("pairs", help="P/R/F1 over label files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(handler=cmd_eval_pairs)

    p = esub.add_parser("mine-negatives", help="hard negatives from a pool store")
    p.add_argument("--pool", required=True, help="pool store")
    p.add_argument("--meta", required=True, help="JSONL: id, source, story_ids, topic_page_ids")
    p.add_argument("--anchors", required=True, help="one anchor id per line")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval_mine_negatives)

    p = esub.add_parser("topic-rate", help="share of on-topic pairs in a sheet")
    p.add_argument("--sheet", required=True)
    p.set_defaults(handler=cmd_eval_topic_rate)

    p = esub.add_parser("export-sheet", help="CSV sheet for topic annotation")
    p.add_argument("--hits", required=True, help="hits JSONL from ndv search")
    p.add_argument("--queries", required=True, help="query articles JSONL")
    p.add_argument("--corpus", required=True, help="corpus articles JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(handler=cmd_eval_export_sheet)

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--stores", required=True, help="store path(s), comma-separated")
    p.add_argument("--corpus", required=True, help="corpus articles JSONL")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    file_cfg = load_config_file(args.config) if args.config else {}
    cfg = build_pipeline_config(args, file_cfg)
    try:
        return args.handler(args, cfg)
    except NdvError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
