"""
The fused pipeline and the evaluation toolkit
=============================================

mask_and_embed chains NER -> mask -> embed; search_nearest_story adds
retrieval. Both are definitionally equal to running the stages by hand.
The eval side reproduces the scoring arithmetic: F1 from P/R, pairwise
same-story classification, hard-negative mining, and the topic-annotation
workflow.
"""

import tempfile
from pathlib import Path

import numpy as np

from ndv import (
    Article,
    ArticleMeta,
    PipelineConfig,
    StoryGroup,
    assemble_positive_pairs,
    export_annotation_sheet,
    f1_from_pr,
    mask_and_embed,
    mine_hard_negative,
    pairwise_classify,
    pairwise_prf,
    search_nearest_story,
    split_counts,
)

corpus = [
    Article("hist-1", "gazette", "1943-01-04",
            "The war production board limited ice cream output to half of "
            "October levels, citing the butter shortage."),
    Article("hist-2", "courier", "1939-04-11",
            "Tens of thousands jammed the lawn for the annual egg rolling, "
            "with bands, magicians, and children everywhere."),
    Article("hist-3", "herald", "1949-03-01",
            "The butter versus margarine battle opened in committee with "
            "claims of favoritism between one food and another."),
    Article("hist-4", "globe", "1946-04-04",
            "No more kitchen duty: mess attendants will be permanent "
            "assignments under the new program."),
]
query = Article("modern-1", "wire", "2024-03-13",
                "A dessert maker brings back its annual free cone day and "
                "hopes to serve a million scoops.")

# 1. Embed the corpus once, then retrieve for the query.
store = mask_and_embed(corpus)
print(f"corpus store: {store.count} rows, dim {store.dim}")
[(best_id, best_score)] = search_nearest_story(
    [query], PipelineConfig(k=1), corpus_embed=store
)[0:1][0]
print(f"nearest historical neighbor of {query.id}: {best_id} "
      f"(score {best_score:.3f})")

# 2. F1 arithmetic, in percent or fractions.
print("\nf1_from_pr(87.9, 93.1) =", round(f1_from_pr(87.9, 93.1), 1))
print("f1_from_pr(93.7, 91.1) =", round(f1_from_pr(93.7, 91.1), 1))

# 3. Pairwise same-story classification at a cosine threshold.
pairs = [(store.matrix[0], store.matrix[0]), (store.matrix[0], store.matrix[1])]
labels = pairwise_classify(pairs, threshold=0.5)
prf = pairwise_prf(labels, [True, False])
print(f"pairwise classification: labels={labels}  F1={prf.f1:.2f}")

# 4. Positive pairs from story groups; split bookkeeping.
groups = [StoryGroup("g1", ("hist-1", "hist-3", "hist-4")),
          StoryGroup("g2", ("hist-2", "hist-1"))]
positives = assemble_positive_pairs(groups)
print(f"\n{len(positives)} positive pairs from groups of 3 and 2")
print("split table:", split_counts(positives))

# 5. Hard negatives: closest pool member that shares no story/topic page,
#    preferring the anchor's own news source.
meta = {
    "hist-1": ArticleMeta("gazette", frozenset({"ice-cream"}), frozenset({"food"})),
    "hist-2": ArticleMeta("courier", frozenset({"egg-roll"}), frozenset({"holiday"})),
    "hist-3": ArticleMeta("herald", frozenset({"margarine"}), frozenset({"food"})),
    "hist-4": ArticleMeta("globe", frozenset({"kitchen"}), frozenset({"military"})),
}
negative = mine_hard_negative("hist-1", store, meta)
print("hard negative for hist-1:", negative)

# 6. Export an annotation sheet for human topic judgment.
workdir = Path(tempfile.mkdtemp(prefix="ndv-demo-"))
sheet = workdir / "sheet.csv"
hits = search_nearest_story([query], PipelineConfig(k=4), corpus_embed=store)
rows = export_annotation_sheet([query], hits, {a.id: a for a in corpus}, sheet, k=4)
print(f"\nannotation sheet with {rows} rows -> {sheet}")
print(sheet.read_text().splitlines()[0])
