"""
Entity masking: BIO tags, span decoding, and the [MASK] token
=============================================================

Named entities are replaced by a literal "[MASK]" before embedding so the
retriever matches on how a story is told rather than on who it names. This
demo runs the deterministic stub tagger, decodes its BIO tags into spans,
masks them, and scores predictions span-level.
"""

from ndv import (
    EntitySpan,
    EntityClass,
    StubNerBackend,
    annotate,
    decode_bio,
    mask_spans,
    score_spans,
)

text = ("John Smith spoke in Paris yesterday. The delegates from New York "
        "City praised the harvest, and the Herald Tribune carried the story.")

# 1. Token-level BIO tags from the stub backend (capitalized-run heuristic
#    with a tiny gazetteer; a stand-in for a neural tagger).
[annotations] = annotate(StubNerBackend(), [text])
print("tokens and tags:")
for ann in annotations:
    if ann.tag != "O":
        print(f"  {ann.token:12s} {ann.tag}")

# 2. Decode maximal B-X (I-X)* runs into character spans.
spans = decode_bio(annotations)
print("\nspans:")
for span in spans:
    print(f"  [{span.start:3d},{span.end:3d})  {span.label.value:4s}  "
          f"{text[span.start:span.end]!r}")

# 3. Mask. Adjacent spans separated only by whitespace collapse into one
#    mask token, so a multi-word entity split by the tagger does not leak
#    its token count.
masked = mask_spans(text, spans, article_id="demo")
print("\nmasked text:\n ", masked.masked_text)
print("mask tokens:", masked.span_count)

# 4. Span-level scoring, exact boundaries. class_agnostic scores the task
#    that actually matters here: finding the right characters to mask.
gold = spans
pred = list(spans[:-1]) + [EntitySpan(spans[-1].start, spans[-1].end,
                                      EntityClass.MISC)]
strict = score_spans(gold, pred)
lenient = score_spans(gold, pred, class_agnostic=True)
print(f"\nscoring a slightly-off prediction:"
      f"\n  strict          P={strict.precision:.2f} R={strict.recall:.2f} "
      f"F1={strict.f1:.2f}"
      f"\n  class-agnostic  P={lenient.precision:.2f} R={lenient.recall:.2f} "
      f"F1={lenient.f1:.2f}")
