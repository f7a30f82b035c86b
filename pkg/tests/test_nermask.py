"""BIO decoding, masking, span scoring, stub tagger, and backend validation."""

from __future__ import annotations

import numpy as np
import pytest

from ndv.corpus import Article
from ndv.errors import AnnotationError, ProtocolError, SpanBoundsError, SpanOverlapError
from ndv.nermask import (
    MASK_TOKEN,
    EntityClass,
    EntitySpan,
    StubNerBackend,
    TokenAnnotation,
    annotate,
    decode_bio,
    encode_bio,
    entity_type_shares,
    mask_spans,
    score_spans,
    tokenize_ws,
)


def toks(text, tags):
    """Token annotations over a whitespace tokenization of text."""
    offsets = tokenize_ws(text)
    assert len(offsets) == len(tags)
    return [
        TokenAnnotation(token=t, start=s, end=e, tag=tag)
        for (t, s, e), tag in zip(offsets, tags)
    ]


class TestDecodeBio:
    def test_textbook_run(self):
        spans = decode_bio(toks("John Smith spoke", ["B-PER", "I-PER", "O"]))
        assert spans == [EntitySpan(0, 10, EntityClass.PER)]

    def test_b_starts_a_new_span(self):
        spans = decode_bio(toks("Smith Jones", ["B-PER", "B-PER"]))
        assert len(spans) == 2
        assert spans[0].end <= spans[1].start

    def test_dangling_i_repaired_to_b(self):
        spans = decode_bio(toks("in Paris", ["O", "I-LOC"]))
        assert spans == [EntitySpan(3, 8, EntityClass.LOC)]

    def test_class_switch_inside_run_repairs(self):
        spans = decode_bio(toks("Smith Paris", ["B-PER", "I-LOC"]))
        assert [s.label for s in spans] == [EntityClass.PER, EntityClass.LOC]

    def test_overlapping_tokens_rejected(self):
        bad = [
            TokenAnnotation("ab", 0, 2, "O"),
            TokenAnnotation("bc", 1, 3, "O"),
        ]
        with pytest.raises(AnnotationError):
            decode_bio(bad)

    def test_unknown_tag_rejected(self):
        with pytest.raises(AnnotationError):
            decode_bio([TokenAnnotation("x", 0, 1, "B-DATE")])

    def test_output_invariants_on_random_inputs(self):
        # Any legal tag sequence decodes to sorted, non-overlapping spans.
        rng = np.random.default_rng(42)
        tagset = ["O"] + [f"{p}-{c.value}" for p in "BI" for c in EntityClass]
        for _ in range(300):
            n = int(rng.integers(1, 15))
            text = " ".join("tok%d" % i for i in range(n))
            tags = [tagset[rng.integers(len(tagset))] for _ in range(n)]
            spans = decode_bio(toks(text, tags))
            for a, b in zip(spans, spans[1:]):
                assert a.end <= b.start
            for s in spans:
                assert s.start < s.end


class TestEncodeDecodeRoundTrip:
    def _random_valid_tags(self, rng, n):
        """BIO sequence with no dangling I (decode is then the exact inverse)."""
        tags = []
        prev_class = None
        for _ in range(n):
            choice = rng.integers(0, 3)
            if choice == 0 or prev_class is None and choice == 2:
                tags.append("O")
                prev_class = None
            elif choice == 1:
                cls = list(EntityClass)[rng.integers(4)]
                tags.append(f"B-{cls.value}")
                prev_class = cls
            else:
                tags.append(f"I-{prev_class.value}")
        return tags

    def test_decode_then_encode_is_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            n = int(rng.integers(1, 20))
            text = " ".join("w%d" % i for i in range(n))
            tags = self._random_valid_tags(rng, n)
            annotations = toks(text, tags)
            spans = decode_bio(annotations)
            offsets = [(a.start, a.end) for a in annotations]
            assert encode_bio(offsets, spans) == tags

    def test_encode_then_decode_is_identity(self):
        rng = np.random.default_rng(8)
        for _ in range(500):
            n = int(rng.integers(1, 20))
            text = " ".join("w%d" % i for i in range(n))
            offsets = [(s, e) for _, s, e in tokenize_ws(text)]
            # Random non-overlapping token-aligned spans.
            spans = []
            i = 0
            while i < n:
                if rng.random() < 0.4:
                    j = min(n - 1, i + int(rng.integers(0, 3)))
                    cls = list(EntityClass)[rng.integers(4)]
                    spans.append(EntitySpan(offsets[i][0], offsets[j][1], cls))
                    i = j + 1
                else:
                    i += 1
            tags = encode_bio(offsets, spans)
            decoded = decode_bio(toks(text, tags))
            assert decoded == spans


class TestMaskSpans:
    def test_two_disjoint_spans(self):
        text = "John Smith spoke in Paris"
        spans = [EntitySpan(0, 10, EntityClass.PER), EntitySpan(20, 25, EntityClass.LOC)]
        masked = mask_spans(text, spans)
        assert masked.masked_text == "[MASK] spoke in [MASK]"
        assert masked.span_count == 2

    def test_no_spans_is_identity(self):
        masked = mask_spans("nothing to hide", [])
        assert masked.masked_text == "nothing to hide"
        assert masked.span_count == 0

    def test_whitespace_adjacent_spans_collapse(self):
        text = "visited New York City today"
        spans = [EntitySpan(8, 16, EntityClass.LOC), EntitySpan(17, 21, EntityClass.LOC)]
        masked = mask_spans(text, spans)
        assert masked.masked_text == "visited [MASK] today"
        assert masked.span_count == 1
        assert masked.masked_text.count(MASK_TOKEN) == masked.span_count

    def test_touching_spans_collapse(self):
        text = "abcdef"
        spans = [EntitySpan(0, 3, EntityClass.MISC), EntitySpan(3, 6, EntityClass.MISC)]
        assert mask_spans(text, spans).masked_text == "[MASK]"

    def test_non_whitespace_gap_does_not_collapse(self):
        text = "Paris, Berlin"
        spans = [EntitySpan(0, 5, EntityClass.LOC), EntitySpan(7, 13, EntityClass.LOC)]
        masked = mask_spans(text, spans)
        assert masked.masked_text == "[MASK], [MASK]"

    def test_out_of_bounds_span(self):
        with pytest.raises(SpanBoundsError):
            mask_spans("short", [EntitySpan(2, 99, EntityClass.PER)])

    def test_overlapping_spans(self):
        with pytest.raises(SpanOverlapError):
            mask_spans("overlap here", [
                EntitySpan(0, 7, EntityClass.PER),
                EntitySpan(4, 11, EntityClass.LOC),
            ])

    def test_surface_strings_gone_non_span_text_intact(self):
        text = "Eleanor Swift praised the harvest near Boston docks"
        spans = [EntitySpan(0, 13, EntityClass.PER), EntitySpan(39, 45, EntityClass.LOC)]
        masked = mask_spans(text, spans)
        assert "Eleanor Swift" not in masked.masked_text
        assert "Boston" not in masked.masked_text
        assert " praised the harvest near " in masked.masked_text
        assert masked.masked_text.endswith(" docks")

    def test_unicode_offsets_are_code_points(self):
        text = "café owner Žofia Müller spoke"
        spans = [EntitySpan(11, 23, EntityClass.PER)]
        masked = mask_spans(text, spans)
        assert masked.masked_text == "café owner [MASK] spoke"


class TestScoreSpans:
    def test_perfect_match(self):
        gold = [EntitySpan(0, 4, EntityClass.PER), EntitySpan(8, 12, EntityClass.LOC)]
        prf = score_spans(gold, list(gold))
        assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_empty_pred_nonempty_gold(self):
        gold = [EntitySpan(i * 10, i * 10 + 4, EntityClass.PER) for i in range(4)]
        prf = score_spans(gold, [])
        assert (prf.precision, prf.recall, prf.f1) == (0.0, 0.0, 0.0)

    def test_both_empty_is_perfect(self):
        prf = score_spans([], [])
        assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_hand_enumerated_counts(self):
        # 4 gold, 3 pred, 2 exact-boundary matches (hand tally):
        # P = 2/3, R = 2/4, F1 = 2PR/(P+R) = 4/7.
        gold = [
            EntitySpan(0, 4, EntityClass.PER),
            EntitySpan(10, 14, EntityClass.LOC),
            EntitySpan(20, 24, EntityClass.ORG),
            EntitySpan(30, 34, EntityClass.MISC),
        ]
        pred = [
            EntitySpan(0, 4, EntityClass.PER),     # match
            EntitySpan(10, 14, EntityClass.LOC),   # match
            EntitySpan(40, 44, EntityClass.PER),   # spurious
        ]
        prf = score_spans(gold, pred)
        assert prf.precision == pytest.approx(2 / 3)
        assert prf.recall == pytest.approx(1 / 2)
        assert prf.f1 == pytest.approx(4 / 7)

    def test_class_agnostic_ignores_class(self):
        gold = [EntitySpan(0, 4, EntityClass.PER)]
        pred = [EntitySpan(0, 4, EntityClass.LOC)]
        assert score_spans(gold, pred).f1 == 0.0
        assert score_spans(gold, pred, class_agnostic=True).f1 == 1.0

    def test_swapping_gold_and_pred_swaps_p_and_r(self):
        rng = np.random.default_rng(11)
        classes = list(EntityClass)
        for _ in range(200):
            def random_spans():
                spans, pos = [], 0
                for _ in range(rng.integers(0, 6)):
                    pos += int(rng.integers(1, 5))
                    end = pos + int(rng.integers(1, 5))
                    spans.append(EntitySpan(pos, end, classes[rng.integers(4)]))
                    pos = end
                return spans

            gold, pred = random_spans(), random_spans()
            ab = score_spans(gold, pred)
            ba = score_spans(pred, gold)
            assert ab.precision == pytest.approx(ba.recall)
            assert ab.recall == pytest.approx(ba.precision)
            assert ab.f1 == pytest.approx(ba.f1)


class TestStubBackend:
    def test_golden_tag_sequence(self):
        [anns] = StubNerBackend().annotate_batch(["John Smith spoke"])
        assert [a.tag for a in anns] == ["B-PER", "I-PER", "O"]

    def test_single_capitalized_token_at_sentence_start_ignored(self):
        [anns] = StubNerBackend().annotate_batch(["The crowd cheered"])
        assert [a.tag for a in anns] == ["O", "O", "O"]

    def test_single_capitalized_token_mid_sentence_detected(self):
        [anns] = StubNerBackend().annotate_batch(["he visited Paris today"])
        assert [a.tag for a in anns] == ["O", "O", "B-LOC", "O"]

    def test_run_after_sentence_end_still_requires_two_tokens(self):
        [anns] = StubNerBackend().annotate_batch(["It rained. Nobody minded"])
        assert [a.tag for a in anns] == ["O", "O", "O", "O"]

    def test_gazetteer_assigns_class_default_misc(self):
        [anns] = StubNerBackend().annotate_batch(["meeting with Zorblax Prime tomorrow"])
        tags = [a.tag for a in anns]
        assert tags == ["O", "O", "B-MISC", "I-MISC", "O"]

    def test_batch_preserves_order_and_length(self):
        texts = ["John Smith spoke", "quiet day", "he visited Paris"]
        results = StubNerBackend().annotate_batch(texts)
        assert len(results) == 3
        assert [a.token for a in results[0]][:2] == ["John", "Smith"]

    def test_offsets_match_text(self):
        text = "Mary Ford of Boston said nothing"
        [anns] = StubNerBackend().annotate_batch([text])
        for a in anns:
            assert text[a.start:a.end] == a.token


class _FakeBackend:
    def __init__(self, replies):
        self.replies = replies

    def annotate_batch(self, texts):
        return self.replies


class TestAnnotate:
    def test_empty_batch(self):
        assert annotate(StubNerBackend(), []) == []

    def test_offsets_past_text_end_rejected(self):
        bad = _FakeBackend([[TokenAnnotation("xx", 0, 99, "O")]])
        with pytest.raises(ProtocolError):
            annotate(bad, ["ab"])

    def test_wrong_batch_length_rejected(self):
        bad = _FakeBackend([[]])
        with pytest.raises(ProtocolError):
            annotate(bad, ["a", "b"])

    def test_bad_tag_rejected(self):
        bad = _FakeBackend([[TokenAnnotation("ab", 0, 2, "B-XYZ")]])
        with pytest.raises(ProtocolError):
            annotate(bad, ["ab"])


class TestEntityTypeShares:
    def _article(self, year, text):
        return Article(id=f"a{year}-{abs(hash(text)) % 10_000}", source="s",
                       date=f"{year}-01-01", text=text)

    def test_direct_ratio(self):
        text = "one two three four five six seven eight John Smith"
        art = self._article(1920, text)
        [anns] = StubNerBackend().annotate_batch([text])
        shares = entity_type_shares([(art, anns)])
        assert shares[1920][EntityClass.PER] == pytest.approx(0.2)
        assert shares[1920][EntityClass.LOC] == 0.0

    def test_no_entities_all_zero(self):
        art = self._article(1930, "nothing capitalized here at all")
        [anns] = StubNerBackend().annotate_batch([art.text])
        shares = entity_type_shares([(art, anns)])
        assert all(v == 0.0 for v in shares[1930].values())

    def test_two_year_corpus_two_rows(self):
        a = self._article(1920, "plain words only")
        b = self._article(1940, "more plain words")
        backend = StubNerBackend()
        annotated = [(art, backend.annotate_batch([art.text])[0]) for art in (a, b)]
        shares = entity_type_shares(annotated)
        assert sorted(shares) == [1920, 1940]

    def test_shares_sum_at_most_one(self):
        rng = np.random.default_rng(3)
        from conftest import make_article

        backend = StubNerBackend()
        annotated = []
        for i in range(10):
            art = make_article(i, rng, year=1915)
            annotated.append((art, backend.annotate_batch([art.text])[0]))
        shares = entity_type_shares(annotated)
        assert sum(shares[1915].values()) <= 1.0 + 1e-12
