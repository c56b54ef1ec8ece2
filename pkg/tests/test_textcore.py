import random
import unicodedata

import pytest

from noisekit import textcore
from noisekit.errors import Malformed
from noisekit.textcore import (
    NGRAM_JOIN,
    NoiseLabelSet,
    PunctuationTable,
    char_ngrams,
    normalize,
    tokenize,
    word_ngrams,
)

# Characters a fuzzer should mix: Latin, Bengali letters and signs, combining
# marks, odd whitespace, punctuation variants, emoji.
FUZZ_ALPHABET = (
    "ab z\t\n "
    "কাি্র"
    "é́"
    "‘’“—…"
    ".,?!।"
    "\U0001f600"
    + NGRAM_JOIN
)


def random_text(rng, max_len=40):
    return "".join(rng.choice(FUZZ_ALPHABET) for _ in range(rng.randint(0, max_len)))


class TestNormalize:
    def test_whitespace_collapse(self):
        assert normalize("a  b") == "a b"
        assert normalize(" a\t\nb ") == "a b"

    def test_identity_on_clean_input(self):
        assert normalize("abc") == "abc"

    def test_empty(self):
        assert normalize("") == ""
        assert normalize("   ") == ""

    def test_recomposes_decomposed_vowel_sign(self):
        # e + combining acute composes; Bengali e-kar + aa-kar composes to o-kar.
        assert normalize("é") == "é"
        assert normalize("কো") == "কো"

    def test_punctuation_canonicalized(self):
        assert normalize("‘a’ “b” — c…") == "'a' \"b\" - c."

    def test_ngram_join_stripped(self):
        assert normalize(f"a{NGRAM_JOIN}b") == "ab"

    def test_idempotent_fuzz(self):
        rng = random.Random(1)
        for _ in range(2000):
            text = random_text(rng)
            once = normalize(text)
            assert normalize(once) == once

    def test_custom_table_rejects_non_fixed_point(self):
        with pytest.raises(Malformed):
            PunctuationTable({"a": "b", "b": "c"})


class TestTokenize:
    def test_simple_split(self):
        assert tokenize("a b").tokens == ["a", "b"]

    def test_punct_split_off(self):
        assert tokenize("a, b").tokens == ["a", ",", "b"]
        assert tokenize("a,b").tokens == ["a", ",", "b"]

    def test_empty(self):
        assert tokenize("").tokens == []

    def test_combining_marks_stay_attached(self):
        seq = tokenize("ক্র x")
        assert seq.tokens == ["ক্র", "x"]

    def test_spans_fuzz(self):
        rng = random.Random(2)
        for _ in range(1500):
            text = random_text(rng)
            seq = tokenize(text)
            previous_start, previous_end = -1, 0
            for token, (start, end) in zip(seq.tokens, seq.spans):
                assert start > previous_start  # strictly increasing
                assert start >= previous_end  # non-overlapping
                assert end > start
                assert text[start:end] == token
                previous_start, previous_end = start, end
            # Non-whitespace content survives tokenization in order.
            assert "".join(seq.tokens) == "".join(ch for ch in text if not ch.isspace())


class TestCharNgrams:
    def test_examples(self):
        assert char_ngrams("ab", 1, 2) == ["a", "b", "ab"]
        assert char_ngrams("abc", 2, 2) == ["ab", "bc"]

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            char_ngrams("ab", 0, 2)
        with pytest.raises(ValueError):
            char_ngrams("ab", 3, 2)

    def test_count_formula_exhaustive(self):
        rng = random.Random(3)
        for length in range(0, 21):
            for _ in range(5):
                text = "".join(rng.choice("abক") for _ in range(length))
                grams = char_ngrams(text, 1, 4)
                expected = sum(max(0, length - n + 1) for n in range(1, 5))
                assert len(grams) == expected


class TestWordNgrams:
    def test_examples(self):
        assert word_ngrams(["a", "b"], 1, 2) == ["a", "b", f"a{NGRAM_JOIN}b"]
        assert word_ngrams(["a"], 2, 2) == []

    def test_accepts_token_sequence(self):
        seq = tokenize("a b")
        assert word_ngrams(seq, 1, 1) == ["a", "b"]

    def test_count_formula(self):
        rng = random.Random(4)
        for n_tokens in range(0, 12):
            tokens = [str(rng.randint(0, 5)) for _ in range(n_tokens)]
            grams = word_ngrams(tokens, 1, 3)
            expected = sum(max(0, n_tokens - n + 1) for n in range(1, 4))
            assert len(grams) == expected


class TestNoiseLabelSet:
    def test_bits_round_trip(self):
        bits = "0100000001"
        labels = NoiseLabelSet.from_bits(bits)
        assert labels.to_bits() == bits
        assert labels.names() == ("word_misuse", "others")
        assert "word_misuse" in labels

    def test_bad_bits(self):
        with pytest.raises(Malformed):
            NoiseLabelSet.from_bits("01")
        with pytest.raises(Malformed):
            NoiseLabelSet.from_bits("01000000x1")

    def test_from_names(self):
        labels = NoiseLabelSet.from_names(["mixed_language", "spelling_error"])
        assert labels.to_bits() == "0000100100"


def test_sentiment_order_is_tiebreak_order():
    order = [textcore.SentimentLabel.NEUTRAL, textcore.SentimentLabel.POSITIVE, textcore.SentimentLabel.NEGATIVE]
    assert [int(s) for s in order] == [0, 1, 2]
    assert textcore.SentimentLabel.from_name("positive").label == "positive"
