import math
import random

import numpy as np
import pytest

from noisekit.errors import EmptyCorpus, OffsetTooSmall
from noisekit.features import (
    AnalyzerConfig,
    AnalyzerMode,
    SparseVector,
    combine,
    fit_tfidf,
    from_json,
    to_json,
    transform,
)

WORD = AnalyzerConfig(mode=AnalyzerMode.WORD, n_min=1, n_max=1)


class TestFitTfidf:
    def test_single_document_idf_is_one(self):
        model = fit_tfidf(["hello"], WORD)
        assert model.idf[model.vocabulary["hello"]] == pytest.approx(1.0)

    def test_term_in_every_document_idf_is_one(self):
        model = fit_tfidf(["a x", "a y", "a z"], WORD)
        assert model.idf[model.vocabulary["a"]] == pytest.approx(1.0)

    def test_idf_formula(self):
        # N=4, df("rare")=1 -> ln(5/2) + 1
        model = fit_tfidf(["rare a", "a", "a", "a"], WORD)
        assert model.idf[model.vocabulary["rare"]] == pytest.approx(math.log(5 / 2) + 1, abs=1e-4)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            fit_tfidf([], WORD)

    def test_permutation_invariant(self):
        corpus = ["a b c", "b c d", "d e", "a a a"]
        one = fit_tfidf(corpus, WORD)
        rng = random.Random(5)
        for _ in range(5):
            shuffled = corpus[:]
            rng.shuffle(shuffled)
            other = fit_tfidf(shuffled, WORD)
            assert other.vocabulary == one.vocabulary
            assert np.array_equal(other.idf, one.idf)

    def test_idf_monotone_in_df(self):
        model = fit_tfidf(["a b", "a b", "a c", "a d"], WORD)
        df_order = ["a", "b", "c"]  # df 4, 2, 1
        idfs = [model.idf[model.vocabulary[t]] for t in df_order]
        assert idfs[0] < idfs[1] < idfs[2]

    def test_min_df_filters(self):
        config = AnalyzerConfig(mode=AnalyzerMode.WORD, n_min=1, n_max=1, min_df=2)
        model = fit_tfidf(["a b", "a c"], config)
        assert set(model.vocabulary) == {"a"}

    def test_char_plus_word_keeps_spaces_apart(self):
        config = AnalyzerConfig(mode=AnalyzerMode.CHAR_PLUS_WORD, n_min=1, n_max=1)
        model = fit_tfidf(["a b", "b b"], config)
        # char grams: 'a', 'b', ' '; word grams: 'a', 'b' -> five distinct features
        assert model.dim == 5

    def test_indices_dense_and_lexicographic(self):
        model = fit_tfidf(["b a", "c"], WORD)
        assert sorted(model.vocabulary.values()) == list(range(model.dim))
        ordered = sorted(model.vocabulary, key=model.vocabulary.get)
        assert ordered == sorted(ordered)


class TestTransform:
    def test_single_known_term(self):
        model = fit_tfidf(["hello", "other"], WORD)
        vec = transform(model, "hello")
        assert vec.entries == [(model.vocabulary["hello"], pytest.approx(1.0))]

    def test_all_unseen_terms_give_zero_vector(self):
        model = fit_tfidf(["hello"], WORD)
        vec = transform(model, "unknown words only")
        assert vec.nnz == 0
        assert vec.norm() == 0.0

    def test_two_equal_weight_terms(self):
        model = fit_tfidf(["a b", "a b"], WORD)
        vec = transform(model, "a b")
        assert vec.nnz == 2
        for _, weight in vec.entries:
            assert weight == pytest.approx(1 / math.sqrt(2))

    def test_norm_is_zero_or_one_fuzz(self):
        rng = random.Random(6)
        corpus = ["a b c d", "b c", "e f g", "a e"]
        model = fit_tfidf(corpus, AnalyzerConfig(mode=AnalyzerMode.CHAR, n_min=1, n_max=3))
        for _ in range(300):
            text = " ".join(rng.choice("abcdefgxyz") for _ in range(rng.randint(0, 8)))
            norm = transform(model, text).norm()
            assert norm == pytest.approx(0.0, abs=1e-9) or norm == pytest.approx(1.0, abs=1e-9)

    def test_indices_strictly_increasing(self):
        model = fit_tfidf(["a b c a b"], WORD)
        vec = transform(model, "c b a a")
        assert list(vec.indices) == sorted(set(vec.indices.tolist()))


class TestCombine:
    def test_zero_plus_vector_shifts(self):
        v = SparseVector.from_entries([(0, 0.6), (2, 0.8)])
        out = combine(SparseVector(), v, 10)
        assert out.entries == [(10, pytest.approx(0.6)), (12, pytest.approx(0.8))]

    def test_vector_plus_zero_keeps_unit_vector(self):
        v = SparseVector.from_entries([(0, 0.6), (2, 0.8)])
        out = combine(v, SparseVector(), 3)
        assert out.entries == [(0, pytest.approx(0.6)), (2, pytest.approx(0.8))]

    def test_two_unit_vectors(self):
        a = SparseVector.from_entries([(0, 1.0)])
        b = SparseVector.from_entries([(0, 0.6), (1, 0.8)])
        out = combine(a, b, 1)
        assert out.nnz == 3
        assert out.norm() == pytest.approx(1.0, abs=1e-9)

    def test_offset_too_small(self):
        a = SparseVector.from_entries([(0, 1.0), (4, 1.0)])
        with pytest.raises(OffsetTooSmall):
            combine(a, SparseVector.from_entries([(0, 1.0)]), 4)


class TestSerialization:
    def test_round_trip(self):
        config = AnalyzerConfig(mode=AnalyzerMode.CHAR_PLUS_WORD, n_min=1, n_max=2)
        model = fit_tfidf(["ab cd", "cd ef", "gh"], config)
        clone = from_json(to_json(model))
        assert clone.vocabulary == model.vocabulary
        assert np.array_equal(clone.idf, model.idf)
        assert clone.config == model.config
        assert clone.corpus_size == model.corpus_size
        # Transform parity on fresh text.
        assert transform(clone, "ab xy").entries == transform(model, "ab xy").entries

    def test_serialization_deterministic(self):
        model = fit_tfidf(["a b", "b c"], WORD)
        assert to_json(model) == to_json(fit_tfidf(["a b", "b c"], WORD))
