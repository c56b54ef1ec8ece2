import math
import random
from functools import lru_cache

import numpy as np
import pytest

from noisekit.errors import EmptyInput, EmptyReference, InvalidCounts, LengthMismatch
from noisekit.metrics import (
    Averaging,
    ConfusionCounts,
    EmbeddingTable,
    EvalResources,
    ReductionReport,
    bleu,
    composite_similarity,
    evaluate_reduction,
    human_eval_score,
    prf,
    rouge_l,
    sentence_similarity,
    word_coverage,
)
from noisekit.textcore import NOISE_CLASSES, NoiseLabelSet

from conftest import random_word


class TestBleu:
    def test_identity(self):
        tokens = ["the", "cat", "sat"]
        assert bleu(tokens, tokens) == pytest.approx(1.0)

    def test_clipped_unigram_precision(self):
        candidate = ["the"] * 7
        reference = ["the", "cat", "is", "on", "the", "mat"]
        # Unigram-only score isolates clipping: 2/7, brevity penalty is 1.
        assert bleu(candidate, reference, max_n=1) == pytest.approx(2 / 7)

    def test_brevity_penalty(self):
        assert bleu(["a", "b"], ["a", "b", "c", "d"]) == pytest.approx(math.exp(-1.0), abs=1e-4)

    def test_order_capped_by_candidate_length(self):
        # Candidate of length 2 only uses orders 1 and 2; both perfect here.
        assert bleu(["a", "b"], ["a", "b"]) == pytest.approx(1.0)

    def test_empty_candidate_scores_zero(self):
        assert bleu([], ["a"]) == 0.0

    def test_empty_reference_rejected(self):
        with pytest.raises(EmptyReference):
            bleu(["a"], [])

    def test_accepts_strings(self):
        assert bleu("the cat", "the cat") == pytest.approx(1.0)

    def test_bounds_and_relabeling_fuzz(self):
        rng = random.Random(73)
        for _ in range(400):
            cand = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
            ref = [rng.choice("abcd") for _ in range(rng.randint(1, 8))]
            score = bleu(cand, ref)
            assert 0.0 <= score <= 1.0
            relabel = {"a": "w", "b": "x", "c": "y", "d": "z"}
            relabeled = bleu([relabel[t] for t in cand], [relabel[t] for t in ref])
            assert relabeled == pytest.approx(score)


@lru_cache(maxsize=None)
def lcs_recursive(a: tuple, b: tuple) -> int:
    if not a or not b:
        return 0
    if a[-1] == b[-1]:
        return 1 + lcs_recursive(a[:-1], b[:-1])
    return max(lcs_recursive(a[:-1], b), lcs_recursive(a, b[:-1]))


class TestRougeL:
    def test_identity(self):
        assert rouge_l(["a", "b", "c"], ["a", "b", "c"]) == pytest.approx(1.0)

    def test_disjoint(self):
        assert rouge_l(["a", "b"], ["c", "d"]) == 0.0

    def test_hand_case(self):
        assert rouge_l(["a", "b", "c"], ["a", "c", "b"]) == pytest.approx(2 / 3)

    def test_empty_sides(self):
        assert rouge_l([], ["a"]) == 0.0
        assert rouge_l(["a"], []) == 0.0

    def test_against_recursive_oracle_fuzz(self):
        rng = random.Random(79)
        for _ in range(200):
            cand = tuple(rng.choice("abc") for _ in range(rng.randint(0, 7)))
            ref = tuple(rng.choice("abc") for _ in range(rng.randint(0, 7)))
            lcs = lcs_recursive(cand, ref)
            p = lcs / len(cand) if cand else 0.0
            r = lcs / len(ref) if ref else 0.0
            expected = 2 * p * r / (p + r) if p + r else 0.0
            assert rouge_l(list(cand), list(ref)) == pytest.approx(expected)

    def test_relabeling_invariance(self):
        rng = random.Random(83)
        for _ in range(100):
            cand = [rng.choice("abc") for _ in range(rng.randint(1, 6))]
            ref = [rng.choice("abc") for _ in range(rng.randint(1, 6))]
            mapping = {"a": "xx", "b": "yy", "c": "zz"}
            assert rouge_l(cand, ref) == pytest.approx(
                rouge_l([mapping[t] for t in cand], [mapping[t] for t in ref])
            )


class TestWordCoverage:
    def test_all_known(self, latin_dict):
        assert word_coverage(["the", "cat"], latin_dict) == 100.0

    def test_half_known(self, latin_dict):
        assert word_coverage(["the", "cat", "zz", "qq"], latin_dict) == 50.0

    def test_punctuation_excluded(self, latin_dict):
        assert word_coverage(["the", ",", "!"], latin_dict) == 100.0

    def test_empty_input(self, latin_dict):
        with pytest.raises(EmptyInput):
            word_coverage([",", "!"], latin_dict)

    def test_adding_known_token_never_decreases(self, latin_dict):
        rng = random.Random(89)
        for _ in range(200):
            tokens = [random_word(rng) for _ in range(rng.randint(1, 6))]
            before = word_coverage(tokens, latin_dict)
            after = word_coverage(tokens + ["the"], latin_dict)
            assert after >= before - 1e-12


def small_table():
    return EmbeddingTable(
        dim=2,
        vectors={
            "cat": np.array([1.0, 0.0]),
            "dog": np.array([0.0, 1.0]),
            "pet": np.array([1.0, 1.0]),
        },
    )


class TestSentenceSimilarity:
    def test_identical_sentences(self):
        table = small_table()
        assert sentence_similarity(["cat", "dog"], ["cat", "dog"], table) == pytest.approx(1.0)

    def test_fully_oov_sides(self):
        table = small_table()
        assert sentence_similarity(["xx"], ["yy"], table) == 0.0
        assert sentence_similarity(["cat"], ["yy"], table) == 0.0

    def test_hand_computed_cosine(self):
        table = small_table()
        # mean(cat, dog) = (0.5, 0.5); cosine with pet (1, 1) = 1.
        assert sentence_similarity(["cat", "dog"], ["pet"], table) == pytest.approx(1.0)
        # cat vs dog are orthogonal.
        assert sentence_similarity(["cat"], ["dog"], table) == pytest.approx(0.0)

    def test_oov_words_skipped(self):
        table = small_table()
        assert sentence_similarity(["cat", "zz"], ["cat"], table) == pytest.approx(1.0)


class TestCompositeSimilarity:
    def test_perfect_case(self):
        for beta in (1.0, 4.0, 10.0):
            assert composite_similarity(1.0, 0.0, beta) == pytest.approx(1.0)

    def test_formula_evaluation(self):
        assert composite_similarity(0.8, 0.5, 4.0) == pytest.approx(5 / 7)

    def test_monotonicity_fuzz(self):
        rng = random.Random(97)
        for _ in range(400):
            semantic = rng.uniform(0.05, 1.0)
            surface = rng.uniform(0.0, 0.95)
            base = composite_similarity(semantic, surface)
            assert composite_similarity(min(semantic + 0.02, 1.0), surface) >= base - 1e-12
            assert composite_similarity(semantic, min(surface + 0.02, 0.999)) <= base + 1e-12

    def test_bounded_by_semantic_when_overlap_dominates(self):
        # The harmonic combination sits below the semantic term whenever
        # surface overlap >= 1 - semantic.
        rng = random.Random(101)
        for _ in range(300):
            semantic = rng.uniform(0.05, 1.0)
            surface = rng.uniform(1.0 - semantic, 1.0)
            assert composite_similarity(semantic, surface) <= semantic + 1e-12

    def test_full_overlap_drives_score_to_zero(self):
        assert composite_similarity(1.0, 1.0) < 1e-6


class TestHumanEval:
    def test_zero(self):
        assert human_eval_score(0, 1000) == 0.0

    def test_published_score(self):
        assert human_eval_score(379, 1000) == pytest.approx(37.90)

    def test_perfect(self):
        assert human_eval_score(25, 25) == 100.0

    def test_invalid_counts(self):
        for accurate, total in ((5, 0), (-1, 10), (11, 10)):
            with pytest.raises(InvalidCounts):
                human_eval_score(accurate, total)


class TestPrf:
    def test_micro_pooled(self):
        counts = ConfusionCounts(("a", "b"), tp=[5, 3], fp=[1, 1], fn=[1, 1])
        p, r, f1 = prf(counts, Averaging.MICRO)
        assert (p, r, f1) == (pytest.approx(0.8), pytest.approx(0.8), pytest.approx(0.8))

    def test_perfect_predictions(self):
        counts = ConfusionCounts(("a", "b"), tp=[4, 2], fp=[0, 0], fn=[0, 0])
        for avg in Averaging:
            assert prf(counts, avg) == (1.0, 1.0, 1.0)

    def test_no_positive_predictions(self):
        counts = ConfusionCounts(("a",), tp=[0], fp=[0], fn=[5])
        p, r, f1 = prf(counts, Averaging.MICRO)
        assert (p, r, f1) == (0.0, 0.0, 0.0)

    def test_micro_equals_macro_for_identical_classes(self):
        counts = ConfusionCounts(("a", "b", "c"), tp=[3, 3, 3], fp=[1, 1, 1], fn=[2, 2, 2])
        assert prf(counts, Averaging.MICRO) == pytest.approx(prf(counts, Averaging.MACRO))

    def test_weighted_uses_support(self):
        counts = ConfusionCounts(("a", "b"), tp=[9, 0], fp=[0, 1], fn=[0, 1])
        p_w, r_w, _ = prf(counts, Averaging.WEIGHTED)
        # Class a: support 9, perfect. Class b: support 1, zero scores.
        assert p_w == pytest.approx(0.9)
        assert r_w == pytest.approx(0.9)

    def test_from_multilabel(self):
        gold = [NoiseLabelSet.from_bits("1100000000"), NoiseLabelSet.from_bits("0100000000")]
        pred = [NoiseLabelSet.from_bits("1000000000"), NoiseLabelSet.from_bits("0100000001")]
        counts = ConfusionCounts.from_multilabel(gold, pred)
        assert counts.tp[0] == 1 and counts.fn[1] == 1 and counts.tp[1] == 1
        assert counts.fp[9] == 1

    def test_from_multilabel_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            ConfusionCounts.from_multilabel([NoiseLabelSet(1)], [])


class TestEvaluateReduction:
    def test_identical_outputs_score_one(self):
        truth = ["the cat sat", "a dog ran"]
        reports = evaluate_reduction({"identity": list(truth)}, truth)
        assert reports[0].bleu == pytest.approx(1.0)
        assert reports[0].rouge_l == pytest.approx(1.0)

    def test_composite_penalized_when_output_equals_input(self):
        table = small_table()
        inputs = ["cat dog", "pet cat"]
        truth = ["cat dog", "pet cat"]
        resources = EvalResources(inputs=inputs, embeddings=table)
        reports = evaluate_reduction({"noisy": list(inputs)}, truth, resources)
        report = reports[0]
        assert report.embedding_similarity == pytest.approx(1.0)
        assert report.composite < report.embedding_similarity

    def test_two_sentence_average(self):
        truth = ["a b", "c d"]
        outputs = {"m": ["a b", "c x"]}
        reports = evaluate_reduction(outputs, truth)
        per_sentence = [bleu("a b", "a b"), bleu("c x", "c d")]
        assert reports[0].bleu == pytest.approx(sum(per_sentence) / 2)
        rouge_per_sentence = [rouge_l("a b", "a b"), rouge_l("c x", "c d")]
        assert reports[0].rouge_l == pytest.approx(sum(rouge_per_sentence) / 2)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate_reduction({"m": ["a"]}, ["a", "b"])
        with pytest.raises(LengthMismatch):
            evaluate_reduction({"m": ["a", "b"]}, ["a", "b"], EvalResources(inputs=["a"]))

    def test_human_tallies_and_coverage(self, latin_dict):
        truth = ["the cat"]
        resources = EvalResources(
            coverage_vocab=latin_dict, human_tallies={"m": (379, 1000)}
        )
        report = evaluate_reduction({"m": ["the zz"]}, truth, resources)[0]
        assert report.word_coverage == pytest.approx(50.0)
        assert report.human_eval == pytest.approx(37.90)

    def test_reports_sorted_by_method(self):
        truth = ["a"]
        reports = evaluate_reduction({"z": ["a"], "a": ["a"], "m": ["a"]}, truth)
        assert [r.method for r in reports] == ["a", "m", "z"]


class TestReductionReportValidation:
    def test_range_check(self):
        with pytest.raises(InvalidCounts):
            ReductionReport(method="m", bleu=1.5)
        with pytest.raises(InvalidCounts):
            ReductionReport(method="m", word_coverage=-3.0)

    def test_valid_report(self):
        report = ReductionReport(method="m", bleu=0.5, embedding_similarity=-0.2)
        assert report.as_dict()["bleu"] == 0.5
