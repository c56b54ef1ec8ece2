"""Evaluation machinery for noise reduction and classification.

Text-overlap metrics (BLEU, ROUGE-L), embedding-cosine sentence similarity,
a composite score that rewards semantic similarity while penalizing surface
overlap with the noisy input, word coverage, the human-evaluation tally and
micro/macro/weighted precision-recall-F1.

Corpus-level overlap scores are means of sentence-level scores.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import textcore
from .errors import (
    EmptyInput,
    EmptyReference,
    InvalidCounts,
    LengthMismatch,
    Malformed,
)

EPSILON = 1e-9


def _tokens(value) -> list[str]:
    """Accept a TokenSequence, a list of tokens, or a raw string."""
    if isinstance(value, textcore.TokenSequence):
        return list(value.tokens)
    if isinstance(value, str):
        return list(textcore.tokenize(value).tokens)
    return list(value)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate, reference, max_n: int = 4) -> float:
    """Geometric mean of clipped n-gram precisions times the brevity penalty.

    Zero precisions are floored at a tiny epsilon instead of zeroing the
    whole score; an empty candidate scores 0.
    """
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not ref:
        raise EmptyReference("BLEU needs a non-empty reference")
    if not cand:
        return 0.0
    log_sum = 0.0
    orders = range(1, min(max_n, len(cand)) + 1)
    for n in orders:
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = len(cand) - n + 1
        precision = clipped / total
        log_sum += math.log(max(precision, EPSILON))
    brevity = math.exp(min(0.0, 1.0 - len(ref) / len(cand)))
    return brevity * math.exp(log_sum / len(orders))


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l(candidate, reference) -> float:
    """LCS-based F-score over word tokens."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def word_coverage(tokens, vocab) -> float:
    """Percentage of word tokens found in the vocabulary; punctuation excluded."""
    words = [t for t in _tokens(tokens) if not textcore.is_punct_token(t)]
    if not words:
        raise EmptyInput("word coverage needs at least one word token")
    known = sum(1 for t in words if t in vocab)
    return 100.0 * known / len(words)


@dataclass
class EmbeddingTable:
    """Fixed-dimension word vectors; lookup by exact token."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        for word, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise Malformed(f"vector for {word!r} has length {vec.shape}, expected {self.dim}")
            if np.isnan(vec).any():
                raise Malformed(f"vector for {word!r} contains NaN")

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def sentence_similarity(candidate, reference, table: EmbeddingTable) -> float:
    """Cosine of mean word vectors, skipping OOV words; 0 when a side is fully OOV."""
    sides = []
    for value in (candidate, reference):
        vecs = [table.vectors[t] for t in _tokens(value) if t in table]
        if not vecs:
            return 0.0
        sides.append(np.mean(vecs, axis=0))
    a, b = sides
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b) / norm)


def composite_similarity(semantic: float, surface_bleu: float, beta: float = 4.0) -> float:
    """Weighted harmonic mean of semantic similarity and (1 - surface overlap).

    High surface overlap with the noisy input drags the score down even when
    the semantic term is perfect. Inputs are clamped away from the
    singularities.
    """
    semantic = min(max(semantic, EPSILON), 1.0)
    inverse_overlap = max(1.0 - surface_bleu, EPSILON)
    return (beta + 1.0) / (beta / semantic + 1.0 / inverse_overlap)


def human_eval_score(accurate: int, total: int) -> float:
    """Percentage of outputs judged accurate out of the evaluated total."""
    if total <= 0 or not 0 <= accurate <= total:
        raise InvalidCounts(f"need 0 <= accurate <= total with total > 0, got {accurate}/{total}")
    return 100.0 * accurate / total


@dataclass
class ConfusionCounts:
    """Per-class true-positive / false-positive / false-negative tallies."""

    class_names: tuple[str, ...]
    tp: list[int]
    fp: list[int]
    fn: list[int]

    def __post_init__(self):
        lengths = {len(self.class_names), len(self.tp), len(self.fp), len(self.fn)}
        if len(lengths) != 1:
            raise LengthMismatch("confusion count columns differ in length")
        if any(v < 0 for col in (self.tp, self.fp, self.fn) for v in col):
            raise InvalidCounts("confusion counts must be non-negative")

    @classmethod
    def from_multilabel(cls, gold, predicted) -> "ConfusionCounts":
        if len(gold) != len(predicted):
            raise LengthMismatch(f"{len(gold)} gold rows vs {len(predicted)} predictions")
        k = len(textcore.NOISE_CLASSES)
        tp, fp, fn = [0] * k, [0] * k, [0] * k
        for g, p in zip(gold, predicted):
            for j in range(k):
                if p.has(j) and g.has(j):
                    tp[j] += 1
                elif p.has(j):
                    fp[j] += 1
                elif g.has(j):
                    fn[j] += 1
        return cls(textcore.NOISE_CLASSES, tp, fp, fn)

    @classmethod
    def from_multiclass(cls, gold, predicted, class_names) -> "ConfusionCounts":
        if len(gold) != len(predicted):
            raise LengthMismatch(f"{len(gold)} gold rows vs {len(predicted)} predictions")
        k = len(class_names)
        tp, fp, fn = [0] * k, [0] * k, [0] * k
        for g, p in zip(gold, predicted):
            g, p = int(g), int(p)
            if g == p:
                tp[g] += 1
            else:
                fp[p] += 1
                fn[g] += 1
        return cls(tuple(class_names), tp, fp, fn)


class Averaging(enum.Enum):
    MICRO = "micro"
    MACRO = "macro"
    WEIGHTED = "weighted"


def _prf_one(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def prf(counts: ConfusionCounts, averaging: Averaging) -> tuple[float, float, float]:
    """Precision, recall and F1 under the chosen averaging; 0/0 counts as 0."""
    if averaging is Averaging.MICRO:
        return _prf_one(sum(counts.tp), sum(counts.fp), sum(counts.fn))
    per_class = [_prf_one(t, f, n) for t, f, n in zip(counts.tp, counts.fp, counts.fn)]
    if averaging is Averaging.MACRO:
        k = len(per_class)
        return tuple(sum(scores[i] for scores in per_class) / k for i in range(3))
    support = [t + n for t, n in zip(counts.tp, counts.fn)]
    total = sum(support)
    if total == 0:
        return 0.0, 0.0, 0.0
    return tuple(
        sum(s * scores[i] for s, scores in zip(support, per_class)) / total for i in range(3)
    )


@dataclass
class ReductionReport:
    """Corpus-averaged scores of one reduction method against the ground truth."""

    method: str
    bleu: float | None = None
    rouge_l: float | None = None
    word_coverage: float | None = None
    embedding_similarity: float | None = None
    composite: float | None = None
    human_eval: float | None = None

    _RANGES = {
        "bleu": (0.0, 1.0),
        "rouge_l": (0.0, 1.0),
        "word_coverage": (0.0, 100.0),
        "embedding_similarity": (-1.0, 1.0),
        "composite": (0.0, 1.0),
        "human_eval": (0.0, 100.0),
    }

    def __post_init__(self):
        for name, (low, high) in self._RANGES.items():
            value = getattr(self, name)
            if value is not None and not low - EPSILON <= value <= high + EPSILON:
                raise InvalidCounts(f"{name} score {value} outside [{low}, {high}]")

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "bleu": self.bleu,
            "rouge_l": self.rouge_l,
            "word_coverage": self.word_coverage,
            "embedding_similarity": self.embedding_similarity,
            "composite": self.composite,
            "human_eval": self.human_eval,
        }


@dataclass
class EvalResources:
    """Optional inputs for reduction scoring.

    ``inputs`` are the original noisy sentences (needed for the composite
    self-overlap penalty); ``coverage_vocab`` falls back to the embedding
    table when unset; ``human_tallies`` maps method -> (accurate, total).
    """

    inputs: list[str] | None = None
    embeddings: EmbeddingTable | None = None
    coverage_vocab: object | None = None
    human_tallies: dict[str, tuple[int, int]] = field(default_factory=dict)


def evaluate_reduction(outputs: dict[str, list[str]], ground_truth: list[str], resources: EvalResources | None = None) -> list[ReductionReport]:
    """Score each method's outputs against the manually corrected references."""
    if resources is None:
        resources = EvalResources()
    truth_tokens = [_tokens(t) for t in ground_truth]
    input_tokens = None
    if resources.inputs is not None:
        if len(resources.inputs) != len(ground_truth):
            raise LengthMismatch(
                f"{len(resources.inputs)} inputs vs {len(ground_truth)} references"
            )
        input_tokens = [_tokens(t) for t in resources.inputs]
    vocab = resources.coverage_vocab if resources.coverage_vocab is not None else resources.embeddings

    reports = []
    for method in sorted(outputs):
        sentences = outputs[method]
        if len(sentences) != len(ground_truth):
            raise LengthMismatch(
                f"method {method}: {len(sentences)} outputs vs {len(ground_truth)} references"
            )
        bleu_scores, rouge_scores, semantic_scores, composite_scores = [], [], [], []
        all_tokens: list[str] = []
        for i, sentence in enumerate(sentences):
            out_tokens = _tokens(sentence)
            all_tokens.extend(out_tokens)
            bleu_scores.append(bleu(out_tokens, truth_tokens[i]))
            rouge_scores.append(rouge_l(out_tokens, truth_tokens[i]))
            if resources.embeddings is not None:
                semantic = sentence_similarity(out_tokens, truth_tokens[i], resources.embeddings)
                semantic_scores.append(semantic)
                if input_tokens is not None:
                    surface = bleu(out_tokens, input_tokens[i])
                    composite_scores.append(composite_similarity(semantic, surface))
        coverage = None
        if vocab is not None and any(not textcore.is_punct_token(t) for t in all_tokens):
            coverage = word_coverage(all_tokens, vocab)
        human = None
        if method in resources.human_tallies:
            accurate, total = resources.human_tallies[method]
            human = human_eval_score(accurate, total)
        reports.append(
            ReductionReport(
                method=method,
                bleu=float(np.mean(bleu_scores)),
                rouge_l=float(np.mean(rouge_scores)),
                word_coverage=coverage,
                embedding_similarity=float(np.mean(semantic_scores)) if semantic_scores else None,
                composite=float(np.mean(composite_scores)) if composite_scores else None,
                human_eval=human,
            )
        )
    return reports
