"""TF-IDF featurization over character and/or word n-grams.

Produces unit-L2 sparse vectors. The smoothed idf variant is
``ln((1 + N) / (1 + df)) + 1`` so no weight is ever zero or infinite, and tf
is the raw term count. Feature indices are assigned by lexicographic term
order, which makes fitting order-independent and fully deterministic.

In combined char+word mode the two term spaces are kept apart by tagging
terms with a ``c␟`` / ``w␟`` prefix (the tag separator cannot occur
in normalized text), so a word unigram never collides with the equal
one-character gram.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import textcore
from .errors import DimensionMismatch, EmptyCorpus, Malformed, OffsetTooSmall

_CHAR_TAG = "c" + textcore.NGRAM_JOIN
_WORD_TAG = "w" + textcore.NGRAM_JOIN

TFIDF_FORMAT = "noisekit-tfidf-v1"


class AnalyzerMode(enum.Enum):
    CHAR = "char"
    WORD = "word"
    CHAR_PLUS_WORD = "char+word"


@dataclass(frozen=True)
class AnalyzerConfig:
    mode: AnalyzerMode = AnalyzerMode.CHAR
    n_min: int = 1
    n_max: int = 4
    min_df: int = 1

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max <= 8:
            raise Malformed(f"need 1 <= n_min <= n_max <= 8, got {self.n_min}, {self.n_max}")
        if self.min_df < 1:
            raise Malformed(f"min_df must be >= 1, got {self.min_df}")


@dataclass
class SparseVector:
    """Sorted sparse vector; indices strictly increasing, no stored zeros."""

    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float64))

    @classmethod
    def from_entries(cls, entries) -> "SparseVector":
        entries = sorted((int(i), float(v)) for i, v in entries if v != 0.0)
        idx = np.fromiter((i for i, _ in entries), dtype=np.int64, count=len(entries))
        val = np.fromiter((v for _, v in entries), dtype=np.float64, count=len(entries))
        return cls(idx, val)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def dot(self, other: "SparseVector") -> float:
        i = j = 0
        total = 0.0
        a_idx, a_val = self.indices, self.values
        b_idx, b_val = other.indices, other.values
        while i < len(a_idx) and j < len(b_idx):
            if a_idx[i] == b_idx[j]:
                total += a_val[i] * b_val[j]
                i += 1
                j += 1
            elif a_idx[i] < b_idx[j]:
                i += 1
            else:
                j += 1
        return total


def analyzer_terms(text: str, config: AnalyzerConfig) -> list[str]:
    """Term stream for one document under the given analyzer mode."""
    if config.mode is AnalyzerMode.CHAR:
        return textcore.char_ngrams(text, config.n_min, config.n_max)
    if config.mode is AnalyzerMode.WORD:
        return textcore.word_ngrams(textcore.tokenize(text), config.n_min, config.n_max)
    chars = textcore.char_ngrams(text, config.n_min, config.n_max)
    words = textcore.word_ngrams(textcore.tokenize(text), config.n_min, config.n_max)
    return [_CHAR_TAG + g for g in chars] + [_WORD_TAG + g for g in words]


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    config: AnalyzerConfig
    corpus_size: int

    @property
    def dim(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(corpus, config: AnalyzerConfig | None = None) -> TfidfModel:
    """Build vocabulary and idf weights from a corpus of Documents.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1; indices are assigned by
    lexicographic term order, so shuffling the corpus yields an identical
    model.
    """
    if config is None:
        config = AnalyzerConfig()
    docs = list(corpus)
    if not docs:
        raise EmptyCorpus("cannot fit a TF-IDF model on an empty corpus")
    df: dict[str, int] = {}
    for doc in docs:
        text = doc.text if isinstance(doc, textcore.Document) else doc
        for term in set(analyzer_terms(text, config)):
            df[term] = df.get(term, 0) + 1
    if config.min_df > 1:
        df = {t: c for t, c in df.items() if c >= config.min_df}
    n = len(docs)
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for term, i in vocabulary.items():
        idf[i] = math.log((1 + n) / (1 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, config=config, corpus_size=n)


def transform(model: TfidfModel, doc) -> SparseVector:
    """Featurize one document: tf * idf, then L2-normalized (or the zero vector)."""
    text = doc.text if isinstance(doc, textcore.Document) else doc
    counts: dict[int, int] = {}
    vocab = model.vocabulary
    for term in analyzer_terms(text, model.config):
        idx = vocab.get(term)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector()
    indices = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    values = np.array([counts[i] for i in indices], dtype=np.float64) * model.idf[indices]
    norm = np.sqrt(np.dot(values, values))
    if norm > 0:
        values /= norm
    return SparseVector(indices, values)


def combine(a: SparseVector, b: SparseVector, offset: int) -> SparseVector:
    """Concatenate two feature spaces: b's indices are shifted by offset.

    The result is re-normalized to unit L2 norm (zero stays zero).
    """
    if a.nnz and offset < int(a.indices[-1]) + 1:
        raise OffsetTooSmall(
            f"offset {offset} overlaps first vector (max index {int(a.indices[-1])})"
        )
    indices = np.concatenate([a.indices, b.indices + offset])
    values = np.concatenate([a.values, b.values])
    norm = np.sqrt(np.dot(values, values))
    if norm > 0:
        values = values / norm
    return SparseVector(indices, values)


def to_json(model: TfidfModel) -> str:
    """Serialize a fitted model; terms sorted by index, keys sorted, UTF-8."""
    terms = [
        {"term": term, "index": idx, "idf": model.idf[idx]}
        for term, idx in sorted(model.vocabulary.items(), key=lambda kv: kv[1])
    ]
    payload = {
        "version": TFIDF_FORMAT,
        "config": {
            "mode": model.config.mode.value,
            "n_min": model.config.n_min,
            "n_max": model.config.n_max,
            "min_df": model.config.min_df,
        },
        "corpus_size": model.corpus_size,
        "terms": terms,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> TfidfModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(f"invalid JSON: {exc}") from None
    if payload.get("version") != TFIDF_FORMAT:
        raise Malformed(f"unsupported TF-IDF model version {payload.get('version')!r}")
    cfg = payload["config"]
    config = AnalyzerConfig(
        mode=AnalyzerMode(cfg["mode"]),
        n_min=cfg["n_min"],
        n_max=cfg["n_max"],
        min_df=cfg.get("min_df", 1),
    )
    terms = payload["terms"]
    vocabulary = {}
    idf = np.empty(len(terms), dtype=np.float64)
    for entry in terms:
        idx = int(entry["index"])
        if not 0 <= idx < len(terms):
            raise Malformed(f"term index {idx} out of range")
        vocabulary[entry["term"]] = idx
        idf[idx] = float(entry["idf"])
    if len(vocabulary) != len(terms):
        raise Malformed("duplicate terms in TF-IDF model")
    if np.any(idf <= 0):
        raise DimensionMismatch("idf values must be strictly positive")
    return TfidfModel(
        vocabulary=vocabulary, idf=idf, config=config, corpus_size=int(payload["corpus_size"])
    )
