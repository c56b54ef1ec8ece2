"""Parsing and serialization of the on-disk formats.

Corpus files are TSV (`id  text  sentiment  noise`) with a tiny escape rule
for characters that would break the framing: backslash, tab, and the line
breaks that can occur in raw-mode texts. Every loader either returns a
structure satisfying its invariants or raises with a file location.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import classify, features
from .agreement import RatingMatrix
from .errors import BadEncoding, IoFailure, Malformed
from .metrics import EmbeddingTable
from .reduce import Dictionary, FixtureClient, PhoneticTable
from .textcore import Document, NoiseLabelSet, SentimentLabel, normalize

CORPUS_HEADER = "id\ttext\tsentiment\tnoise"
BUNDLE_FORMAT = "noisekit-bundle-v1"

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


class Split(enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    UNSPLIT = "unsplit"


@dataclass
class CorpusFile:
    documents: list[Document] = field(default_factory=list)
    split: Split = Split.UNSPLIT

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def escape_field(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def unescape_field(text: str, path=None, line=None, column=None) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _UNESCAPES:
                raise Malformed(
                    f"bad escape sequence at offset {i}", path=path, line=line, column=column
                )
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _read_text(path) -> str:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadEncoding(f"{path}: not valid UTF-8 at byte {exc.start}") from exc


def load_corpus(path, normalize_text: bool = True, split: Split = Split.UNSPLIT) -> CorpusFile:
    """Parse a corpus TSV; rejects unknown columns and reports error locations."""
    content = _read_text(path)
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise Malformed("missing header line", path=path, line=1)
    if lines[0] != CORPUS_HEADER:
        raise Malformed(
            f"expected header {CORPUS_HEADER!r}, got {lines[0]!r}", path=path, line=1
        )
    documents = []
    seen_ids = set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise Malformed(
                f"expected 4 columns, got {len(fields)}",
                path=path,
                line=lineno,
                column=min(len(fields), 5),
            )
        doc_id = unescape_field(fields[0], path=path, line=lineno, column=1)
        if not doc_id:
            raise Malformed("empty id", path=path, line=lineno, column=1)
        if doc_id in seen_ids:
            raise Malformed(f"duplicate id {doc_id!r}", path=path, line=lineno, column=1)
        seen_ids.add(doc_id)
        text = unescape_field(fields[1], path=path, line=lineno, column=2)
        if normalize_text:
            text = normalize(text)
        if not text:
            raise Malformed("empty text", path=path, line=lineno, column=2)
        sentiment = None
        if fields[2] != "-":
            if fields[2] not in ("neutral", "positive", "negative"):
                raise Malformed(
                    f"sentiment must be neutral/positive/negative/-, got {fields[2]!r}",
                    path=path,
                    line=lineno,
                    column=3,
                )
            sentiment = SentimentLabel.from_name(fields[2])
        noise = None
        if fields[3] != "-":
            try:
                noise = NoiseLabelSet.from_bits(fields[3])
            except Malformed as exc:
                raise Malformed(exc.reason, path=path, line=lineno, column=4) from None
            if not noise:
                raise Malformed(
                    "a labeled instance needs at least one noise flag",
                    path=path,
                    line=lineno,
                    column=4,
                )
        documents.append(Document(id=doc_id, text=text, sentiment=sentiment, noise=noise))
    return CorpusFile(documents=documents, split=split)


def save_corpus(corpus, path) -> None:
    """Write rows in order, LF endings; output is bit-deterministic."""
    documents = corpus.documents if isinstance(corpus, CorpusFile) else corpus
    lines = [CORPUS_HEADER]
    for doc in documents:
        sentiment = doc.sentiment.label if doc.sentiment is not None else "-"
        noise = doc.noise.to_bits() if doc.noise is not None else "-"
        lines.append(
            "\t".join((escape_field(doc.id), escape_field(doc.text), sentiment, noise))
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_dictionary(path, phonetic_table: PhoneticTable | None = None) -> Dictionary:
    """word<TAB>frequency per line; frequency defaults to 1 and accumulates."""
    content = _read_text(path)
    freq: dict[str, int] = {}
    for lineno, raw in enumerate(content.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) > 2:
            raise Malformed("expected word<TAB>frequency", path=path, line=lineno)
        word = parts[0].strip()
        if not word:
            raise Malformed("empty word", path=path, line=lineno, column=1)
        count = 1
        if len(parts) == 2:
            try:
                count = int(parts[1])
            except ValueError:
                raise Malformed(
                    f"frequency must be an integer, got {parts[1]!r}",
                    path=path,
                    line=lineno,
                    column=2,
                ) from None
            if count < 1:
                raise Malformed("frequency must be >= 1", path=path, line=lineno, column=2)
        freq[word] = freq.get(word, 0) + count
    if not freq:
        raise Malformed("dictionary file has no entries", path=path)
    return Dictionary(freq, table=phonetic_table)


def load_embeddings(path) -> EmbeddingTable:
    """First line VOCAB_SIZE DIM, then one word + DIM components per line."""
    from .errors import DimensionMismatch

    content = _read_text(path)
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise Malformed("missing header line", path=path, line=1)
    header = lines[0].split()
    if len(header) != 2:
        raise Malformed("header must be VOCAB_SIZE DIM", path=path, line=1)
    try:
        vocab_size, dim = int(header[0]), int(header[1])
    except ValueError:
        raise Malformed("header must be two integers", path=path, line=1) from None
    if vocab_size < 0 or dim < 1:
        raise Malformed("need VOCAB_SIZE >= 0 and DIM >= 1", path=path, line=1)
    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            raise Malformed("blank line inside embedding table", path=path, line=lineno)
        parts = line.split(" ")
        if len(parts) != dim + 1:
            raise DimensionMismatch(
                f"{path}, line {lineno}: expected {dim} components, got {len(parts) - 1}"
            )
        word = parts[0]
        if word in vectors:
            raise Malformed(f"duplicate word {word!r}", path=path, line=lineno, column=1)
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise Malformed("non-numeric vector component", path=path, line=lineno) from None
        if np.isnan(vec).any():
            raise Malformed(f"NaN component for {word!r}", path=path, line=lineno)
        vectors[word] = vec
    if len(vectors) != vocab_size:
        raise Malformed(
            f"header declares {vocab_size} words but file has {len(vectors)}", path=path
        )
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_fixture(path, source: str = "bn", pivot: str = "en") -> FixtureClient:
    """JSON-lines fixture; on duplicate keys the last entry wins with a warning."""
    content = _read_text(path)
    entries: dict[tuple[str, str, str, str], str] = {}
    for lineno, line in enumerate(content.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise Malformed(f"invalid JSON: {exc.msg}", path=path, line=lineno) from None
        missing = {"task", "src", "tgt", "text_in", "text_out"} - set(record)
        if missing:
            raise Malformed(
                f"fixture entry missing {sorted(missing)}", path=path, line=lineno
            )
        key = (record["task"], record["src"], record["tgt"], record["text_in"])
        if key in entries:
            warnings.warn(f"{path}, line {lineno}: duplicate fixture key {key!r}; last entry wins")
        entries[key] = record["text_out"]
    return FixtureClient(entries, source=source, pivot=pivot)


def load_rating_matrix(path) -> RatingMatrix:
    """TSV with a header row of category names and one count row per item."""
    from .errors import MalformedMatrix

    content = _read_text(path)
    lines = [line for line in content.split("\n") if line.strip()]
    if len(lines) < 2:
        raise Malformed("need a header row and at least one item row", path=path, line=1)
    categories = tuple(lines[0].split("\t"))
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != len(categories):
            raise Malformed(
                f"expected {len(categories)} counts, got {len(parts)}", path=path, line=lineno
            )
        try:
            rows.append([int(v) for v in parts])
        except ValueError:
            raise Malformed("counts must be integers", path=path, line=lineno) from None
    try:
        return RatingMatrix(np.asarray(rows, dtype=np.int64), category_names=categories)
    except MalformedMatrix as exc:
        raise MalformedMatrix(f"{path}: {exc}") from None


def save_model_bundle(path, tfidf_model, linear_model) -> None:
    """Persist featurizer + classifier together so prediction is one file."""
    payload = {
        "version": BUNDLE_FORMAT,
        "tfidf": json.loads(features.to_json(tfidf_model)),
        "linear": json.loads(classify.to_json(linear_model)),
    }
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_model_bundle(path):
    content = _read_text(path)
    try:
        payload = json.loads(content)
    except json.JSONDecodeError as exc:
        raise Malformed(f"invalid JSON: {exc.msg}", path=path) from None
    if payload.get("version") != BUNDLE_FORMAT:
        raise Malformed(f"unsupported bundle version {payload.get('version')!r}", path=path)
    tfidf_model = features.from_json(json.dumps(payload["tfidf"]))
    linear_model = classify.from_json(json.dumps(payload["linear"]))
    return tfidf_model, linear_model
