"""Unicode normalization, tokenization and n-gram extraction.

Everything downstream (featurization, spell correction, metrics, statistics)
works on the output of :func:`normalize` and :func:`tokenize`, so the rules
here are deliberately small and fixed:

* normalization = NFC + punctuation canonicalization + whitespace collapse,
* tokens = whitespace-separated runs, with punctuation/symbol code points
  split off as single-character tokens,
* n-grams = contiguous runs of Unicode scalar values (not grapheme clusters).

The punctuation canonicalization table is a versioned data file shipped with
the package (``data/punctuation.tsv``) so the mapping stays auditable.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

from .errors import Malformed

# Joiner used to build word n-grams. It is stripped from every input during
# normalization, so it can never occur inside a token.
NGRAM_JOIN = "␟"

# Fixed order of the ten noise categories; bit 0 is the leftmost bit of the
# on-disk bitstring column.
NOISE_CLASSES = (
    "local_word",
    "word_misuse",
    "context_word_missing",
    "wrong_serial",
    "mixed_language",
    "punctuation_error",
    "spacing_error",
    "spelling_error",
    "coined_word",
    "others",
)


class SentimentLabel(enum.IntEnum):
    """Three-way sentiment. The numeric order is the tie-break order."""

    NEUTRAL = 0
    POSITIVE = 1
    NEGATIVE = 2

    @classmethod
    def from_name(cls, name: str) -> "SentimentLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise Malformed(f"unknown sentiment label {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class NoiseLabelSet:
    """Subset of the ten noise categories, stored as a bitmask.

    Bit i corresponds to NOISE_CLASSES[i].
    """

    mask: int = 0

    def __post_init__(self):
        if not 0 <= self.mask < (1 << len(NOISE_CLASSES)):
            raise Malformed(f"noise mask out of range: {self.mask}")

    @classmethod
    def from_names(cls, names) -> "NoiseLabelSet":
        mask = 0
        for name in names:
            try:
                mask |= 1 << NOISE_CLASSES.index(name)
            except ValueError:
                raise Malformed(f"unknown noise class {name!r}") from None
        return cls(mask)

    @classmethod
    def from_bits(cls, bits: str) -> "NoiseLabelSet":
        if len(bits) != len(NOISE_CLASSES) or set(bits) - {"0", "1"}:
            raise Malformed(f"noise bitstring must be 10 chars of 0/1, got {bits!r}")
        mask = 0
        for i, b in enumerate(bits):
            if b == "1":
                mask |= 1 << i
        return cls(mask)

    def to_bits(self) -> str:
        return "".join("1" if self.mask >> i & 1 else "0" for i in range(len(NOISE_CLASSES)))

    def names(self) -> tuple[str, ...]:
        return tuple(n for i, n in enumerate(NOISE_CLASSES) if self.mask >> i & 1)

    def has(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def __contains__(self, name: str) -> bool:
        return name in self.names()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __iter__(self):
        return iter(self.names())


@dataclass
class Document:
    """One corpus record: text plus optional sentiment and noise labels."""

    id: str
    text: str
    sentiment: SentimentLabel | None = None
    noise: NoiseLabelSet | None = None


@dataclass
class TokenSequence:
    """Tokens plus their (start, end) character spans into the source text."""

    tokens: list[str] = field(default_factory=list)
    spans: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


def _is_separator_char(ch: str) -> bool:
    """Punctuation or symbol code points become their own tokens."""
    return unicodedata.category(ch)[0] in ("P", "S")


def is_punct_token(token: str) -> bool:
    """True for the single-character punctuation/symbol tokens the tokenizer emits."""
    return len(token) == 1 and _is_separator_char(token)


def is_digit_token(token: str) -> bool:
    return token != "" and all(unicodedata.category(ch) == "Nd" for ch in token)


def char_script(ch: str) -> str | None:
    """Script of an alphabetic code point, from its Unicode name ('BENGALI', 'LATIN', ...)."""
    if unicodedata.category(ch)[0] not in ("L", "M"):
        return None
    try:
        return unicodedata.name(ch).split()[0]
    except ValueError:
        return None


class PunctuationTable:
    """Single code point -> single code point canonicalization map."""

    def __init__(self, mapping: dict[str, str], version: str = "unversioned"):
        for src, dst in mapping.items():
            # Idempotence: every target must be a fixed point of the map.
            if mapping.get(dst, dst) != dst:
                raise Malformed(
                    f"punctuation map is not idempotent: {src!r} -> {dst!r} -> {mapping[dst]!r}"
                )
        self.version = version
        self._table = {ord(src): dst for src, dst in mapping.items()}

    def apply(self, text: str) -> str:
        return text.translate(self._table)

    @classmethod
    def from_file(cls, path) -> "PunctuationTable":
        version = "unversioned"
        mapping = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    if lineno == 1 and raw.startswith("#"):
                        version = raw.lstrip("#").strip()
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise Malformed(
                        "expected FROM<TAB>TO code points", path=path, line=lineno
                    )
                try:
                    src, dst = (_parse_codepoint(f) for f in fields)
                except ValueError as exc:
                    raise Malformed(str(exc), path=path, line=lineno) from None
                mapping[src] = dst
        return cls(mapping, version=version)


def _parse_codepoint(text: str) -> str:
    text = text.strip()
    if text.upper().startswith("U+"):
        return chr(int(text[2:], 16))
    if len(text) == 1:
        return text
    raise ValueError(f"expected U+XXXX or a single character, got {text!r}")


def _load_default_punctuation() -> PunctuationTable:
    ref = resources.files("noisekit").joinpath("data/punctuation.tsv")
    with resources.as_file(ref) as path:
        return PunctuationTable.from_file(path)


_DEFAULT_PUNCT: PunctuationTable | None = None


def default_punctuation_table() -> PunctuationTable:
    global _DEFAULT_PUNCT
    if _DEFAULT_PUNCT is None:
        _DEFAULT_PUNCT = _load_default_punctuation()
    return _DEFAULT_PUNCT


def normalize(text: str, table: PunctuationTable | None = None) -> str:
    """Canonicalize a text: NFC, punctuation mapping, whitespace collapse.

    Idempotent for every input; empty input yields empty output.
    """
    if table is None:
        table = default_punctuation_table()
    s = unicodedata.normalize("NFC", text)
    s = s.replace(NGRAM_JOIN, "")
    s = table.apply(s)
    s = " ".join(s.split())
    return unicodedata.normalize("NFC", s)


def tokenize(text: str) -> TokenSequence:
    """Split on whitespace; punctuation/symbol code points become their own tokens.

    Letters, digits and combining marks stay attached to their word. Spans
    index into ``text`` and each token equals the substring at its span.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append(text[start:i])
                spans.append((start, i))
                start = None
        elif _is_separator_char(ch):
            if start is not None:
                tokens.append(text[start:i])
                spans.append((start, i))
                start = None
            tokens.append(ch)
            spans.append((i, i + 1))
        else:
            if start is None:
                start = i
    if start is not None:
        tokens.append(text[start:])
        spans.append((start, len(text)))
    return TokenSequence(tokens, spans)


def char_ngrams(text: str, n_min: int, n_max: int) -> list[str]:
    """All contiguous n-character substrings for n in [n_min, n_max], duplicates kept."""
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got {n_min}, {n_max}")
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(text) - n + 1):
            grams.append(text[i : i + n])
    return grams


def word_ngrams(tokens, n_min: int, n_max: int) -> list[str]:
    """Contiguous token windows joined by the reserved separator character."""
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got {n_min}, {n_max}")
    toks = list(tokens)
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(toks) - n + 1):
            grams.append(NGRAM_JOIN.join(toks[i : i + n]))
    return grams
