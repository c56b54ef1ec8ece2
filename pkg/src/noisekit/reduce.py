"""Noise-reduction methods: spell correction, paraphrase pre-pipeline,
OOV/random masking with fill-in, and back-translation.

Spell correction is phonetic-first: words share a candidate pool when their
consonant-class codes collide, and the replacement is the candidate with the
smallest edit distance (ties: higher corpus frequency, then lexicographic).
Neural translate/paraphrase models run out of process behind a line-oriented
JSON protocol; a fixture client answers from a file so tests stay hermetic.
"""

from __future__ import annotations

import json
import math
import random
import shlex
import subprocess
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources as importlib_resources

from . import textcore
from .errors import (
    ClientUnavailable,
    EmptyWord,
    FixtureMiss,
    InvalidProbability,
    Malformed,
    MissingResource,
    PredictorFailure,
)
from .errors import ClientError

MASK_TOKEN = "<MASK>"


class PhoneticTable:
    """Consonant -> articulation-class digit map for one script."""

    def __init__(self, classes: dict[str, str], version: str = "unversioned"):
        for ch, digit in classes.items():
            if len(ch) != 1 or len(digit) != 1 or not digit.isdigit():
                raise Malformed(f"bad phonetic entry {ch!r} -> {digit!r}")
        self.classes = dict(classes)
        self.version = version

    @classmethod
    def from_file(cls, path) -> "PhoneticTable":
        version = "unversioned"
        classes = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    if lineno == 1 and raw.startswith("#"):
                        version = raw.lstrip("#").strip()
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise Malformed("expected CODEPOINT<TAB>digit", path=path, line=lineno)
                try:
                    ch = textcore._parse_codepoint(fields[0])
                except ValueError as exc:
                    raise Malformed(str(exc), path=path, line=lineno) from None
                digit = fields[1].strip()
                if len(digit) != 1 or not digit.isdigit():
                    raise Malformed(f"class must be one digit, got {digit!r}", path=path, line=lineno)
                classes[ch] = digit
        return cls(classes, version=version)


def _packaged_table(name: str) -> PhoneticTable:
    ref = importlib_resources.files("noisekit").joinpath(f"data/{name}")
    with importlib_resources.as_file(ref) as path:
        return PhoneticTable.from_file(path)


def bengali_phonetic_table() -> PhoneticTable:
    return _packaged_table("phonetic_bn.tsv")


def latin_test_phonetic_table() -> PhoneticTable:
    return _packaged_table("phonetic_latin_test.tsv")


def phonetic_encode(word: str, table: PhoneticTable) -> str:
    """First letter + three consonant-class digits (vowels and marks dropped)."""
    if not word:
        raise EmptyWord("cannot encode an empty word")
    digits = []
    for ch in word[1:].lower():
        digit = table.classes.get(ch)
        if digit is None:
            continue
        if not digits or digits[-1] != digit:
            digits.append(digit)
    first = word[0].upper()
    if len(first) != 1:  # e.g. sharp s, whose uppercase is two letters
        first = word[0]
    return first + "".join(digits[:3]).ljust(3, "0")


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode scalar values."""
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return len(b)
    previous = list(range(len(a) + 1))
    for i, cb in enumerate(b, start=1):
        current = [i]
        for j, ca in enumerate(a, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[len(a)]


class Dictionary:
    """Word list with frequencies and an eagerly built phonetic index."""

    def __init__(self, freq: dict[str, int], table: PhoneticTable | None = None):
        self.table = table if table is not None else bengali_phonetic_table()
        self.freq = {w: int(c) for w, c in freq.items()}
        self.words = set(self.freq)
        self.phonetic_index: dict[str, list[str]] = defaultdict(list)
        for word in sorted(self.words):
            self.phonetic_index[phonetic_encode(word, self.table)].append(word)
        self.phonetic_index = dict(self.phonetic_index)
        self.native_script = self._majority_script()

    def _majority_script(self) -> str | None:
        counts = Counter()
        for word in self.words:
            for ch in word:
                script = textcore.char_script(ch)
                if script is not None:
                    counts[script] += 1
        if not counts:
            return None
        # Deterministic tie-break: highest count, then name.
        return min(counts, key=lambda s: (-counts[s], s))

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def default_max_dist(word: str) -> int:
    """Edit-distance budget: 2 for short words, len/3 rounded up otherwise."""
    return 2 if len(word) <= 4 else math.ceil(len(word) / 3)


def _token_is_correctable(token: str, dictionary: Dictionary) -> bool:
    if textcore.is_punct_token(token) or textcore.is_digit_token(token):
        return False
    if token in dictionary:
        return False
    if dictionary.native_script is not None:
        scripts = [textcore.char_script(ch) for ch in token]
        scripts = [s for s in scripts if s is not None]
        if scripts and dictionary.native_script not in scripts:
            return False
    return True


@dataclass
class CorrectionResult:
    original: str
    corrected: str
    edits: list[tuple[int, str, str, int]] = field(default_factory=list)


def spell_correct(sentence, dictionary: Dictionary, max_dist: int | None = None) -> CorrectionResult:
    """Replace out-of-dictionary words by their phonetically closest dictionary match.

    A token is left alone when it is punctuation, digits, non-native script,
    already in the dictionary, or when no same-code candidate lies within the
    edit-distance budget.
    """
    if not dictionary.words:
        raise MissingResource("spell correction needs a non-empty dictionary")
    text = sentence.text if isinstance(sentence, textcore.Document) else sentence
    seq = textcore.tokenize(text)
    edits = []
    pieces = []
    cursor = 0
    for i, (token, (start, end)) in enumerate(zip(seq.tokens, seq.spans)):
        if not _token_is_correctable(token, dictionary):
            continue
        candidates = dictionary.phonetic_index.get(phonetic_encode(token, dictionary.table))
        if not candidates:
            continue
        limit = max_dist if max_dist is not None else default_max_dist(token)
        best = None
        for cand in candidates:
            dist = levenshtein(token, cand)
            if dist > limit:
                continue
            key = (dist, -dictionary.freq.get(cand, 0), cand)
            if best is None or key < best[0]:
                best = (key, cand, dist)
        if best is None:
            continue
        _, replacement, dist = best
        edits.append((i, token, replacement, dist))
        pieces.append(text[cursor:start])
        pieces.append(replacement)
        cursor = end
    pieces.append(text[cursor:])
    return CorrectionResult(original=text, corrected="".join(pieces), edits=edits)


def detect_oov(tokens: textcore.TokenSequence, vocab) -> list[int]:
    """Indices of word tokens missing from the vocabulary; punctuation is never flagged."""
    flagged = []
    for i, token in enumerate(tokens.tokens):
        if textcore.is_punct_token(token):
            continue
        if token not in vocab:
            flagged.append(i)
    return flagged


def _splice_masks(text: str, seq: textcore.TokenSequence, indices) -> str:
    pieces = []
    cursor = 0
    for i in indices:
        start, end = seq.spans[i]
        pieces.append(text[cursor:start])
        pieces.append(MASK_TOKEN)
        cursor = end
    pieces.append(text[cursor:])
    return "".join(pieces)


def mask_oov(sentence, vocab) -> str:
    """Replace every OOV word token by the mask literal; spacing is preserved."""
    text = sentence.text if isinstance(sentence, textcore.Document) else sentence
    seq = textcore.tokenize(text)
    return _splice_masks(text, seq, detect_oov(seq, vocab))


def mask_random(sentence, p: float = 0.2, seed: int = 0) -> str:
    """Mask each word token independently with probability p (seeded, reproducible)."""
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"mask probability must be in [0, 1], got {p}")
    text = sentence.text if isinstance(sentence, textcore.Document) else sentence
    seq = textcore.tokenize(text)
    rng = random.Random(seed)
    chosen = []
    for i, token in enumerate(seq.tokens):
        if textcore.is_punct_token(token):
            continue
        if rng.random() < p:
            chosen.append(i)
    return _splice_masks(text, seq, chosen)


class NgramMaskFiller:
    """Fallback mask predictor: left-bigram argmax with unigram-frequency backoff."""

    def __init__(self, bigrams: dict[tuple[str, str], int], unigrams: dict[str, int]):
        self.bigrams = dict(bigrams)
        self.unigrams = dict(unigrams)
        self._by_left: dict[str, list[tuple[str, int]]] = defaultdict(list)
        for (left, right), count in self.bigrams.items():
            self._by_left[left].append((right, count))

    @classmethod
    def from_corpus(cls, texts, dictionary: Dictionary | None = None) -> "NgramMaskFiller":
        bigrams: Counter = Counter()
        unigrams: Counter = Counter()
        for text in texts:
            words = [t for t in textcore.tokenize(text).tokens if not textcore.is_punct_token(t)]
            unigrams.update(words)
            bigrams.update(zip(words, words[1:]))
        if dictionary is not None:
            for word, count in dictionary.freq.items():
                unigrams[word] += count
        return cls(dict(bigrams), dict(unigrams))

    @classmethod
    def from_dictionary(cls, dictionary: Dictionary) -> "NgramMaskFiller":
        return cls({}, dict(dictionary.freq))

    def _predict(self, left: str | None) -> str:
        if left is not None:
            followers = self._by_left.get(left)
            if followers:
                return min(followers, key=lambda wc: (-wc[1], wc[0]))[0]
        if not self.unigrams:
            raise PredictorFailure("mask filler has an empty vocabulary")
        return min(self.unigrams.items(), key=lambda wc: (-wc[1], wc[0]))[0]

    def fill(self, masked: str) -> str:
        parts = masked.split(MASK_TOKEN)
        out = parts[0]
        for part in parts[1:]:
            words = [t for t in textcore.tokenize(out).tokens if not textcore.is_punct_token(t)]
            left = words[-1] if words else None
            out += self._predict(left) + part
        return out


class ClientMaskFiller:
    """Mask predictor backed by a translator-protocol client (task "fill")."""

    def __init__(self, client, lang: str = "bn"):
        self.client = client
        self.lang = lang

    def fill(self, masked: str) -> str:
        return self.client.request("fill", self.lang, self.lang, masked)


def fill_masks(masked: str, predictor) -> str:
    """Replace every mask literal via the predictor; the output carries no mask."""
    if MASK_TOKEN not in masked:
        return masked
    if predictor is None:
        raise MissingResource("mask filling needs a predictor")
    try:
        filled = predictor.fill(masked)
    except ClientError as exc:
        raise PredictorFailure(str(exc)) from exc
    if MASK_TOKEN in filled:
        raise PredictorFailure("predictor left mask tokens in its output")
    return filled


class FixtureClient:
    """Read-only client answering from recorded (task, src, tgt, text) tuples."""

    kind = "fixture"

    def __init__(self, entries: dict[tuple[str, str, str, str], str], source: str = "bn", pivot: str = "en"):
        self.entries = dict(entries)
        self.source = source
        self.pivot = pivot

    def request(self, task: str, src: str, tgt: str, text: str) -> str:
        key = (task, src, tgt, text)
        try:
            return self.entries[key]
        except KeyError:
            raise FixtureMiss(f"no fixture entry for task={task} {src}->{tgt} text={text!r}") from None

    def close(self):
        pass


class SubprocessClient:
    """One exclusive child process speaking line-oriented JSON.

    Request: {"id", "task", "src", "tgt", "text"}; response: {"id", "text"},
    one per line, in order.
    """

    kind = "subprocess"

    def __init__(self, command, source: str = "bn", pivot: str = "en"):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.source = source
        self.pivot = pivot
        self._proc: subprocess.Popen | None = None
        self._next_id = 0

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        if self._proc is not None:
            raise ClientUnavailable(f"client exited with status {self._proc.returncode}")
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ClientUnavailable(f"cannot start client {self.argv!r}: {exc}") from exc

    def request(self, task: str, src: str, tgt: str, text: str) -> str:
        self._ensure_started()
        rid = self._next_id
        self._next_id += 1
        message = json.dumps(
            {"id": rid, "task": task, "src": src, "tgt": tgt, "text": text},
            ensure_ascii=False,
        )
        try:
            self._proc.stdin.write(message + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ClientUnavailable(f"client pipe failed: {exc}") from exc
        if not line:
            status = self._proc.wait()
            raise ClientUnavailable(f"client closed its output (exit status {status})")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ClientUnavailable(f"client sent invalid JSON: {exc}") from exc
        if response.get("id") != rid:
            raise ClientUnavailable(
                f"client answered out of order (sent id {rid}, got {response.get('id')!r})"
            )
        if "text" not in response:
            raise ClientUnavailable("client response carries no text field")
        return str(response["text"])

    def close(self):
        if self._proc is None:
            return
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()
            self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def back_translate(sentence, client) -> str:
    """Source -> pivot -> source through the client, recorded verbatim."""
    text = sentence.text if isinstance(sentence, textcore.Document) else sentence
    pivot_text = client.request("translate", client.source, client.pivot, text)
    return client.request("translate", client.pivot, client.source, pivot_text)


def paraphrase(sentence, client, dictionary: Dictionary, max_dist: int | None = None) -> str:
    """Spell-correct first, then one paraphrase call on the corrected text."""
    corrected = spell_correct(sentence, dictionary, max_dist=max_dist).corrected
    return client.request("paraphrase", client.source, client.source, corrected)


class ReduceMethod(Enum):
    SPELL = "spell"
    SPELL_PARAPHRASE = "paraphrase"
    BACK_TRANSLATE = "backtranslate"
    MASK_OOV_FILL = "mask-oov"
    MASK_RANDOM_FILL = "mask-random"


@dataclass
class Resources:
    """Everything a reduction method may need; the dispatcher checks presence."""

    dictionary: Dictionary | None = None
    client: object | None = None
    mask_filler: object | None = None
    mask_probability: float = 0.2
    seed: int = 0
    max_dist: int | None = None

    def require(self, name: str, method: ReduceMethod):
        value = getattr(self, name)
        if value is None:
            raise MissingResource(f"method {method.value} needs a {name}")
        return value


def _filler(resources: Resources, method: ReduceMethod):
    if resources.mask_filler is not None:
        return resources.mask_filler
    if resources.dictionary is not None:
        return NgramMaskFiller.from_dictionary(resources.dictionary)
    raise MissingResource(f"method {method.value} needs a mask_filler or dictionary")


def reduce_text(sentence, method: ReduceMethod, resources: Resources) -> str:
    """Dispatch one sentence through the chosen reduction method."""
    text = sentence.text if isinstance(sentence, textcore.Document) else sentence
    if method is ReduceMethod.SPELL:
        dictionary = resources.require("dictionary", method)
        return spell_correct(text, dictionary, max_dist=resources.max_dist).corrected
    if method is ReduceMethod.SPELL_PARAPHRASE:
        dictionary = resources.require("dictionary", method)
        client = resources.require("client", method)
        return paraphrase(text, client, dictionary, max_dist=resources.max_dist)
    if method is ReduceMethod.BACK_TRANSLATE:
        client = resources.require("client", method)
        return back_translate(text, client)
    if method is ReduceMethod.MASK_OOV_FILL:
        dictionary = resources.require("dictionary", method)
        masked = mask_oov(text, dictionary)
        if MASK_TOKEN not in masked:
            return masked
        return fill_masks(masked, _filler(resources, method))
    if method is ReduceMethod.MASK_RANDOM_FILL:
        masked = mask_random(text, p=resources.mask_probability, seed=resources.seed)
        if MASK_TOKEN not in masked:
            return masked
        return fill_masks(masked, _filler(resources, method))
    raise MissingResource(f"unknown reduction method {method!r}")
