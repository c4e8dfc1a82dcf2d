"""Deterministic text measures: tokenization, French readability, BLEU, ROUGE.

Everything here is a pure function of its inputs, safe for unrestricted
parallel use. Tokenization lowercases, drops punctuation and splits
apostrophe elisions, which matches how the corpus statistics are defined.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

__all__ = [
    "TokenSequence",
    "ReadabilityScore",
    "tokenize",
    "split_sentences",
    "count_syllables_fr",
    "readability_fr",
    "bleu",
    "rouge_n",
    "rouge_l",
]

# Word characters: latin letters incl. French accents and ligatures, digits.
# Apostrophes are not word characters, so "l'assuré" splits into two tokens.
_WORD_RE = re.compile(r"[0-9]+|[a-zàâäéèêëîïôöùûüÿçœæ]+")

_VOWELS = set("aeiouyéèêëàâîïôûùüœ")

# Abbreviations that end with a period but do not end a sentence.
_ABBREVIATIONS = ("art.", "ch.", "no.")

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?…])\s+(?=[A-ZÀÂÄÉÈÊËÎÏÔÖÙÛÜÇŒÆ])")


@dataclass(frozen=True)
class TokenSequence:
    """Lowercase word tokens with whitespace and punctuation removed."""

    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class ReadabilityScore:
    """French reading-ease result (higher = easier) plus its raw counts."""

    value: float
    words: int
    sentences: int
    syllables: int


def tokenize(text: str) -> TokenSequence:
    """Lowercase word tokens; punctuation, newlines and whitespace dropped.

    Apostrophe elision is split: "l'assuré" -> ("l", "assuré"). Empty text
    yields an empty sequence.
    """
    return TokenSequence(tuple(_WORD_RE.findall(text.lower())))


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence splitter.

    Splits on ``. ! ? …`` followed by whitespace and an uppercase letter, or
    at end of text. A short list of legal abbreviations ("art.", "ch.",
    "no.") is protected from splitting.
    """
    text = text.strip()
    if not text:
        return []
    parts = _SENTENCE_SPLIT_RE.split(text)
    # Re-join splits caused by protected abbreviations.
    merged: list[str] = []
    for part in parts:
        if merged and merged[-1].lower().endswith(_ABBREVIATIONS):
            merged[-1] = merged[-1] + " " + part
        else:
            merged.append(part)
    return [p for p in (s.strip() for s in merged) if p]


def count_syllables_fr(word: str) -> int:
    """Count syllables as maximal vowel groups, minimum 1.

    Vowels include accented French vowels and the oe ligature. Raises
    ``ValueError`` on an empty word.
    """
    if not word:
        raise ValueError("cannot count syllables of an empty word")
    groups = 0
    in_group = False
    for ch in word.lower():
        if ch in _VOWELS:
            if not in_group:
                groups += 1
                in_group = True
        else:
            in_group = False
    return max(1, groups)


def readability_fr(text: str) -> ReadabilityScore:
    """French reading-ease score (Kandel-Moles adaptation, higher = easier).

    value = 207 - 1.015 * (words/sentences) - 73.6 * (syllables/words)

    Raises ``ValueError`` when the text contains no words.
    """
    sentences = split_sentences(text)
    words = [t for s in sentences for t in tokenize(s)]
    if not words:
        raise ValueError("readability requires at least one word")
    n_sentences = max(1, len(sentences))
    n_words = len(words)
    n_syllables = sum(count_syllables_fr(w) for w in words)
    value = 207.0 - 1.015 * (n_words / n_sentences) - 73.6 * (n_syllables / n_words)
    return ReadabilityScore(value=value, words=n_words, sentences=n_sentences, syllables=n_syllables)


def _ngrams(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _require_nonempty(candidate: str, reference: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    cand = tokenize(candidate).tokens
    ref = tokenize(reference).tokens
    if not cand or not ref:
        raise ValueError("candidate and reference must both contain at least one token")
    return cand, ref


def bleu(candidate: str, reference: str) -> float:
    """Sentence-level BLEU-4 in [0, 100] with brevity penalty.

    Orders with zero matches get add-one smoothing; orders for which the
    candidate has no n-grams at all (very short inputs) are skipped.
    Identical inputs score exactly 100; zero unigram overlap scores 0.
    """
    cand, ref = _require_nonempty(candidate, reference)
    log_precisions: list[float] = []
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        if not cand_ngrams:
            continue
        ref_ngrams = _ngrams(ref, n)
        matches = sum(min(count, ref_ngrams[ng]) for ng, count in cand_ngrams.items())
        total = sum(cand_ngrams.values())
        if n == 1 and matches == 0:
            return 0.0
        if matches == 0:
            precision = (matches + 1) / (total + 1)
        else:
            precision = matches / total
        log_precisions.append(math.log(precision))
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))


def rouge_n(candidate: str, reference: str, n: int) -> float:
    """ROUGE-N F1 in [0, 1] over clipped n-gram overlap."""
    if n not in (1, 2):
        raise ValueError(f"unsupported ROUGE order: {n}")
    cand, ref = _require_nonempty(candidate, reference)
    cand_ngrams = _ngrams(cand, n)
    ref_ngrams = _ngrams(ref, n)
    if not cand_ngrams or not ref_ngrams:
        return 0.0
    matches = sum(min(count, ref_ngrams[ng]) for ng, count in cand_ngrams.items())
    if matches == 0:
        return 0.0
    precision = matches / sum(cand_ngrams.values())
    recall = matches / sum(ref_ngrams.values())
    return 2.0 * precision * recall / (precision + recall)


def _lcs_length(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    # Single-row dynamic program; O(len(a) * len(b)).
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F1 in [0, 1] based on longest-common-subsequence length."""
    cand, ref = _require_nonempty(candidate, reference)
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2.0 * precision * recall / (precision + recall)
