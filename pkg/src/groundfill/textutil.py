"""Shared text normalization helpers used by mapping, indexing, and answering."""

from __future__ import annotations

import re
import unicodedata

_NON_WORD_RE = re.compile(r"[^0-9a-z]+")
_CAMEL_BOUNDARY_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+|\n+")


def normalize_text(text: str) -> str:
    """Lowercase NFC text with punctuation folded to single spaces.

    This is the normalization contract shared by keyword matching, the
    retrieval analyzer, and word-overlap scoring: "mm/dd/yyyy" becomes
    "mm dd yyyy", runs of whitespace collapse to one space.
    """
    text = unicodedata.normalize("NFC", text).lower()
    return " ".join(t for t in _NON_WORD_RE.split(text) if t)


def word_tokens(text: str) -> list[str]:
    """Normalized word tokens of ``text`` (may contain duplicates)."""
    normalized = normalize_text(text)
    return normalized.split() if normalized else []


def word_set(text: str) -> set[str]:
    """Normalized word token set of ``text``."""
    return set(word_tokens(text))


def split_identifier(ident: str) -> str:
    """Split a camelCase / snake_case identifier into space-separated words.

    "cumGpa" -> "cum gpa", "cum_gpa" -> "cum gpa".
    """
    spaced = _CAMEL_BOUNDARY_RE.sub(" ", ident)
    return normalize_text(spaced)


def split_sentences(text: str) -> list[str]:
    """Split text into sentence-ish units on terminal punctuation and newlines.

    Abbreviations are not special-cased; a newline always ends a unit so that
    line-oriented documents (transcripts, score sheets) split per line.
    """
    parts = _SENTENCE_SPLIT_RE.split(text)
    return [p.strip() for p in parts if p and p.strip()]
