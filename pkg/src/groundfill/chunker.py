"""Boundary-respecting overlapping chunker with provenance metadata.

Tokens are whitespace words of the (already cleaned) structured text, so the
heading markers emitted by the extraction stage stay part of the stream and
overlap-deduplicated concatenation reproduces the source exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .textutil import normalize_text

_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*)$")
_TERMINAL_CHARS = ".!?"

SECTION, PARAGRAPH, SENTENCE = 3, 2, 1


class SourceType(str, Enum):
    OFFICIAL = "Official"
    FAQ = "Faq"
    COMMUNITY = "Community"
    PERSONAL = "Personal"


class Category(str, Enum):
    EDUCATION = "Education"
    ACTIVITY = "Activity"
    AWARD = "Award"
    PERSONAL = "Personal"
    TESTING = "Testing"
    OTHER = "Other"


@dataclass(frozen=True)
class ChunkConfig:
    min_tokens: int = 300
    max_tokens: int = 500
    overlap_tokens: int = 50

    def __post_init__(self):
        if not 0 <= self.overlap_tokens < self.min_tokens <= self.max_tokens:
            raise ValueError("require 0 <= overlap < min <= max")


@dataclass
class Chunk:
    id: str
    text: str
    token_count: int
    institution: str
    source_url: str
    page_title: str
    section_heading: Optional[str]
    source_type: SourceType
    crawl_timestamp: Optional[str]
    chunk_index: int
    category: Optional[Category] = None
    user_id: Optional[str] = None
    oversized: bool = False

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["source_type"] = self.source_type.value
        d["category"] = self.category.value if self.category else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Chunk":
        d = dict(d)
        d["source_type"] = SourceType(d["source_type"])
        d["category"] = Category(d["category"]) if d.get("category") else None
        return cls(**d)


def tokenize(text: str) -> list[str]:
    """Whitespace word tokens; deterministic, punctuation kept on words."""
    return text.split()


@dataclass
class _Line:
    tokens: list[str]
    start: int
    heading_level: int = 0
    heading_text: str = ""
    new_paragraph: bool = False


def _scan(text: str) -> tuple[list[str], list[_Line], dict[int, int], list[tuple[int, str]]]:
    """Token stream, line records, boundary positions, and heading positions.

    A boundary at position p separates tokens[p-1] and tokens[p]. Kinds:
    SECTION at heading-line starts, PARAGRAPH at blank-line-separated block
    starts, SENTENCE after tokens carrying terminal punctuation.
    """
    tokens: list[str] = []
    lines: list[_Line] = []
    boundaries: dict[int, int] = {}
    headings: list[tuple[int, str]] = []
    pending_paragraph = False

    for raw in text.split("\n"):
        words = raw.split()
        if not words:
            pending_paragraph = True
            continue
        start = len(tokens)
        match = _HEADING_RE.match(raw.strip())
        line = _Line(tokens=words, start=start)
        if match:
            line.heading_level = len(match.group(1))
            line.heading_text = match.group(2).strip()
            headings.append((start, line.heading_text))
            if start > 0:
                boundaries[start] = max(boundaries.get(start, 0), SECTION)
        elif pending_paragraph and start > 0:
            line.new_paragraph = True
            boundaries[start] = max(boundaries.get(start, 0), PARAGRAPH)
        pending_paragraph = False
        tokens.extend(words)
        for offset, word in enumerate(words):
            if word and word[-1] in _TERMINAL_CHARS:
                pos = start + offset + 1
                if 0 < pos < len(tokens) + 1:
                    boundaries[pos] = max(boundaries.get(pos, 0), SENTENCE)
        lines.append(line)

    boundaries.pop(len(tokens), None)
    return tokens, lines, boundaries, headings


def _render_span(lines: list[_Line], start: int, end: int) -> str:
    """Reconstruct text for tokens[start:end] preserving line structure."""
    pieces: list[str] = []
    for line in lines:
        line_end = line.start + len(line.tokens)
        if line_end <= start or line.start >= end:
            continue
        lo = max(start, line.start) - line.start
        hi = min(end, line_end) - line.start
        segment = " ".join(line.tokens[lo:hi])
        if pieces and line.new_paragraph and lo == 0:
            pieces.append("\n" + segment)
        elif pieces:
            pieces.append(segment)
        else:
            pieces.append(segment)
    return "\n".join(pieces)


def _pick_end(
    start: int,
    n_tokens: int,
    cfg: ChunkConfig,
    boundaries: dict[int, int],
) -> tuple[int, bool]:
    """Chunk end position and oversized flag for a chunk starting at start."""
    limit = start + cfg.max_tokens
    if n_tokens - start <= cfg.max_tokens:
        return n_tokens, False

    in_window = [p for p in boundaries if start < p <= limit]
    floor = start + max(cfg.min_tokens, cfg.overlap_tokens + 1)
    eligible = [p for p in in_window if p >= floor]
    if not eligible:
        # Relax the minimum but never cut inside the next chunk's overlap.
        eligible = [p for p in in_window if p - start > cfg.overlap_tokens]
    if eligible:
        best_kind = max(boundaries[p] for p in eligible)
        return max(p for p in eligible if boundaries[p] == best_kind), False

    # Indivisible block longer than max: emit whole up to the next boundary.
    after = [p for p in boundaries if p > limit]
    end = min(after) if after else n_tokens
    return end, True


def chunk_text(
    text: str,
    cfg: ChunkConfig,
    *,
    institution: str,
    page_id: str,
    source_url: str = "",
    page_title: str = "",
    source_type: SourceType = SourceType.OFFICIAL,
    crawl_timestamp: Optional[str] = None,
    user_id: Optional[str] = None,
    categorize: bool = True,
) -> list[Chunk]:
    """Greedy accumulate-and-backtrack chunking of one document.

    Chunks target [min_tokens, max_tokens], end on the best boundary in reach
    (section > paragraph > sentence), and each chunk after the first begins
    overlap_tokens before its predecessor's end.
    """
    tokens, lines, boundaries, headings = _scan(text)
    n = len(tokens)
    chunks: list[Chunk] = []
    if n == 0:
        return chunks

    safe_institution = normalize_text(institution).replace(" ", "_") or "unknown"
    start = 0
    while start < n:
        end, oversized = _pick_end(start, n, cfg, boundaries)
        span_text = _render_span(lines, start, end)
        heading = None
        for pos, title in headings:
            if pos <= start:
                heading = title
            else:
                break
        index = len(chunks)
        chunk = Chunk(
            id=f"doc_{safe_institution}_{page_id}_{index}",
            text=span_text,
            token_count=end - start,
            institution=institution,
            source_url=source_url,
            page_title=page_title,
            section_heading=heading,
            source_type=source_type,
            crawl_timestamp=crawl_timestamp,
            chunk_index=index,
            category=assign_category(span_text) if categorize else None,
            user_id=user_id,
            oversized=oversized,
        )
        chunks.append(chunk)
        if end >= n:
            break
        start = end - cfg.overlap_tokens
    return chunks


_CATEGORY_RULES: list[tuple[Category, tuple[str, ...]]] = [
    (Category.EDUCATION, ("course", "courses", "grade", "grades", "gpa")),
    (Category.AWARD, ("award", "awards", "certificate", "honor", "honors")),
    (Category.ACTIVITY, ("club", "volunteer", "team")),
    (Category.TESTING, ("sat", "act", "ap", "ib", "score", "scores")),
    (Category.PERSONAL, ("name", "address", "phone")),
]


def assign_category(text: str) -> Category:
    """First-match rule classifier over whole words of the chunk text."""
    words = set(normalize_text(text).split())
    for category, needles in _CATEGORY_RULES:
        if any(needle in words for needle in needles):
            return category
    return Category.OTHER
