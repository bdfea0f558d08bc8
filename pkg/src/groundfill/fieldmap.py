"""Three-tier resolution of observed portal form fields to canonical fields.

Tier 1 matches schema keywords directly against the field's aggregated text,
tier 2 retries with surrounding container context prefixed, tier 3 scores
lexical similarity against each field's semantic intent and accepts only
above a confidence threshold.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .schema import CanonicalSchema
from .similarity import jaro_winkler, word_overlap
from .textutil import normalize_text, split_identifier

logger = logging.getLogger(__name__)

DEFAULT_SIMILARITY_THRESHOLD = 0.85
TIER2_CONFIDENCE = 0.9


class InputKind(str, Enum):
    TEXT_INPUT = "TextInput"
    TEXT_AREA = "TextArea"
    SELECT = "Select"
    RADIO = "Radio"
    CHECKBOX = "Checkbox"
    DATE_INPUT = "DateInput"


class MappingTier(str, Enum):
    DIRECT = "Direct"
    CONTEXTUAL = "Contextual"
    SIMILARITY = "Similarity"
    UNMAPPED = "Unmapped"


@dataclass(frozen=True)
class ContextNode:
    """One ancestor container of a form element, outermost first in lists."""

    tag: str
    id_attr: Optional[str] = None
    class_list: tuple[str, ...] = ()
    heading_text: Optional[str] = None

    def __post_init__(self):
        if not self.tag:
            raise ValueError("ContextNode.tag must be non-empty")

    def context_text(self) -> str:
        parts = []
        if self.heading_text:
            parts.append(normalize_text(self.heading_text))
        if self.id_attr:
            parts.append(split_identifier(self.id_attr))
        for cls in self.class_list:
            parts.append(split_identifier(cls))
        return " ".join(p for p in parts if p)


@dataclass(frozen=True)
class FieldDescriptor:
    """A portal form field as observed by a client (UI or test fixture)."""

    element_id: Optional[str] = None
    name_attr: Optional[str] = None
    label_text: Optional[str] = None
    placeholder: Optional[str] = None
    aria_label: Optional[str] = None
    nearby_text: tuple[str, ...] = ()
    input_kind: InputKind = InputKind.TEXT_INPUT
    options: tuple[str, ...] = ()
    ancestors: tuple[ContextNode, ...] = ()

    def __post_init__(self):
        texty = (
            self.label_text,
            self.placeholder,
            self.aria_label,
            self.name_attr,
            *self.nearby_text,
        )
        if not any(t for t in texty):
            raise ValueError(
                "descriptor needs at least one of label/placeholder/aria/name/nearby text"
            )


@dataclass(frozen=True)
class MappingResult:
    field_id: Optional[str]
    tier: MappingTier
    confidence: float
    evidence: str

    def __post_init__(self):
        if (self.field_id is None) != (self.tier is MappingTier.UNMAPPED):
            raise ValueError("field_id must be present iff tier is not Unmapped")


@dataclass(frozen=True)
class MappingConfig:
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    jw_weight: float = 0.5
    overlap_weight: float = 0.5
    cache_enabled: bool = True
    debug: bool = False

    def __post_init__(self):
        if abs(self.jw_weight + self.overlap_weight - 1.0) > 1e-9:
            raise ValueError("jw_weight + overlap_weight must equal 1")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in (0, 1]")


def aggregate_field_text(d: FieldDescriptor) -> str:
    """All text associated with a field, normalized, label first.

    Order: label, placeholder, aria label, name attribute (identifier split
    into words), nearby text.
    """
    parts: list[str] = []
    if d.label_text:
        parts.append(normalize_text(d.label_text))
    if d.placeholder:
        parts.append(normalize_text(d.placeholder))
    if d.aria_label:
        parts.append(normalize_text(d.aria_label))
    if d.name_attr:
        parts.append(split_identifier(d.name_attr))
    for nearby in d.nearby_text:
        parts.append(normalize_text(nearby))
    return " ".join(p for p in parts if p)


def _keyword_in_text(keyword: str, text: str) -> bool:
    """Whole-word substring: 'gpa' matches 'cumulative gpa', not 'gpas'."""
    return f" {keyword} " in f" {text} "


def _best_keyword_match(
    text: str, schema: CanonicalSchema
) -> Optional[tuple[str, str]]:
    """(field_id, keyword) of the longest-keyword match; ties break on id."""
    best: Optional[tuple[str, str]] = None
    for fid in sorted(schema.fields):
        for keyword in schema.fields[fid].normalized_keywords():
            if not _keyword_in_text(keyword, text):
                continue
            if best is None or len(keyword) > len(best[1]):
                best = (fid, keyword)
    return best


def tier1_direct(text: str, schema: CanonicalSchema) -> Optional[MappingResult]:
    """Deterministic keyword match on the aggregated field text."""
    if not text:
        return None
    match = _best_keyword_match(text, schema)
    if match is None:
        return None
    fid, keyword = match
    return MappingResult(
        field_id=fid,
        tier=MappingTier.DIRECT,
        confidence=1.0,
        evidence=f"keyword {keyword!r} in field text {text!r}",
    )


def tier2_contextual(
    d: FieldDescriptor, schema: CanonicalSchema
) -> Optional[MappingResult]:
    """Keyword match retried with ancestor context, nearest ancestor first."""
    base = aggregate_field_text(d)
    for ancestor in reversed(d.ancestors):
        context = ancestor.context_text()
        if not context:
            continue
        match = _best_keyword_match(f"{context} {base}".strip(), schema)
        if match is None:
            continue
        fid, keyword = match
        return MappingResult(
            field_id=fid,
            tier=MappingTier.CONTEXTUAL,
            confidence=TIER2_CONFIDENCE,
            evidence=f"keyword {keyword!r} with <{ancestor.tag}> context {context!r}",
        )
    return None


def score_against_intent(text: str, intent: str, cfg: MappingConfig) -> float:
    """Tier-3 confidence: weighted Jaro-Winkler + word overlap vs the intent."""
    normalized_intent = normalize_text(intent)
    return cfg.jw_weight * jaro_winkler(text, normalized_intent) + (
        cfg.overlap_weight * word_overlap(text, normalized_intent)
    )


def tier3_similarity(
    text: str, schema: CanonicalSchema, cfg: MappingConfig
) -> Optional[MappingResult]:
    """Similarity scoring against every field's intent; thresholded argmax."""
    if not text:
        return None
    best_fid: Optional[str] = None
    best_score = -1.0
    for fid in sorted(schema.fields):
        score = score_against_intent(text, schema.fields[fid].intent, cfg)
        if score > best_score:
            best_fid, best_score = fid, score
    if best_fid is None or best_score < cfg.similarity_threshold:
        return None
    return MappingResult(
        field_id=best_fid,
        tier=MappingTier.SIMILARITY,
        confidence=best_score,
        evidence=f"intent similarity {best_score:.3f} for {text!r}",
    )


class MappingCache:
    """Session-scope memo for map_field results.

    Correctness never depends on hits: entries are pure-function values keyed
    by (aggregated text, ancestor fingerprint).
    """

    def __init__(self):
        self._entries: dict[tuple[str, str], MappingResult] = {}

    @staticmethod
    def key(d: FieldDescriptor) -> tuple[str, str]:
        fingerprint = "|".join(
            f"{a.tag}#{a.id_attr or ''}.{','.join(a.class_list)}@{a.heading_text or ''}"
            for a in d.ancestors
        )
        return (aggregate_field_text(d), fingerprint)

    def get(self, key: tuple[str, str]) -> Optional[MappingResult]:
        return self._entries.get(key)

    def put(self, key: tuple[str, str], result: MappingResult) -> None:
        self._entries[key] = result

    def __len__(self) -> int:
        return len(self._entries)


def map_field(
    d: FieldDescriptor,
    schema: CanonicalSchema,
    cfg: MappingConfig = MappingConfig(),
    cache: Optional[MappingCache] = None,
) -> MappingResult:
    """Cascade tier 1 -> 2 -> 3; Unmapped when all decline."""
    key = MappingCache.key(d)
    if cache is not None and cfg.cache_enabled:
        hit = cache.get(key)
        if hit is not None:
            return hit

    text = aggregate_field_text(d)
    result = (
        tier1_direct(text, schema)
        or tier2_contextual(d, schema)
        or tier3_similarity(text, schema, cfg)
        or MappingResult(
            field_id=None,
            tier=MappingTier.UNMAPPED,
            confidence=0.0,
            evidence=f"no tier matched {text!r}",
        )
    )
    if cfg.debug:
        trace = {
            "tier": result.tier.value,
            "score_per_field": {
                fid: round(score_against_intent(text, fld.intent, cfg), 4)
                for fid, fld in schema.fields.items()
            },
        }
        logger.debug("map_field trace: %s", json.dumps(trace, sort_keys=True))
    if cache is not None and cfg.cache_enabled:
        cache.put(key, result)
    return result
