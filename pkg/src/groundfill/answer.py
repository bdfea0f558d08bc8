"""Mapping-first grounded answering: query building, synthesis, citations,
constraint-aware formatting, the agentic tool loop, and whole-form filling."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from datetime import date
from typing import Callable, Optional

from . import condlogic
from .chunker import Chunk
from .fieldmap import (
    FieldDescriptor,
    MappingCache,
    MappingConfig,
    MappingTier,
    map_field,
)
from .index import LexicalIndex, RetrievalRequest
from .model import (
    REFUSAL_TOKEN,
    Message,
    ModelClient,
    ModelError,
    ModelRequest,
    ModelResponse,
    ToolCall,
    ToolSpec,
)
from .schema import (
    CanonicalField,
    CanonicalSchema,
    DataType,
    DEFAULT_DATE_PATTERN,
    FormatKind,
    validate_value,
)
from .similarity import levenshtein
from .textutil import normalize_text

logger = logging.getLogger(__name__)

# Paper-era 0.7 was an embedding-space cosine; recalibrated for TF-IDF cosine
# where a one-line extractive answer against a whole chunk lands near 0.2-0.5.
CITATION_RELEVANCE_THRESHOLD = 0.15

MARKER_RE = re.compile(r"\[(\d+)\]")

SYNTHESIS_SYSTEM_TEXT = (
    "Answer the question using only the numbered context passages. "
    "Cite passages inline like [1]. If the context does not contain the "
    f"answer, reply exactly {REFUSAL_TOKEN}."
)


class UnknownTool(Exception):
    pass


@dataclass(frozen=True)
class Draft:
    answer_text: str
    citations: tuple[str, ...]
    refused: bool

    def __post_init__(self):
        if self.refused and (self.answer_text or self.citations):
            raise ValueError("refused drafts carry no text or citations")
        markers = {int(m) for m in MARKER_RE.findall(self.answer_text)}
        if markers and markers != set(range(1, len(self.citations) + 1)):
            raise ValueError("markers must be exactly 1..len(citations)")

    def plain_text(self) -> str:
        return strip_markers(self.answer_text)


@dataclass(frozen=True)
class FormattedAnswer:
    value: str
    field_id: str
    violations: tuple[str, ...]
    truncated: bool = False


@dataclass(frozen=True)
class CitationCheck:
    chunk_id: str
    exists: bool
    relevance: float
    source_present: bool
    valid: bool


@dataclass(frozen=True)
class CitationReport:
    citations: tuple[CitationCheck, ...]
    valid_fraction: float


def strip_markers(text: str) -> str:
    return re.sub(r"\s*\[\d+\]", "", text).strip()


def describe_format(fld: CanonicalField) -> str:
    if fld.data_type is DataType.DATE:
        pattern = (
            fld.format.date_pattern
            if fld.format.kind is FormatKind.DATE_PATTERN
            else DEFAULT_DATE_PATTERN
        )
        return f"a date formatted {pattern}"
    if fld.data_type is DataType.NUMBER:
        if fld.format.kind is FormatKind.NUMERIC_RANGE:
            return f"a number between {fld.format.min_value} and {fld.format.max_value}"
        return "a numeric value"
    if fld.data_type is DataType.ENUM:
        return "one of: " + ", ".join(fld.enum_options)
    if fld.data_type is DataType.BOOLEAN:
        return "Yes or No"
    if fld.data_type is DataType.PHONE:
        return "a phone number with area code"
    if fld.char_limit:
        return f"text of at most {fld.char_limit} characters"
    return "a short text value"


def construct_query(fld: CanonicalField, raw_question: str = "") -> str:
    """Deterministic retrieval/synthesis query from intent + question + format."""
    parts = [fld.intent.rstrip(".") + "."]
    if raw_question.strip():
        parts.append(f"Original question: {raw_question.strip()}")
    parts.append(f"Expected format: {describe_format(fld)}.")
    return " ".join(parts)


def build_grounding_prompt(question: str, chunks: list[Chunk]) -> str:
    lines = [f"Question: {question}", "", "Context:"]
    for i, chunk in enumerate(chunks, start=1):
        lines.append(f"[{i}] {chunk.text}")
        lines.append("")
    return "\n".join(lines).rstrip()


def synthesize(
    question: str,
    fld: CanonicalField,
    chunks: list[Chunk],
    model: ModelClient,
) -> Draft:
    """Grounded synthesis; refuses on empty evidence without consulting the model."""
    if not chunks:
        return Draft(answer_text="", citations=(), refused=True)

    prompt = build_grounding_prompt(question, chunks)
    response = model.complete(
        ModelRequest(
            system_text=SYNTHESIS_SYSTEM_TEXT,
            messages=(Message(role="user", content=prompt),),
        )
    )
    if response.text is None:
        raise ModelError("synthesis expects a text response, got a tool call")
    text = response.text.strip()
    if text == REFUSAL_TOKEN or not text:
        return Draft(answer_text="", citations=(), refused=True)

    # Remap in-range markers to a dense 1..n numbering; drop out-of-range ones.
    order: list[int] = []

    def renumber(match: re.Match) -> str:
        n = int(match.group(1))
        if not 1 <= n <= len(chunks):
            logger.warning("dropping out-of-range citation marker [%d]", n)
            return ""
        if n not in order:
            order.append(n)
        return f"[{order.index(n) + 1}]"

    rewritten = MARKER_RE.sub(renumber, text)
    rewritten = re.sub(r"[ \t]+(\n|$)", r"\1", re.sub(r"[ \t]{2,}", " ", rewritten)).strip()
    citations = tuple(chunks[n - 1].id for n in order)
    return Draft(answer_text=rewritten, citations=citations, refused=False)


def validate_citations(
    draft: Draft,
    idx: LexicalIndex,
    threshold: float = CITATION_RELEVANCE_THRESHOLD,
) -> CitationReport:
    """Per-citation existence, lexical relevance, and source presence."""
    if draft.refused or not draft.citations:
        return CitationReport(citations=(), valid_fraction=1.0 if draft.refused else 0.0)
    answer = draft.plain_text()
    checks = []
    for cid in draft.citations:
        chunk = idx.get(cid)
        exists = chunk is not None
        relevance = idx.text_similarity(answer, chunk.text) if exists else 0.0
        source_present = bool(chunk.source_url) if exists else False
        checks.append(
            CitationCheck(
                chunk_id=cid,
                exists=exists,
                relevance=relevance,
                source_present=source_present,
                valid=exists and source_present and relevance >= threshold,
            )
        )
    valid_fraction = sum(c.valid for c in checks) / len(checks)
    return CitationReport(citations=tuple(checks), valid_fraction=valid_fraction)


_LABEL_PREFIX_RE = re.compile(r"^[A-Za-z][A-Za-z ()/]{0,39}:\s+(?=\S)")
_NUMBER_TOKEN_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")
_DATE_NUMERIC_RE = re.compile(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b")
_DATE_ISO_RE = re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")
_MONTHS = {
    name: i + 1
    for i, name in enumerate(
        "january february march april may june july august september october november december".split()
    )
}
_DATE_NAMED_RE = re.compile(
    r"\b(" + "|".join(m[:3] + r"(?:" + m[3:] + r")?" for m in _MONTHS) + r")\.?\s+"
    r"(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})\b",
    re.IGNORECASE,
)


def _extract_dates(text: str) -> list[date]:
    found = []
    for m in _DATE_NUMERIC_RE.finditer(text):
        month, day, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        try:
            found.append(date(year, month, day))
        except ValueError:
            pass
    for m in _DATE_ISO_RE.finditer(text):
        try:
            found.append(date(int(m.group(1)), int(m.group(2)), int(m.group(3))))
        except ValueError:
            pass
    for m in _DATE_NAMED_RE.finditer(text):
        prefix = m.group(1)[:3].lower()
        month = next(v for k, v in _MONTHS.items() if k.startswith(prefix))
        try:
            found.append(date(int(m.group(3)), month, int(m.group(2))))
        except ValueError:
            pass
    return found


def _render_date(d: date, pattern: str) -> str:
    return (
        pattern.replace("MM", f"{d.month:02d}")
        .replace("DD", f"{d.day:02d}")
        .replace("YYYY", f"{d.year:04d}")
    )


def _match_enum_option(text: str, options: tuple[str, ...]) -> Optional[str]:
    normalized = normalize_text(text)
    for option in options:
        if normalized == normalize_text(option):
            return option

    # Unique whole-word containment ("Gender: Female" -> "Female").
    contained = [
        o for o in options if f" {normalize_text(o)} " in f" {normalized} "
    ]
    if len(contained) == 1:
        return contained[0]

    # Word-by-word abbreviation ("Comp Sci" -> "Computer Science").
    words = normalized.split()
    for option in options:
        option_words = normalize_text(option).split()
        if len(words) == len(option_words) and all(
            ow.startswith(w) and w for w, ow in zip(words, option_words)
        ):
            return option

    # Typo tolerance: nearest option within a third of its length in edits.
    best: Optional[tuple[int, str]] = None
    for option in options:
        distance = levenshtein(normalized, normalize_text(option))
        if distance <= math.ceil(len(option) / 3):
            if best is None or (distance, option) < best:
                best = (distance, option)
    return best[1] if best else None


def _truncate_at_word(text: str, limit: int) -> str:
    if len(text) <= limit:
        return text
    cut = text[:limit]
    if " " in cut:
        cut = cut[: cut.rfind(" ")]
    return cut.rstrip()


def format_answer(draft: Draft, fld: CanonicalField) -> FormattedAnswer:
    """Shape a non-refused draft into a type-conformant field value.

    Citation markers never reach the stored value (the draft keeps them); a
    leading "Label:" prefix from extractive sentences is dropped before
    type-specific parsing.
    """
    if draft.refused:
        raise ValueError("cannot format a refused draft")
    value = draft.plain_text()
    value = _LABEL_PREFIX_RE.sub("", value).strip()
    violations: list[str] = []
    truncated = False
    dt = fld.data_type

    if dt is DataType.DATE:
        pattern = (
            fld.format.date_pattern
            if fld.format.kind is FormatKind.DATE_PATTERN
            else DEFAULT_DATE_PATTERN
        )
        dates = _extract_dates(value)
        if dates:
            value = _render_date(min(dates), pattern)
        else:
            violations.append("no_date_found")
    elif dt is DataType.NUMBER:
        cleaned = re.sub(r"(?<=\d),(?=\d)", "", value)
        match = _NUMBER_TOKEN_RE.search(cleaned)
        if match:
            value = match.group(0)
        else:
            violations.append("no_number_found")
    elif dt is DataType.ENUM:
        option = _match_enum_option(value, fld.enum_options)
        if option is not None:
            value = option
        else:
            violations.append("no_option_match")
    elif dt is DataType.BOOLEAN:
        tokens = set(normalize_text(value).split())
        if tokens & {"yes", "true"}:
            value = "Yes"
        elif tokens & {"no", "false"}:
            value = "No"
        else:
            violations.append("no_boolean_found")
    elif dt is DataType.PHONE:
        match = re.search(r"[+(]?[\d()\-. ]{7,}\d", value)
        if match:
            value = match.group(0).strip()
        else:
            violations.append("no_phone_found")
    elif dt in (DataType.TEXT, DataType.LONG_TEXT):
        if fld.char_limit is not None and len(value) > fld.char_limit:
            value = _truncate_at_word(value, fld.char_limit)
            truncated = True

    if not violations:
        report = validate_value(fld, value)
        if not report.passed:
            violations.append(report.rule)

    return FormattedAnswer(
        value=value,
        field_id=fld.id,
        violations=tuple(violations),
        truncated=truncated,
    )


def levenshtein_distance(a: str, b: str) -> int:
    """Edit distance (re-exported where answer formatting is consumed)."""
    return levenshtein(a, b)


@dataclass(frozen=True)
class ActivityEvent:
    tool: str
    arguments: dict
    summary: str


@dataclass(frozen=True)
class AgentResult:
    final_text: str
    activity_log: tuple[ActivityEvent, ...]
    iterations: int


# Tool executors take the model-supplied arguments dict and return plain text.
ToolExecutor = Callable[[dict], str]


def build_agent_tools(
    idx: LexicalIndex,
    doc_trees: Optional[dict] = None,
    user_id: Optional[str] = None,
) -> dict[str, ToolExecutor]:
    """The two agent tools: knowledge-base search and document inventory.

    search_knowledge_base routes personal-scope queries through the document
    trees (tree_navigate) and institutional ones through tiered retrieval.
    """
    from .doctree import tree_navigate

    trees = doc_trees or {}

    def search_knowledge_base(args: dict) -> str:
        query = str(args.get("query", ""))
        scope = str(args.get("scope", "personal"))
        if scope == "personal":
            lines = []
            for doc_name in sorted(trees):
                for hit in tree_navigate(trees[doc_name], query):
                    lines.append(
                        f"{doc_name} :: {hit.title} "
                        f"(pages {hit.page_range[0]}-{hit.page_range[1]})\n"
                        f"{hit.extracted_text}"
                    )
            return "\n---\n".join(lines) if lines else "no matching sections"
        scored = idx.tiered_retrieve(
            RetrievalRequest(query=query, top_k=10, user_scope=user_id)
        )
        if not scored:
            return "no results"
        return "\n---\n".join(
            f"[{s.chunk.source_type.value}] {s.chunk.text}" for s in scored
        )

    def list_documents(args: dict) -> str:
        names = sorted(trees)
        return "\n".join(names) if names else "no documents uploaded"

    return {
        "search_knowledge_base": search_knowledge_base,
        "list_documents": list_documents,
    }


def run_agent_loop(
    conversation: list[Message],
    tools: dict[str, ToolExecutor],
    model: ModelClient,
    max_iters: int,
) -> AgentResult:
    """Alternate model calls and tool executions until text or the cap."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    specs = tuple(ToolSpec(name=name) for name in sorted(tools))
    messages = list(conversation)
    activity: list[ActivityEvent] = []
    for iteration in range(1, max_iters + 1):
        response = model.complete(
            ModelRequest(system_text="", messages=tuple(messages), tools=specs)
        )
        if response.text is not None:
            return AgentResult(
                final_text=response.text,
                activity_log=tuple(activity),
                iterations=iteration,
            )
        call = response.tool_call
        if call.name not in tools:
            raise UnknownTool(call.name)
        result = tools[call.name](call.arguments)
        activity.append(
            ActivityEvent(
                tool=call.name,
                arguments=call.arguments,
                summary=f"consulted {call.name}",
            )
        )
        messages.append(Message(role="assistant", content=f"<tool_call:{call.name}>"))
        messages.append(Message(role="tool", content=result))
    return AgentResult(
        final_text=REFUSAL_TOKEN, activity_log=tuple(activity), iterations=max_iters
    )


@dataclass(frozen=True)
class FormQuestion:
    descriptor: FieldDescriptor
    question: str


@dataclass(frozen=True)
class FillConfig:
    model: ModelClient
    user_id: Optional[str] = None
    top_k: int = 5
    mapping: MappingConfig = MappingConfig()
    citation_threshold: float = CITATION_RELEVANCE_THRESHOLD


@dataclass
class FillRow:
    question: str
    field_id: Optional[str]
    status: str  # Filled | Refused | Unmapped | Violation | Hidden
    value: Optional[str] = None
    answer_text: Optional[str] = None
    citations: tuple[str, ...] = ()
    violations: tuple[str, ...] = ()
    citation_report: Optional[CitationReport] = None


@dataclass
class FillReport:
    rows: list[FillRow]
    visible: int
    filled: int
    fill_rate: Optional[float]

    @property
    def no_visible_fields(self) -> bool:
        return self.visible == 0


def fill_form(
    form: list[FormQuestion],
    profile_index: LexicalIndex,
    schema: CanonicalSchema,
    cfg: FillConfig,
) -> FillReport:
    """Map, retrieve, synthesize, validate, and format every visible question.

    Conditional logic is consulted before each question using the values
    filled so far; hidden fields never issue a retrieval or model request.
    """
    graph = condlogic.build_dependency_graph(schema)
    state = condlogic.evaluate_visibility(graph, condlogic.FormState(), schema)
    cache = MappingCache()
    rows: list[FillRow] = []

    for item in form:
        mapping = map_field(item.descriptor, schema, cfg.mapping, cache)
        if mapping.tier is MappingTier.UNMAPPED:
            rows.append(FillRow(question=item.question, field_id=None, status="Unmapped"))
            continue
        fid = mapping.field_id
        if state.visibility.get(fid) is condlogic.Visibility.HIDDEN:
            rows.append(FillRow(question=item.question, field_id=fid, status="Hidden"))
            continue

        fld = schema.fields[fid]
        query = construct_query(fld, item.question)
        scored = profile_index.search(
            RetrievalRequest(query=query, top_k=cfg.top_k, user_scope=cfg.user_id)
        )
        chunks = [s.chunk for s in scored]
        draft = synthesize(query, fld, chunks, cfg.model)

        if not draft.refused and fld.data_type is DataType.LONG_TEXT:
            # Long-form answers must be verbatim excerpts of cited evidence.
            answer = draft.plain_text()
            cited = [profile_index.get(cid) for cid in draft.citations]
            if not any(c is not None and answer in c.text for c in cited):
                draft = Draft(answer_text="", citations=(), refused=True)

        if draft.refused:
            rows.append(FillRow(question=item.question, field_id=fid, status="Refused"))
            continue

        formatted = format_answer(draft, fld)
        report = validate_citations(draft, profile_index, cfg.citation_threshold)
        status = "Violation" if formatted.violations else "Filled"
        rows.append(
            FillRow(
                question=item.question,
                field_id=fid,
                status=status,
                value=formatted.value,
                answer_text=draft.answer_text,
                citations=draft.citations,
                violations=formatted.violations,
                citation_report=report,
            )
        )
        if status == "Filled":
            delta = condlogic.on_field_change(graph, state, fid, formatted.value, schema)
            state = delta.state

    visible = sum(r.status != "Hidden" for r in rows)
    filled = sum(r.status == "Filled" for r in rows)
    return FillReport(
        rows=rows,
        visible=visible,
        filled=filled,
        fill_rate=(filled / visible) if visible else None,
    )


def present_answer(draft: Draft, idx: LexicalIndex) -> dict:
    """Presentation JSON: answer text, citations, authority-ordered sources."""
    tier_rank = {"Official": 0, "Faq": 1, "Community": 2, "Personal": 3}
    citations = []
    for n, cid in enumerate(draft.citations, start=1):
        chunk = idx.get(cid)
        citations.append(
            {
                "n": n,
                "chunk_id": cid,
                "source_type": chunk.source_type.value if chunk else None,
                "source_url": chunk.source_url if chunk else None,
                "snippet": (chunk.text[:200] if chunk else None),
            }
        )
    sources = sorted(
        (dict(c) for c in citations),
        key=lambda c: (tier_rank.get(c["source_type"], 9), c["n"]),
    )
    return {
        "answer_text": draft.answer_text,
        "citations": citations,
        "sources": sources,
    }
