"""Provider-agnostic model client contract plus the offline extractive client.

The DeterministicExtractor stands in for a hosted model in every test and
demo path: it only ever copies a sentence out of the provided context, so the
whole pipeline's grounding guarantees are checkable without network access.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Protocol, runtime_checkable

from .textutil import split_sentences, word_set

REFUSAL_TOKEN = "INSUFFICIENT_CONTEXT"

# Minimal stopword list: question scaffolding that must not count as evidence
# overlap when the extractor decides whether context supports an answer.
STOPWORDS = frozenset(
    """
    a an and are as at be by did do does for from had has have how i in is it
    its of on or our s t that the their this to was we were what when where
    which who will with your you
    original question expected format
    """.split()
)

_FORMAT_CLAUSE_RE = re.compile(r"expected format:.*$", re.IGNORECASE | re.DOTALL)
_CHUNK_MARKER_RE = re.compile(r"^\[(\d+)\]\s?", re.MULTILINE)


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class Message:
    role: str  # user | assistant | tool
    content: str


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str = ""
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict


@dataclass(frozen=True)
class ModelRequest:
    system_text: str
    messages: tuple[Message, ...]
    tools: tuple[ToolSpec, ...] = ()


@dataclass(frozen=True)
class ModelResponse:
    text: Optional[str] = None
    tool_call: Optional[ToolCall] = None

    def __post_init__(self):
        if (self.text is None) == (self.tool_call is None):
            raise ValueError("response carries exactly one of text / tool_call")


@runtime_checkable
class ModelClient(Protocol):
    def complete(self, request: ModelRequest) -> ModelResponse: ...


def content_words(text: str) -> set[str]:
    return {w for w in word_set(text) if w not in STOPWORDS}


def parse_grounding_prompt(prompt: str) -> tuple[str, list[str]]:
    """Split a synthesis prompt into (question, numbered chunk texts)."""
    question = ""
    for line in prompt.split("\n"):
        if line.lower().startswith("question:"):
            question = line[len("question:"):].strip()
            break
    context_at = prompt.lower().find("context:")
    chunk_texts: list[str] = []
    if context_at >= 0:
        context = prompt[context_at + len("context:"):]
        markers = list(_CHUNK_MARKER_RE.finditer(context))
        for i, marker in enumerate(markers):
            end = markers[i + 1].start() if i + 1 < len(markers) else len(context)
            chunk_texts.append(context[marker.end():end].strip())
    return question, chunk_texts


class DeterministicExtractor:
    """Pure extractive stand-in for an LLM behind the synthesis prompt.

    Rule: score each context chunk by content-word overlap with the question
    (the trailing "Expected format: ..." clause is scaffolding and ignored);
    answer with the highest-overlap sentence of the best chunk, citing it;
    refuse when no chunk shares a content word with the question.
    """

    def complete(self, request: ModelRequest) -> ModelResponse:
        prompt = request.messages[-1].content if request.messages else ""
        question, chunks = parse_grounding_prompt(prompt)
        question = _FORMAT_CLAUSE_RE.sub("", question)
        wanted = content_words(question)
        if not chunks or not wanted:
            return ModelResponse(text=REFUSAL_TOKEN)

        def chunk_score(text: str) -> float:
            have = content_words(text)
            if not have:
                return 0.0
            return len(wanted & have) / max(1, min(len(wanted), len(have)))

        scores = [chunk_score(text) for text in chunks]
        best = max(range(len(chunks)), key=lambda i: (scores[i], -i))
        if scores[best] == 0.0:
            return ModelResponse(text=REFUSAL_TOKEN)

        sentences = split_sentences(chunks[best])
        if not sentences:
            return ModelResponse(text=REFUSAL_TOKEN)
        overlaps = [len(wanted & content_words(s)) for s in sentences]
        pick = max(range(len(sentences)), key=lambda i: (overlaps[i], -i))
        if overlaps[pick] == 0:
            return ModelResponse(text=REFUSAL_TOKEN)
        return ModelResponse(text=f"{sentences[pick]} [{best + 1}]")


class ScriptedModel:
    """Test double that replays a fixed sequence of responses."""

    def __init__(self, responses: list[ModelResponse]):
        self._responses = list(responses)
        self.calls: list[ModelRequest] = []

    def complete(self, request: ModelRequest) -> ModelResponse:
        self.calls.append(request)
        if not self._responses:
            raise ModelError("scripted model exhausted")
        return self._responses.pop(0)
