"""Layout-aware text extraction and boilerplate removal for crawled pages.

Headings become '#'-prefixed lines and list items "- " lines so the chunker
can respect section boundaries; navigation-ish elements are dropped during
parsing and repeated or link-dense blocks are removed corpus-wide.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from html.parser import HTMLParser

_HEADING_TAGS = {f"h{i}": i for i in range(1, 7)}
_SKIP_TAGS = {"script", "style", "nav", "footer", "noscript", "template"}
_LIST_TAGS = {"ul", "ol"}
_BLOCK_TAGS = {
    "p",
    "div",
    "section",
    "article",
    "table",
    "tr",
    "td",
    "th",
    "blockquote",
    "main",
    "aside",
    "form",
    "figure",
    "figcaption",
}
# Class/id tokens that mark structural boilerplate (dropped during parsing).
_BOILERPLATE_TOKENS = {"nav", "footer", "cookie-banner", "header", "menu"}

REPETITION_FRACTION = 0.5
REPETITION_MIN_PAGES = 3
LINK_DENSITY_LIMIT = 0.5


@dataclass
class TextBlock:
    text: str
    link_count: int = 0

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass
class StructuredText:
    blocks: list[TextBlock] = field(default_factory=list)

    def as_text(self) -> str:
        return "\n".join(block.text for block in self.blocks)

    def __str__(self) -> str:
        return self.as_text()


class _PageTextParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.blocks: list[TextBlock] = []
        self._skip_depth = 0
        self._heading_level = 0
        self._list_depth = 0
        self._in_list_item = False
        self._parts: list[str] = []
        self._links = 0

    def _is_boilerplate_attrs(self, attrs) -> bool:
        tokens: set[str] = set()
        for name, value in attrs:
            if name in ("class", "id") and value:
                for token in re.split(r"[\s_]+", value.lower()):
                    tokens.add(token)
        return bool(tokens & _BOILERPLATE_TOKENS)

    def _flush(self, kind: str = "p") -> None:
        text = " ".join(" ".join(self._parts).split())
        links = self._links
        self._parts = []
        self._links = 0
        if not text:
            return
        text = unicodedata.normalize("NFC", text)
        if kind == "heading":
            text = "#" * self._heading_level + " " + text
        elif kind == "li":
            text = "  " * max(self._list_depth - 1, 0) + "- " + text
        self.blocks.append(TextBlock(text=text, link_count=links))

    def handle_starttag(self, tag, attrs):
        if self._skip_depth:
            self._skip_depth += 1
            return
        if tag in _SKIP_TAGS or self._is_boilerplate_attrs(attrs):
            self._skip_depth = 1
            return
        if tag in _HEADING_TAGS:
            self._flush()
            self._heading_level = _HEADING_TAGS[tag]
        elif tag in _LIST_TAGS:
            self._flush("li" if self._in_list_item else "p")
            self._list_depth += 1
        elif tag == "li":
            self._flush("li" if self._in_list_item else "p")
            self._in_list_item = True
        elif tag in _BLOCK_TAGS:
            self._flush("li" if self._in_list_item else "p")
            self._in_list_item = False
        elif tag == "br":
            self._parts.append(" ")
        elif tag == "a":
            self._links += 1

    def handle_startendtag(self, tag, attrs):
        if tag == "br" and not self._skip_depth:
            self._parts.append(" ")

    def handle_endtag(self, tag):
        if self._skip_depth:
            self._skip_depth -= 1
            return
        if tag in _HEADING_TAGS:
            self._flush("heading")
            self._heading_level = 0
        elif tag == "li":
            self._flush("li")
            self._in_list_item = False
        elif tag in _LIST_TAGS:
            self._flush("li" if self._in_list_item else "p")
            self._in_list_item = False
            self._list_depth = max(self._list_depth - 1, 0)
        elif tag in _BLOCK_TAGS:
            self._flush("li" if self._in_list_item else "p")
            self._in_list_item = False

    def handle_data(self, data):
        if self._skip_depth:
            return
        if data.strip():
            self._parts.append(data)

    def close(self):
        super().close()
        self._flush("heading" if self._heading_level else "p")


def extract_page_text(html: str) -> StructuredText:
    """Structured text of one page; malformed HTML is parsed permissively."""
    parser = _PageTextParser()
    parser.feed(html)
    parser.close()
    return StructuredText(blocks=parser.blocks)


def remove_boilerplate(pages: list[StructuredText]) -> list[StructuredText]:
    """Drop repeated blocks (on >50% of >=3 pages) and link-dense blocks."""
    if not pages:
        return []

    repeated: set[str] = set()
    if len(pages) >= REPETITION_MIN_PAGES:
        presence: dict[str, int] = {}
        for page in pages:
            for text in {b.text for b in page.blocks}:
                presence[text] = presence.get(text, 0) + 1
        threshold = REPETITION_FRACTION * len(pages)
        repeated = {text for text, count in presence.items() if count > threshold}

    cleaned = []
    for page in pages:
        kept = [
            block
            for block in page.blocks
            if block.text not in repeated
            and block.link_count / max(1, block.word_count) <= LINK_DENSITY_LIMIT
        ]
        cleaned.append(StructuredText(blocks=kept))
    return cleaned
