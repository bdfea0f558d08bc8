"""Structure-aware retrieval over personal documents: section trees.

Builds a tree of titled, page-ranged nodes from heading patterns and answers
queries by selecting nodes instead of scoring flat chunks, so hits carry a
section title and page range for attribution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .similarity import word_overlap
from .textutil import split_sentences

_MD_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*)$")
DEFAULT_SELECT_THRESHOLD = 0.2

# summarizer(title, body) -> str; None selects the deterministic fallback.
Summarizer = Callable[[str, str], str]


@dataclass
class TreeNode:
    node_id: str
    title: str
    page_start: int
    page_end: int
    summary: str = ""
    children: list["TreeNode"] = field(default_factory=list)

    def __post_init__(self):
        if self.page_start > self.page_end:
            raise ValueError("page_start must be <= page_end")

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class DocTree:
    root: TreeNode
    page_text: list[str]


@dataclass(frozen=True)
class SectionHit:
    node_id: str
    title: str
    page_range: tuple[int, int]
    extracted_text: str


def _heading_level(line: str) -> Optional[tuple[int, str]]:
    """Markdown '#' headings, or short ALL-CAPS lines treated as level 1."""
    stripped = line.strip()
    if not stripped:
        return None
    match = _MD_HEADING_RE.match(stripped)
    if match:
        return len(match.group(1)), match.group(2).strip()
    letters = [c for c in stripped if c.isalpha()]
    if (
        letters
        and len(stripped) <= 60
        and len(stripped.split()) <= 6
        and stripped == stripped.upper()
    ):
        return 1, stripped.title()
    return None


def _default_summary(title: str, body: str) -> str:
    sentences = split_sentences(body)
    return sentences[0] if sentences else title


def build_doc_tree(
    pages: list[str], summarizer: Optional[Summarizer] = None
) -> DocTree:
    """Tree of heading-delimited sections; root spans all pages."""
    if not pages:
        raise ValueError("build_doc_tree needs at least one page")
    summarize = summarizer or _default_summary

    # (level, title, page_index, body_lines)
    sections: list[tuple[int, str, int, list[str]]] = []
    preamble: list[str] = []
    for page_index, page in enumerate(pages):
        for line in page.split("\n"):
            heading = _heading_level(line)
            if heading:
                sections.append((heading[0], heading[1], page_index, []))
            elif sections:
                sections[-1][3].append(line)
            else:
                preamble.append(line)

    root = TreeNode(
        node_id="n0",
        title="document",
        page_start=0,
        page_end=len(pages) - 1,
        summary="",
    )
    stack: list[tuple[int, TreeNode]] = [(0, root)]
    counter = 0
    nodes: list[tuple[TreeNode, int, str]] = []  # (node, level, body)
    for level, title, page_index, body_lines in sections:
        while stack and stack[-1][0] >= level:
            stack.pop()
        parent = stack[-1][1] if stack else root
        counter += 1
        node = TreeNode(
            node_id=f"n{counter}",
            title=title,
            page_start=page_index,
            page_end=page_index,
            summary="",
        )
        parent.children.append(node)
        stack.append((level, node))
        nodes.append((node, level, "\n".join(body_lines).strip()))

    # A section ends where the next same-or-shallower heading begins.
    for i, (node, level, body) in enumerate(nodes):
        end = len(pages) - 1
        for later_node, later_level, _ in nodes[i + 1:]:
            if later_level <= level:
                end = max(node.page_start, later_node.page_start)
                break
        node.page_end = end
        node.summary = summarize(node.title, body)
        # Parents must span their children.
        for child in node.children:
            node.page_end = max(node.page_end, child.page_end)

    root.summary = summarize(root.title, "\n".join(preamble).strip() or pages[0])
    return DocTree(root=root, page_text=list(pages))


def tree_navigate(
    tree: DocTree,
    query: str,
    selector: Optional[Callable[[str, TreeNode], bool]] = None,
    threshold: float = DEFAULT_SELECT_THRESHOLD,
) -> list[SectionHit]:
    """Select matching nodes and extract their page-range text.

    The deterministic selector matches on word overlap between the query and
    the node's title + summary; when an ancestor and its descendant both
    match, only the deepest match is kept.
    """

    def default_selector(q: str, node: TreeNode) -> bool:
        return word_overlap(q, f"{node.title} {node.summary}") >= threshold

    select = selector or default_selector
    matched = {node.node_id for node in tree.root.walk() if select(query, node)}

    def has_matched_descendant(node: TreeNode) -> bool:
        return any(
            child.node_id in matched or has_matched_descendant(child)
            for child in node.children
        )

    hits: list[SectionHit] = []
    for node in tree.root.walk():
        if node.node_id not in matched or has_matched_descendant(node):
            continue
        extracted = "\n".join(tree.page_text[node.page_start : node.page_end + 1])
        hits.append(
            SectionHit(
                node_id=node.node_id,
                title=node.title,
                page_range=(node.page_start, node.page_end),
                extracted_text=extracted,
            )
        )
    hits.sort(key=lambda h: (h.page_range[0], h.node_id))
    return hits
