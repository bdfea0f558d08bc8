"""Document trees: construction from headings, navigation, extraction."""

from groundfill.doctree import build_doc_tree, tree_navigate

RESUME_PAGE = """EDUCATION
Riverbend High School, expected diploma in June.
EXPERIENCE
Stockroom assistant at the food cooperative.
AWARDS
Regional science fair, first place for a water filter design.
"""


class TestBuildDocTree:
    def test_resume_three_sections(self):
        tree = build_doc_tree([RESUME_PAGE])
        titles = [c.title for c in tree.root.children]
        assert titles == ["Education", "Experience", "Awards"]
        assert tree.root.page_start == 0 and tree.root.page_end == 0

    def test_unstructured_page_is_root_only(self):
        tree = build_doc_tree(["just a plain paragraph with no headings at all"])
        assert tree.root.children == []

    def test_nested_markdown_headings(self):
        pages = [
            "# Testing\nIntro line.\n## Scores\nNumbers here.",
            "## Dates\nOn page two.",
        ]
        tree = build_doc_tree(pages)
        top = tree.root.children[0]
        assert top.title == "Testing"
        assert [c.title for c in top.children] == ["Scores", "Dates"]
        scores, dates = top.children
        assert scores.page_start == 0
        assert dates.page_start == 1
        assert top.page_end == 1  # parent spans its children

    def test_summaries_use_first_sentence(self):
        tree = build_doc_tree(["# Fees\nThe fee is waived for aided students. More text."])
        assert tree.root.children[0].summary == "The fee is waived for aided students."

    def test_custom_summarizer(self):
        tree = build_doc_tree(["# A\nbody"], summarizer=lambda title, body: f"<{title}>")
        assert tree.root.children[0].summary == "<A>"

    def test_node_ids_unique(self):
        tree = build_doc_tree([RESUME_PAGE])
        ids = [n.node_id for n in tree.root.walk()]
        assert len(ids) == len(set(ids))


class TestTreeNavigate:
    def test_awards_query_hits_awards_node_only(self):
        tree = build_doc_tree([RESUME_PAGE])
        hits = tree_navigate(tree, "awards")
        assert [h.title for h in hits] == ["Awards"]

    def test_no_match_is_empty(self):
        tree = build_doc_tree([RESUME_PAGE])
        assert tree_navigate(tree, "zebra xylophone") == []

    def test_deepest_match_preferred(self):
        pages = ["# Testing results\nAll testing results live here.\n## SAT results\nTotal shown."]
        tree = build_doc_tree(pages)
        hits = tree_navigate(tree, "sat results")
        assert [h.title for h in hits] == ["SAT results"]

    def test_extracted_text_is_substring_of_page_range(self):
        pages = ["# One\nfirst page text", "more on page two", "# Two\nthird page"]
        tree = build_doc_tree(pages)
        for query in ("one first page", "two third"):
            for hit in tree_navigate(tree, query):
                joined = "\n".join(
                    tree.page_text[hit.page_range[0] : hit.page_range[1] + 1]
                )
                assert hit.extracted_text in joined

    def test_custom_selector(self):
        tree = build_doc_tree([RESUME_PAGE])
        hits = tree_navigate(tree, "x", selector=lambda q, n: n.title == "Experience")
        assert [h.title for h in hits] == ["Experience"]
