import random

import pytest

from groundfill import resources
from groundfill.chunker import ChunkConfig, SourceType, chunk_text
from groundfill.index import LexicalIndex
from groundfill.schema import (
    CanonicalField,
    CanonicalSchema,
    DataType,
    FormatKind,
    FormatRule,
)


@pytest.fixture(scope="session")
def reference_schema():
    return resources.reference_schema()


def make_field(
    fid: str,
    intent: str = "",
    data_type: DataType = DataType.TEXT,
    keywords=("placeholder",),
    **kwargs,
) -> CanonicalField:
    return CanonicalField(
        id=fid,
        intent=intent or fid.replace(".", " "),
        data_type=data_type,
        keywords=tuple(keywords),
        **kwargs,
    )


def make_schema(*fields: CanonicalField) -> CanonicalSchema:
    return CanonicalSchema(version="t", fields={f.id: f for f in fields})


def number_field(fid: str, lo: float, hi: float, **kwargs) -> CanonicalField:
    return make_field(
        fid,
        data_type=DataType.NUMBER,
        format=FormatRule(kind=FormatKind.NUMERIC_RANGE, min_value=lo, max_value=hi),
        **kwargs,
    )


def index_texts(texts: list[str], source_type=SourceType.OFFICIAL, user_id=None) -> LexicalIndex:
    """Small helper: one chunk per text, indexed."""
    idx = LexicalIndex()
    cfg = ChunkConfig(min_tokens=5, max_tokens=10_000, overlap_tokens=0)
    chunks = []
    for i, text in enumerate(texts):
        chunks.extend(
            chunk_text(
                text,
                cfg,
                institution="fixture",
                page_id=f"t{i}",
                source_url=f"https://example.edu/t{i}",
                page_title=f"t{i}",
                source_type=source_type,
                user_id=user_id,
            )
        )
    idx.index_chunks(chunks)
    return idx


def seeded_rng(seed: int = 1234) -> random.Random:
    return random.Random(seed)
