"""Lexical retrieval index: TF-IDF cosine with source-type tiering and scope.

A deliberate substitution for embedding retrieval: the Retriever contract is
small (search / tiered_retrieve) so a vector backend can slot in later.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .chunker import Chunk, SourceType
from .textutil import word_tokens

TIER_ORDER = (SourceType.OFFICIAL, SourceType.FAQ, SourceType.COMMUNITY)
DEFAULT_ESCALATION_THRESHOLD = 0.25


class DuplicateId(Exception):
    pass


class IndexLoadError(Exception):
    """Raised when the on-disk index is missing one of its two files."""


@dataclass(frozen=True)
class RetrievalRequest:
    query: str
    top_k: int = 5
    source_filter: Optional[frozenset[SourceType]] = None
    user_scope: Optional[str] = None

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class ScoredChunk:
    chunk: Chunk
    score: float


@dataclass(frozen=True)
class IndexStats:
    added: int
    total: int


def analyze(text: str) -> list[str]:
    """The index analyzer: normalized word tokens."""
    return word_tokens(text)


class LexicalIndex:
    """Inverted index over chunks; single writer, concurrent readers.

    idf(t) = ln((N + 1) / (df + 1)) + 1, recomputed on every commit; document
    vectors weight raw term frequency by idf and are cosine-normalized.
    """

    def __init__(self):
        self._chunks: dict[str, Chunk] = {}
        self._tf: dict[str, Counter] = {}
        self._postings: dict[str, dict[str, int]] = {}
        self._idf: dict[str, float] = {}
        self._norms: dict[str, float] = {}
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._chunks)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunks

    def get(self, chunk_id: str) -> Optional[Chunk]:
        return self._chunks.get(chunk_id)

    def idf(self, token: str) -> float:
        n = len(self._chunks)
        df = len(self._postings.get(token, ()))
        return math.log((n + 1) / (df + 1)) + 1.0

    def index_chunks(self, chunks: Iterable[Chunk]) -> IndexStats:
        """Add a batch; rejects the whole batch when any id already exists."""
        batch = list(chunks)
        with self._write_lock:
            seen = set()
            for chunk in batch:
                if chunk.id in self._chunks or chunk.id in seen:
                    raise DuplicateId(chunk.id)
                seen.add(chunk.id)
            for chunk in batch:
                counts = Counter(analyze(chunk.text))
                self._chunks[chunk.id] = chunk
                self._tf[chunk.id] = counts
                for token, count in counts.items():
                    self._postings.setdefault(token, {})[chunk.id] = count
            self._commit()
        return IndexStats(added=len(batch), total=len(self._chunks))

    def _commit(self) -> None:
        self._idf = {token: self.idf(token) for token in self._postings}
        self._norms = {}
        for cid, counts in self._tf.items():
            self._norms[cid] = math.sqrt(
                sum((count * self._idf[token]) ** 2 for token, count in counts.items())
            )

    def _admit(self, chunk: Chunk, req: RetrievalRequest) -> bool:
        if req.source_filter is not None and chunk.source_type not in req.source_filter:
            return False
        if chunk.user_id is not None and chunk.user_id != req.user_scope:
            return False
        return True

    def search(self, req: RetrievalRequest) -> list[ScoredChunk]:
        """TF-IDF cosine ranking; descending score, chunk-id tiebreak."""
        query_counts = Counter(analyze(req.query))
        if not query_counts:
            return []
        query_weights = {
            token: count * self.idf(token) for token, count in query_counts.items()
        }
        query_norm = math.sqrt(sum(w * w for w in query_weights.values()))
        if query_norm == 0.0:
            return []

        dots: dict[str, float] = {}
        for token, q_weight in query_weights.items():
            for cid, tf in self._postings.get(token, {}).items():
                dots[cid] = dots.get(cid, 0.0) + q_weight * tf * self._idf[token]

        scored = [
            ScoredChunk(self._chunks[cid], dot / (query_norm * self._norms[cid]))
            for cid, dot in dots.items()
            if dot > 0.0 and self._admit(self._chunks[cid], req)
        ]
        scored.sort(key=lambda s: (-s.score, s.chunk.id))
        return scored[: req.top_k]

    def _tier_search(self, tier: SourceType, req: RetrievalRequest) -> list[ScoredChunk]:
        # Separate hook so tests can count per-tier consultations.
        tier_req = RetrievalRequest(
            query=req.query,
            top_k=req.top_k,
            source_filter=frozenset({tier}),
            user_scope=req.user_scope,
        )
        return self.search(tier_req)

    def tiered_retrieve(
        self,
        req: RetrievalRequest,
        escalation_threshold: float = DEFAULT_ESCALATION_THRESHOLD,
    ) -> list[ScoredChunk]:
        """Official first, then FAQ, then Community.

        A lower tier is consulted only when the tiers above produced nothing
        confident: no results, or a top score below the escalation threshold.
        Result order preserves tier precedence, then score, then id.
        """
        results: list[ScoredChunk] = []
        for tier in TIER_ORDER:
            tier_hits = self._tier_search(tier, req)
            results.extend(tier_hits)
            if tier_hits and tier_hits[0].score >= escalation_threshold:
                break
        return results[: req.top_k]

    def text_similarity(self, a: str, b: str) -> float:
        """Cosine of two raw texts under the committed idf model."""
        counts_a = Counter(analyze(a))
        counts_b = Counter(analyze(b))
        if not counts_a or not counts_b:
            return 0.0
        weights_a = {t: c * self.idf(t) for t, c in counts_a.items()}
        weights_b = {t: c * self.idf(t) for t, c in counts_b.items()}
        norm_a = math.sqrt(sum(w * w for w in weights_a.values()))
        norm_b = math.sqrt(sum(w * w for w in weights_b.values()))
        dot = sum(w * weights_b.get(t, 0.0) for t, w in weights_a.items())
        if norm_a == 0.0 or norm_b == 0.0:
            return 0.0
        return dot / (norm_a * norm_b)

    def save(self, directory: str | Path) -> None:
        """Persist as chunks.jsonl + postings.json."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "chunks.jsonl", "w", encoding="utf-8") as fh:
            for cid in sorted(self._chunks):
                fh.write(json.dumps(self._chunks[cid].to_dict(), sort_keys=True) + "\n")
        with open(directory / "postings.json", "w", encoding="utf-8") as fh:
            json.dump(self._postings, fh, sort_keys=True)

    @classmethod
    def load(cls, directory: str | Path) -> "LexicalIndex":
        """Load a persisted index; a partial pair of files is an error."""
        directory = Path(directory)
        chunks_path = directory / "chunks.jsonl"
        postings_path = directory / "postings.json"
        present = [p for p in (chunks_path, postings_path) if p.exists()]
        if len(present) == 1:
            raise IndexLoadError(f"partial index in {directory}: only {present[0].name}")
        idx = cls()
        if not present:
            return idx
        with open(chunks_path, encoding="utf-8") as fh:
            chunks = [Chunk.from_dict(json.loads(line)) for line in fh if line.strip()]
        idx.index_chunks(chunks)
        return idx
