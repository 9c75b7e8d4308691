"""Similarity retrieval and evidence-governance re-ranking.

Retrieval is plain cosine top-k above a threshold. Governance then re-scores
each passage by a composite domain weight: topic overlap with the query,
the reliability of the passage's primary metric, a study-design modifier,
and a flat penalty for threshold-heavy passages. Governance never adds or
drops passages; it is a pure re-ordering by adjusted score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..config import RetrievalConfig
from .chunking import Chunk
from .embedding import Embedder
from .queries import Query
from .store import VectorStore


@dataclass
class ScoredPassage:
    chunk: Chunk
    s_raw: float
    w_domain: float = 1.0
    s_adj: float = 0.0

    def __post_init__(self):
        if self.s_adj == 0.0:
            self.s_adj = self.s_raw * self.w_domain

    def to_dict(self) -> dict:
        return {
            "source_file": self.chunk.source_file,
            "page": self.chunk.page,
            "study_design": self.chunk.study_design,
            "primary_metric": self.chunk.primary_metric,
            "threshold_heavy": self.chunk.threshold_heavy,
            "chunk_id": self.chunk.chunk_id,
            "s_raw": self.s_raw,
            "w_domain": self.w_domain,
            "s_adj": self.s_adj,
            "text": self.chunk.text,
        }


def retrieve(
    query: Query | str,
    store: VectorStore,
    embedder: Embedder,
    cfg: RetrievalConfig = RetrievalConfig(),
) -> list[ScoredPassage]:
    """Top-k passages by raw cosine similarity, threshold applied first."""
    text = query.text if isinstance(query, Query) else query
    if len(store) == 0:
        return []
    qvec = embedder.embed_batch([text])[0]
    hits = store.search(qvec, top_k=cfg.top_k, threshold=cfg.similarity_threshold)
    return [ScoredPassage(chunk=c, s_raw=s, w_domain=1.0, s_adj=s) for c, s in hits]


def domain_weight(chunk: Chunk, query_topics: Iterable[str], cfg: RetrievalConfig) -> float:
    overlap = len(set(chunk.topics) & set(query_topics))
    alpha = min(cfg.topic_bonus_unit * overlap, cfg.topic_bonus_cap)
    beta = cfg.metric_weights.get(chunk.primary_metric, 0.0) if chunk.primary_metric else 0.0
    gamma = cfg.design_modifiers.get(chunk.study_design, 1.0)
    w = cfg.w_base * (1.0 + alpha) * (1.0 + beta) * gamma
    if chunk.threshold_heavy:
        w *= cfg.threshold_penalty
    return w


def govern(
    passages: Sequence[ScoredPassage],
    query_topics: Iterable[str],
    cfg: RetrievalConfig = RetrievalConfig(),
) -> list[ScoredPassage]:
    """Re-rank passages by adjusted score; the passage multiset is preserved."""
    topics = list(query_topics)
    rescored = []
    for p in passages:
        w = domain_weight(p.chunk, topics, cfg)
        rescored.append(ScoredPassage(chunk=p.chunk, s_raw=p.s_raw,
                                      w_domain=w, s_adj=p.s_raw * w))
    rescored.sort(
        key=lambda p: (
            -p.s_adj,
            p.chunk.source_file,
            p.chunk.page if p.chunk.page is not None else -1,
            p.chunk.chunk_id,
        )
    )
    return rescored
