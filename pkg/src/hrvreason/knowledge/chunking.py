"""Corpus chunking with sentence-boundary preference.

Tokens are whitespace-delimited words, which keeps chunk accounting
reproducible across platforms. Consecutive chunks overlap by a fixed token
count; a split prefers the latest sentence boundary inside a tolerance
window just before the nominal cut.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..config import RetrievalConfig

_SENTENCE_END = re.compile(r'[.!?]["\')\]]*$')

# An absolute-threshold claim: comparator, number, unit.
_THRESHOLD_PATTERN = re.compile(
    r"(?:[<>]=?|≤|≥|above|below|over|under|exceed(?:s|ing)?)\s*"
    r"\d+(?:\.\d+)?\s*(?:ms|bpm|hz|%)",
    re.IGNORECASE,
)


@dataclass
class Chunk:
    text: str
    source_file: str
    page: Optional[int] = None
    study_design: str = "unknown"
    topics: list = field(default_factory=list)
    primary_metric: Optional[str] = None
    threshold_heavy: bool = False
    chunk_id: int = 0

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "source_file": self.source_file,
            "page": self.page,
            "study_design": self.study_design,
            "topics": list(self.topics),
            "primary_metric": self.primary_metric,
            "threshold_heavy": self.threshold_heavy,
            "chunk_id": self.chunk_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Chunk":
        return cls(**d)


def detect_threshold_heavy(text: str, min_hits: int = 2) -> bool:
    """A passage leaning on absolute cutoffs carries >= min_hits threshold claims."""
    return len(_THRESHOLD_PATTERN.findall(text)) >= min_hits


def _paged_tokens(doc_text: str) -> list[tuple[str, int]]:
    """(token, page) pairs; form feeds separate pages, first page is 1."""
    out = []
    for page_no, page_text in enumerate(doc_text.split("\f"), start=1):
        for tok in page_text.split():
            out.append((tok, page_no))
    return out


def chunk_document(
    doc_text: str,
    cfg: RetrievalConfig = RetrievalConfig(),
    *,
    source_file: str = "",
    study_design: str = "unknown",
    topics: Optional[list] = None,
    primary_metric: Optional[str] = None,
    threshold_heavy: Optional[bool] = None,
    start_chunk_id: int = 0,
) -> list[Chunk]:
    """Split one document into overlapping chunks with attached metadata.

    `threshold_heavy=None` means detect from the chunk text; an explicit
    boolean overrides detection for the whole document.
    """
    paged = _paged_tokens(doc_text)
    if not paged:
        return []
    tokens = [t for t, _ in paged]
    pages = [p for _, p in paged]
    n = len(tokens)
    window = max(1, int(round(cfg.sentence_tolerance * cfg.chunk_size)))

    chunks: list[Chunk] = []
    start = 0
    cid = start_chunk_id
    while True:
        nominal_end = start + cfg.chunk_size
        if nominal_end >= n:
            end = n
        else:
            end = nominal_end
            lo = max(start + 1, nominal_end - window)
            for j in range(nominal_end - 1, lo - 1, -1):
                if _SENTENCE_END.search(tokens[j]):
                    end = j + 1
                    break
        text = " ".join(tokens[start:end])
        chunks.append(
            Chunk(
                text=text,
                source_file=source_file,
                page=pages[start],
                study_design=study_design,
                topics=sorted(topics or []),
                primary_metric=primary_metric,
                threshold_heavy=(
                    detect_threshold_heavy(text) if threshold_heavy is None else threshold_heavy
                ),
                chunk_id=cid,
            )
        )
        cid += 1
        if end >= n:
            break
        start = max(end - cfg.chunk_overlap, start + 1)
    return chunks
