"""Flat exact-search vector store with directory persistence.

At corpus scale (tens of documents) exact cosine search is cheap, fully
deterministic, and trivially equal to a brute-force oracle, which matters
more here than ANN speed. Layout on disk:

    store/
      manifest.json   dimension, chunk count, embedder fingerprint
      vectors.f32     little-endian float32, row-major
      chunks.jsonl    one chunk (text + metadata) per line
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..config import RetrievalConfig
from ..errors import DimensionMismatch, IngestError
from .chunking import Chunk, chunk_document
from .embedding import Embedder

VALID_DESIGNS = {"rct", "controlled", "observational", "opinion", "unknown"}


@dataclass
class DocumentSpec:
    """One corpus manifest entry."""

    path: str
    study_design: str = "unknown"
    topics: list = field(default_factory=list)
    primary_metric: Optional[str] = None
    threshold_heavy: Optional[bool] = None


def load_manifest(path) -> list[DocumentSpec]:
    """Parse a JSONL corpus manifest; errors carry line numbers."""
    p = Path(path)
    if not p.exists():
        raise IngestError(f"manifest not found: {p}")
    specs = []
    errors = []
    with open(p, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(f"{p.name}:{lineno}: invalid JSON: {exc}")
                continue
            doc_path = obj.get("path")
            if not doc_path:
                errors.append(f"{p.name}:{lineno}: missing 'path'")
                continue
            resolved = Path(doc_path)
            if not resolved.is_absolute():
                resolved = p.parent / resolved
            if not resolved.exists():
                errors.append(f"{p.name}:{lineno}: document not found: {resolved}")
                continue
            design = obj.get("study_design", "unknown")
            if design not in VALID_DESIGNS:
                errors.append(f"{p.name}:{lineno}: unknown study_design {design!r}")
                continue
            specs.append(
                DocumentSpec(
                    path=str(resolved),
                    study_design=design,
                    topics=list(obj.get("topics", [])),
                    primary_metric=obj.get("primary_metric"),
                    threshold_heavy=obj.get("threshold_heavy"),
                )
            )
    if errors:
        raise IngestError("manifest errors:\n" + "\n".join(errors))
    return specs


class VectorStore:
    def __init__(self, dimension: int, embedder_fingerprint: str = ""):
        self.dimension = dimension
        self.embedder_fingerprint = embedder_fingerprint
        self.chunks: list[Chunk] = []
        self._vectors = np.zeros((0, dimension), dtype=np.float32)

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    def add(self, chunks: Sequence[Chunk], vectors: np.ndarray) -> None:
        vectors = np.asarray(vectors)
        if vectors.shape != (len(chunks), self.dimension):
            raise DimensionMismatch(
                f"got vectors {vectors.shape}, store dimension is {self.dimension}"
            )
        self.chunks.extend(chunks)
        self._vectors = np.vstack([self._vectors, vectors.astype(np.float32)])

    def search(self, query_vec: np.ndarray, top_k: int, threshold: float) -> list[tuple[Chunk, float]]:
        """Exact cosine top-k above the similarity threshold.

        Ties break deterministically on (source_file, page, chunk_id).
        """
        if len(self.chunks) == 0:
            return []
        q = np.asarray(query_vec, dtype=np.float64)
        if q.shape != (self.dimension,):
            raise DimensionMismatch(f"query has shape {q.shape}, expected ({self.dimension},)")
        sims = self._vectors.astype(np.float64) @ q
        order = sorted(
            range(len(self.chunks)),
            key=lambda i: (
                -sims[i],
                self.chunks[i].source_file,
                self.chunks[i].page if self.chunks[i].page is not None else -1,
                self.chunks[i].chunk_id,
            ),
        )
        out = []
        for i in order:
            if sims[i] < threshold:
                continue
            out.append((self.chunks[i], float(sims[i])))
            if len(out) == top_k:
                break
        return out

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        manifest = {
            "dimension": self.dimension,
            "count": len(self.chunks),
            "embedder": self.embedder_fingerprint,
        }
        with open(d / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        vecs = np.ascontiguousarray(self._vectors, dtype="<f4")
        (d / "vectors.f32").write_bytes(vecs.tobytes())
        with open(d / "chunks.jsonl", "w", encoding="utf-8") as fh:
            for c in self.chunks:
                fh.write(json.dumps(c.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory) -> "VectorStore":
        d = Path(directory)
        try:
            with open(d / "manifest.json", "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
        except OSError as exc:
            raise IngestError(f"cannot open store at {d}: {exc}") from exc
        store = cls(dimension=manifest["dimension"],
                    embedder_fingerprint=manifest.get("embedder", ""))
        raw = (d / "vectors.f32").read_bytes()
        vecs = np.frombuffer(raw, dtype="<f4")
        count = manifest["count"]
        if vecs.size != count * store.dimension:
            raise DimensionMismatch(
                f"store at {d} has {vecs.size} floats, expected {count}x{store.dimension}"
            )
        store._vectors = vecs.reshape(count, store.dimension).copy()
        with open(d / "chunks.jsonl", "r", encoding="utf-8") as fh:
            store.chunks = [Chunk.from_dict(json.loads(line)) for line in fh if line.strip()]
        if len(store.chunks) != count:
            raise IngestError(f"store at {d}: chunk count mismatch")
        return store


def index_corpus(
    docs: Sequence[DocumentSpec],
    embedder: Embedder,
    cfg: RetrievalConfig = RetrievalConfig(),
) -> VectorStore:
    """Chunk and embed every manifest document into a fresh store."""
    store = VectorStore(dimension=embedder.dimension,
                        embedder_fingerprint=embedder.fingerprint())
    next_id = 0
    for spec in docs:
        text = Path(spec.path).read_text(encoding="utf-8")
        chunks = chunk_document(
            text,
            cfg,
            source_file=Path(spec.path).name,
            study_design=spec.study_design,
            topics=spec.topics,
            primary_metric=spec.primary_metric,
            threshold_heavy=spec.threshold_heavy,
            start_chunk_id=next_id,
        )
        if not chunks:
            continue
        next_id = chunks[-1].chunk_id + 1
        vectors = embedder.embed_batch([c.text for c in chunks])
        store.add(chunks, vectors)
    return store
