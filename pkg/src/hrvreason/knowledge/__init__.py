from .chunking import Chunk, chunk_document, detect_threshold_heavy
from .embedding import Embedder, HashingEmbedder, HttpEmbedder
from .store import VectorStore, DocumentSpec, index_corpus, load_manifest
from .queries import Query, build_queries
from .governance import ScoredPassage, retrieve, govern

__all__ = [
    "Chunk",
    "chunk_document",
    "detect_threshold_heavy",
    "Embedder",
    "HashingEmbedder",
    "HttpEmbedder",
    "VectorStore",
    "DocumentSpec",
    "index_corpus",
    "load_manifest",
    "Query",
    "build_queries",
    "ScoredPassage",
    "retrieve",
    "govern",
]
