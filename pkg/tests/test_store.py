import json

import numpy as np
import pytest

from hrvreason.config import RetrievalConfig
from hrvreason.errors import DimensionMismatch, IngestError
from hrvreason.knowledge.chunking import Chunk
from hrvreason.knowledge.embedding import HashingEmbedder
from hrvreason.knowledge.store import DocumentSpec, VectorStore, index_corpus, load_manifest

CFG = RetrievalConfig()


def test_hashing_embedder_is_deterministic_and_unit():
    e = HashingEmbedder(dimension=64, seed=3)
    v1 = e.embed_batch(["sample entropy of heart rate"])[0]
    v2 = e.embed_batch(["sample entropy of heart rate"])[0]
    assert np.array_equal(v1, v2)
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-12)
    other = HashingEmbedder(dimension=64, seed=4).embed_batch(["sample entropy of heart rate"])[0]
    assert not np.array_equal(v1, other)


def test_embedder_whitespace_normalization():
    e = HashingEmbedder(dimension=32, seed=0)
    a = e.embed_batch(["heart  rate\nvariability"])[0]
    b = e.embed_batch(["heart rate variability"])[0]
    assert np.array_equal(a, b)


def _store_with(texts, dim=32, seed=0):
    e = HashingEmbedder(dimension=dim, seed=seed)
    store = VectorStore(dimension=dim, embedder_fingerprint=e.fingerprint())
    chunks = [Chunk(text=t, source_file=f"f{i}.txt", page=1, chunk_id=i) for i, t in enumerate(texts)]
    store.add(chunks, e.embed_batch(texts))
    return store, e


def test_search_matches_bruteforce_scan(rng):
    texts = [f"passage about topic {i} " + " ".join(chr(97 + (i + j) % 26) * 3 for j in range(8))
             for i in range(200)]
    store, e = _store_with(texts, dim=64)
    q = e.embed_batch(["passage about topic 17"])[0]
    got = store.search(q, top_k=10, threshold=-1.0)
    sims = store.vectors.astype(np.float64) @ q
    brute = sorted(range(len(texts)), key=lambda i: (-sims[i], f"f{i}.txt", 1, i))[:10]
    assert [c.chunk_id for c, _ in got] == brute
    assert [s for _, s in got] == sorted((float(sims[i]) for i in brute), reverse=True)


def test_search_threshold_and_k():
    store, e = _store_with(["alpha beta", "alpha gamma", "delta epsilon"])
    q = e.embed_batch(["alpha beta"])[0]
    all_hits = store.search(q, top_k=5, threshold=-1.0)
    assert len(all_hits) == 3
    top = store.search(q, top_k=2, threshold=-1.0)
    assert len(top) == 2
    assert top[0][1] >= top[1][1]
    filtered = store.search(q, top_k=5, threshold=0.999)
    assert [c.chunk_id for c, _ in filtered] == [0]


def test_empty_store_returns_nothing():
    store = VectorStore(dimension=8)
    assert store.search(np.zeros(8), top_k=5, threshold=0.3) == []


def test_dimension_mismatch():
    store, _ = _store_with(["a b c"])
    with pytest.raises(DimensionMismatch):
        store.search(np.zeros(7), top_k=1, threshold=0.0)
    with pytest.raises(DimensionMismatch):
        store.add([Chunk(text="x", source_file="f", chunk_id=9)], np.zeros((1, 7)))


def test_save_load_roundtrip_identical_search(tmp_path):
    texts = [f"chunk {i} on heart rate variability and retrieval" for i in range(25)]
    store, e = _store_with(texts, dim=48, seed=2)
    store.save(tmp_path / "store")
    again = VectorStore.load(tmp_path / "store")
    assert again.dimension == store.dimension
    assert len(again) == len(store)
    q = e.embed_batch(["chunk 7"])[0]
    a = store.search(q, top_k=5, threshold=0.0)
    b = again.search(q, top_k=5, threshold=0.0)
    assert [(c.chunk_id, s) for c, s in a] == [(c.chunk_id, s) for c, s in b]


def test_save_is_byte_stable(tmp_path):
    texts = ["one two three", "four five six"]
    store, _ = _store_with(texts)
    store.save(tmp_path / "s1")
    store.save(tmp_path / "s2")
    for name in ("manifest.json", "vectors.f32", "chunks.jsonl"):
        assert (tmp_path / "s1" / name).read_bytes() == (tmp_path / "s2" / name).read_bytes()


def test_index_corpus_and_manifest(tmp_path):
    docs_dir = tmp_path / "docs"
    docs_dir.mkdir()
    (docs_dir / "a.txt").write_text("rmssd reflects vagal tone. " * 50)
    (docs_dir / "b.txt").write_text("lf hf ratio reliability concerns. " * 50)
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text(
        json.dumps({"path": "docs/a.txt", "study_design": "rct",
                    "topics": ["rmssd"], "primary_metric": "RMSSD"}) + "\n"
        + json.dumps({"path": "docs/b.txt", "study_design": "opinion",
                      "topics": ["lf-hf"], "primary_metric": "LF_HF"}) + "\n"
    )
    specs = load_manifest(manifest)
    assert len(specs) == 2
    store = index_corpus(specs, HashingEmbedder(dimension=32, seed=0), CFG)
    assert len(store) >= 2
    designs = {c.source_file: c.study_design for c in store.chunks}
    assert designs == {"a.txt": "rct", "b.txt": "opinion"}


def test_manifest_errors_carry_line_numbers(tmp_path):
    manifest = tmp_path / "m.jsonl"
    manifest.write_text('{"path": "missing.txt"}\n{"nope": 1}\n')
    with pytest.raises(IngestError) as exc:
        load_manifest(manifest)
    msg = str(exc.value)
    assert "m.jsonl:1" in msg and "m.jsonl:2" in msg


def test_empty_corpus_empty_store():
    store = index_corpus([], HashingEmbedder(dimension=16), CFG)
    assert len(store) == 0
