from hrvreason.config import RetrievalConfig
from hrvreason.knowledge.chunking import chunk_document, detect_threshold_heavy

CFG = RetrievalConfig()


def words(n, prefix="w"):
    return " ".join(f"{prefix}{i}" for i in range(n))


def test_exact_chunk_size_single_chunk():
    chunks = chunk_document(words(1000), CFG, source_file="a.txt")
    assert len(chunks) == 1
    assert len(chunks[0].text.split()) == 1000


def test_overlap_arithmetic_two_chunks():
    chunks = chunk_document(words(1800), CFG, source_file="a.txt")
    assert len(chunks) == 2
    first = chunks[0].text.split()
    second = chunks[1].text.split()
    assert first == [f"w{i}" for i in range(1000)]
    assert second == [f"w{i}" for i in range(800, 1800)]
    # 200-token overlap between consecutive chunks
    assert first[-200:] == second[:200]


def test_empty_document():
    assert chunk_document("", CFG) == []
    assert chunk_document("   \n  ", CFG) == []


def test_short_document_one_chunk():
    chunks = chunk_document("one two three", CFG)
    assert len(chunks) == 1
    assert chunks[0].text == "one two three"


def test_sentence_boundary_preferred_within_tolerance():
    # sentence ends at token 950 (inside the 10% window before 1000)
    toks = [f"w{i}" for i in range(1800)]
    toks[949] = "end."
    chunks = chunk_document(" ".join(toks), CFG)
    assert chunks[0].text.split()[-1] == "end."
    assert len(chunks[0].text.split()) == 950
    # next chunk starts 200 tokens back from the cut
    assert chunks[1].text.split()[0] == "w750"


def test_sentence_boundary_outside_tolerance_ignored():
    toks = [f"w{i}" for i in range(1800)]
    toks[880] = "end."  # before the 900..999 window
    chunks = chunk_document(" ".join(toks), CFG)
    assert len(chunks[0].text.split()) == 1000


def test_chunk_ids_and_metadata_propagate():
    chunks = chunk_document(
        words(2500), CFG, source_file="doc.txt", study_design="rct",
        topics=["rmssd", "vagal"], primary_metric="RMSSD", start_chunk_id=5,
    )
    assert [c.chunk_id for c in chunks] == list(range(5, 5 + len(chunks)))
    assert all(c.study_design == "rct" for c in chunks)
    assert all(c.topics == ["rmssd", "vagal"] for c in chunks)
    assert all(c.primary_metric == "RMSSD" for c in chunks)


def test_form_feed_pages():
    doc = words(10, "a") + "\f" + words(10, "b")
    chunks = chunk_document(doc, CFG)
    assert chunks[0].page == 1


def test_threshold_heavy_detection():
    text = "normal values: RMSSD > 40 ms in adults and SDNN < 30 ms suggests risk"
    assert detect_threshold_heavy(text)
    assert not detect_threshold_heavy("RMSSD > 40 ms appears once here")
    assert not detect_threshold_heavy("no absolute cutoffs are given at all")
    assert detect_threshold_heavy("HR above 100 bpm and ratio exceeding 3.0 % of total")


def test_threshold_heavy_override():
    text = "RMSSD > 40 ms and SDNN < 30 ms and HR > 100 bpm"
    chunks = chunk_document(text, CFG, threshold_heavy=False)
    assert chunks[0].threshold_heavy is False
