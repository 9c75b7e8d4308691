import pytest

from hrvreason.config import RetrievalConfig
from hrvreason.guardrails import ContradictionFlag
from hrvreason.knowledge.chunking import Chunk
from hrvreason.knowledge.governance import ScoredPassage, domain_weight, govern
from hrvreason.knowledge.queries import build_queries

from conftest import make_norm_panel

CFG = RetrievalConfig()


def test_marked_rmssd_increase_query_phrasing():
    panel = make_norm_panel({"RMSSD": 2.4})
    queries = build_queries(panel)
    assert len(queries) == 1
    q = queries[0]
    assert "RMSSD" in q.text
    assert "elevated vagal tone" in q.text
    assert "markedly" in q.text
    assert q.metric == "RMSSD" and q.kind == "state"


def test_reduced_rmssd_uses_withdrawal_phrasing():
    panel = make_norm_panel({"RMSSD": -1.2})
    q = build_queries(panel)[0]
    assert "parasympathetic withdrawal" in q.text
    assert "moderately" in q.text


def test_baseline_metrics_generate_no_queries():
    panel = make_norm_panel({"RMSSD": 0.2, "SDNN": -0.4, "MeanHR": 0.0})
    assert build_queries(panel) == []


def test_contradiction_flags_inject_warning_queries():
    panel = make_norm_panel({})
    flag = ContradictionFlag(
        pattern_id="coactivation",
        evidence=("RMSSD up", "LF_HF up"),
        injected_query_topic="sympathetic-parasympathetic coactivation",
    )
    queries = build_queries(panel, [flag])
    assert len(queries) == 1
    assert queries[0].kind == "warning"
    assert "sympathetic-parasympathetic coactivation" in queries[0].text


def test_queries_are_deterministic():
    panel = make_norm_panel({"RMSSD": 1.5, "MeanHR": -0.7, "SampEn": 0.8})
    a = build_queries(panel)
    b = build_queries(panel)
    assert [q.text for q in a] == [q.text for q in b]
    assert len(a) == 3


def _chunk(metric=None, design="unknown", topics=(), heavy=False, cid=0, src="f.txt"):
    return Chunk(text="t", source_file=src, page=1, study_design=design,
                 topics=list(topics), primary_metric=metric,
                 threshold_heavy=heavy, chunk_id=cid)


def test_domain_weight_worked_example():
    # s_raw 1.0, neutral base, no topic overlap, RMSSD metric, RCT design
    w = domain_weight(_chunk(metric="RMSSD", design="rct"), [], CFG)
    assert w == pytest.approx(1.9 * 1.08)
    passages = govern([ScoredPassage(chunk=_chunk(metric="RMSSD", design="rct"), s_raw=1.0)], [], CFG)
    assert passages[0].s_adj == pytest.approx(2.052)


def test_threshold_heavy_penalty():
    p = ScoredPassage(chunk=_chunk(metric="RMSSD", design="rct", heavy=True), s_raw=1.0)
    out = govern([p], [], CFG)
    assert out[0].s_adj == pytest.approx(2.052 * 0.85)
    assert out[0].s_adj == pytest.approx(1.7442)


def test_neutral_chunk_keeps_raw_score():
    p = ScoredPassage(chunk=_chunk(), s_raw=0.42)
    out = govern([p], [], CFG)
    assert out[0].w_domain == pytest.approx(1.0)
    assert out[0].s_adj == pytest.approx(0.42)


def test_topic_bonus_and_cap():
    topics = ["a", "b", "c", "d", "e", "f"]
    w3 = domain_weight(_chunk(topics=["a", "b", "c"]), topics, CFG)
    assert w3 == pytest.approx(1.3)
    w_all = domain_weight(_chunk(topics=topics), topics, CFG)
    assert w_all == pytest.approx(1.5)  # capped at +0.5


def test_rmssd_outranks_lfhf_at_equal_similarity():
    rmssd = ScoredPassage(chunk=_chunk(metric="RMSSD", cid=1), s_raw=0.6)
    lfhf = ScoredPassage(chunk=_chunk(metric="LF_HF", cid=0), s_raw=0.6)
    out = govern([lfhf, rmssd], [], CFG)
    assert out[0].chunk.primary_metric == "RMSSD"
    assert out[0].s_adj > out[1].s_adj


def test_govern_preserves_multiset_and_is_pure():
    passages = [
        ScoredPassage(chunk=_chunk(metric="SDNN", cid=i, src=f"{i}.txt"), s_raw=0.5 + 0.01 * i)
        for i in range(6)
    ]
    out = govern(passages, [], CFG)
    assert sorted(p.chunk.chunk_id for p in out) == list(range(6))
    assert [p.s_raw for p in passages] == [0.5 + 0.01 * i for i in range(6)]  # inputs untouched


def test_monotone_in_design_modifier():
    base = dict(metric="RMSSD")
    w_rct = domain_weight(_chunk(design="rct", **base), [], CFG)
    w_obs = domain_weight(_chunk(design="observational", **base), [], CFG)
    w_op = domain_weight(_chunk(design="opinion", **base), [], CFG)
    assert w_rct > w_obs > w_op


def test_deterministic_tie_break():
    a = ScoredPassage(chunk=_chunk(src="a.txt", cid=2), s_raw=0.5)
    b = ScoredPassage(chunk=_chunk(src="a.txt", cid=1), s_raw=0.5)
    c = ScoredPassage(chunk=_chunk(src="b.txt", cid=0), s_raw=0.5)
    out = govern([c, a, b], [], CFG)
    assert [(p.chunk.source_file, p.chunk.chunk_id) for p in out] == [
        ("a.txt", 1), ("a.txt", 2), ("b.txt", 0)
    ]
