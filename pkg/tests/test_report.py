from hrvreason.reasoning.report import metric_before, parse_report


def test_basic_template_extraction():
    text = (
        "State: HVHA\n"
        "Confidence: High\n"
        "Rationale: RMSSD (z = -1.25) indicates reduced vagal tone.\n"
        "Limitations: short recording.\n"
    )
    r = parse_report(text)
    assert r.state == "HVHA"
    assert r.confidence == "High"
    assert r.state_field_present
    assert "reduced vagal" in r.rationale
    assert r.limitations == "short recording."
    assert r.z_scores_cited == {"RMSSD": -1.25}


def test_missing_state_is_unknown():
    r = parse_report("Confidence: Low\nRationale: nothing to report.")
    assert r.state == "Unknown"
    assert not r.state_field_present


def test_invalid_state_token_is_unknown_but_present():
    r = parse_report("State: MAYBE\nConfidence: High")
    assert r.state == "Unknown"
    assert r.state_field_present


def test_multiline_rationale_stops_at_next_label():
    text = "State: LVLA\nRationale: line one\nline two\nLimitations: none"
    r = parse_report(text)
    assert r.rationale == "line one\nline two"
    assert r.limitations == "none"


def test_z_citation_window_and_first_wins():
    text = (
        "State: HVHA\n"
        "Rationale: SDNN (z = +0.62) rose. Later SDNN again (z = -9.99) "
        "should not override. MeanHR z: 1.15 also cited."
    )
    r = parse_report(text)
    assert r.z_scores_cited["SDNN"] == 0.62
    assert r.z_scores_cited["MeanHR"] == 1.15


def test_z_without_nearby_metric_is_ignored():
    r = parse_report("Rationale: overall z = 1.5 with no metric name nearby at all")
    assert r.z_scores_cited == {}


def test_metric_alias_resolution_prefers_closest():
    text = "RMSSD was high while SDNN (z = -0.4) fell"
    assert metric_before(text, text.index("-0.4")) == "SDNN"


def test_rag_citation_markers():
    text = (
        "State: HVLA\nRationale: grounded claims [RAG: lfhf_critique.txt, p.3] "
        "and [RAG: rmssd_reliability.txt, p.12]."
    )
    r = parse_report(text)
    assert r.rag_citations == [("lfhf_critique.txt", 3), ("rmssd_reliability.txt", 12)]


def test_parser_is_total_on_garbage():
    r = parse_report("")
    assert r.state == "Unknown" and r.z_scores_cited == {}
    r2 = parse_report("%%% random \x00 bytes \n\n:::")
    assert r2.state == "Unknown"


def test_confidence_defaults_low():
    r = parse_report("State: HVHA\nRationale: fine.")
    assert r.confidence == "Low"


def test_lf_hf_alias():
    r = parse_report("State: HVHA\nRationale: LF/HF ratio (z = +2.10) spiked.")
    assert r.z_scores_cited == {"LF_HF": 2.10}
