from hrvreason.reasoning.textproc import find_unicode_substitutions, truncate_repetition


def test_char_run_over_fifty_truncates_at_run_start():
    text = "valid analysis text " + "a" * 51
    out, truncated = truncate_repetition(text)
    assert truncated
    assert out == "valid analysis text"


def test_char_run_of_exactly_fifty_untouched():
    text = "valid analysis text " + "a" * 50
    out, truncated = truncate_repetition(text)
    assert not truncated
    assert out == text


def test_char_run_mid_text():
    text = "head " + "x" * 80 + " tail"
    out, truncated = truncate_repetition(text)
    assert truncated
    assert out == "head"


def test_ngram_repeat_truncated_before_fourth_copy():
    phrase = "the quick brown fox jumps over the lazy dog again"  # 10 tokens
    text = " ".join([phrase] * 4) + " trailing words here"
    out, truncated = truncate_repetition(text)
    assert truncated
    assert out == " ".join([phrase] * 3)


def test_three_ngram_repeats_allowed():
    phrase = "the quick brown fox jumps over the lazy dog again"
    text = " ".join([phrase] * 3)
    out, truncated = truncate_repetition(text)
    assert not truncated
    assert out == text


def test_truncation_is_idempotent():
    phrase = "alpha beta gamma delta epsilon zeta eta theta iota kappa"
    text = " ".join([phrase] * 6) + " " + "z" * 90
    once, t1 = truncate_repetition(text)
    twice, t2 = truncate_repetition(once)
    assert t1 and not t2
    assert once == twice


def test_clean_text_passes_through():
    text = "State: HVHA\nConfidence: High\nRationale: nothing repeats here."
    out, truncated = truncate_repetition(text)
    assert out == text and not truncated


def test_unicode_substitution_detection():
    hits = find_unicode_substitutions("the parαsympathetic branch and prρcessing")
    assert len(hits) == 2
    assert "parαsympathetic" in hits[0]
    # standalone Greek symbols are fine
    assert find_unicode_substitutions("α = 0.5 scaling exponent") == []
