"""Generation-stability post-processing: repetition truncation and
unicode-substitution detection."""

from __future__ import annotations

import re

_GREEK = r"Ͱ-Ͽ"
# A Greek letter glued to Latin letters inside one word.
_UNICODE_SUB = re.compile(rf"[A-Za-z][{_GREEK}]|[{_GREEK}][A-Za-z]")


def _char_run_start(text: str, max_run: int) -> int | None:
    """Start index of the first run of more than max_run identical characters."""
    m = re.search(r"(.)\1{%d,}" % max_run, text, flags=re.DOTALL)
    return m.start() if m else None


def _ngram_cut(tokens: list[str], n: int, max_repeats: int) -> int | None:
    """Token index at which the (max_repeats+1)-th consecutive n-gram copy begins."""
    total = len(tokens)
    for i in range(0, total - n * (max_repeats + 1) + 1):
        pattern = tokens[i : i + n]
        k = 1
        while tokens[i + k * n : i + (k + 1) * n] == pattern:
            k += 1
        if k > max_repeats:
            return i + max_repeats * n
    return None


def truncate_repetition(
    text: str,
    max_char_run: int = 50,
    ngram_tokens: int = 10,
    max_ngram_repeats: int = 3,
) -> tuple[str, bool]:
    """Cut degenerate repetition loops out of generated text.

    Two triggers: a run of more than max_char_run identical characters
    (truncated at the run start), and more than max_ngram_repeats
    consecutive copies of any ngram_tokens-token phrase (truncated before
    the copy that exceeds the limit). Idempotent: a second application of
    the same rules leaves the output unchanged.
    """
    truncated = False
    cut = _char_run_start(text, max_char_run)
    if cut is not None:
        text = text[:cut].rstrip()
        truncated = True
    tokens = text.split()
    tcut = _ngram_cut(tokens, ngram_tokens, max_ngram_repeats)
    if tcut is not None:
        text = " ".join(tokens[:tcut])
        truncated = True
    return text, truncated


def find_unicode_substitutions(text: str) -> list[str]:
    """Words where a Greek letter sits inside a Latin word (decoder glitch)."""
    hits = []
    for word in text.split():
        if _UNICODE_SUB.search(word):
            hits.append(word)
    return hits
