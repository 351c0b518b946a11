"""Text normalization and string similarity shared by the graph and NLU layers.

Normalization is the single canonical form used everywhere a surface string is
compared: Unicode NFKC, lowercased, surrounding whitespace stripped, internal
whitespace runs collapsed to one space. It is idempotent.
"""

from __future__ import annotations

import unicodedata

# Punctuation that terminates a clause for negation scoping. Covers ASCII and
# common CJK fullwidth marks.
CLAUSE_BREAKERS = set(".,;:!?()\"'" + "。，；：！？、（）【】“”‘’…")


def normalize(surface: str) -> str:
    """Canonical surface form: NFKC, lowercase, whitespace collapsed."""
    folded = unicodedata.normalize("NFKC", surface).lower()
    return " ".join(folded.split())


def edit_distance(a: str, b: str) -> int:
    """Plain Levenshtein distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    """Normalized edit similarity in [0, 1]: 1 - distance / max length."""
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - edit_distance(a, b) / longest


def is_word_char(ch: str) -> bool:
    """ASCII letters/digits count as word characters for boundary checks.

    CJK text carries no spaces, so treating only ASCII alphanumerics as word
    characters lets short cues like "no" respect English word boundaries while
    multi-character CJK cues still match by containment.
    """
    return ch.isascii() and ch.isalnum()


def contains_word(haystack: str, needle: str) -> bool:
    """True if ``needle`` occurs in ``haystack`` delimited by word boundaries."""
    start = 0
    while True:
        idx = haystack.find(needle, start)
        if idx < 0:
            return False
        before_ok = idx == 0 or not (is_word_char(haystack[idx - 1]) and is_word_char(needle[0]))
        end = idx + len(needle)
        after_ok = end == len(haystack) or not (is_word_char(haystack[end - 1]) and is_word_char(haystack[end]))
        if before_ok and after_ok:
            return True
        start = idx + 1
