import string
import unicodedata

from .types import Token

_ASCII_PUNCT = set(string.punctuation)


def _is_punct(ch):
    return ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")


def tokenize(text):
    """Whitespace split, then peel leading/trailing punctuation off as
    single-character tokens. Internal punctuation (``battery-life``) stays."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        lo, hi = i, j
        lead = []
        while lo < hi and _is_punct(text[lo]):
            lead.append(Token(text[lo], lo, lo + 1))
            lo += 1
        trail = []
        while hi > lo and _is_punct(text[hi - 1]):
            trail.append(Token(text[hi - 1], hi - 1, hi))
            hi -= 1
        tokens.extend(lead)
        if lo < hi:
            tokens.append(Token(text[lo:hi], lo, hi))
        tokens.extend(reversed(trail))
        i = j
    return tokens
