from __future__ import annotations

from .tags import snap_span


def corpus_stats(sentences):
    """Descriptive counts in the style of a corpus comparison table.

    Aspects per sentence is given over all sentences and over sentences with
    at least one aspect; aspect counts are given as mentions and as distinct
    (lowercased) terms.
    """
    n = len(sentences)
    mentions = sum(len(s.spans) for s in sentences)
    with_aspects = sum(1 for s in sentences if s.spans)
    words = sum(len(s.tokens) for s in sentences)
    aspect_words = 0
    for s in sentences:
        for sp in s.spans:
            if s.tokens:
                first, last = snap_span(sp, s.tokens)
                aspect_words += last - first
            else:
                aspect_words += len(sp.term.split())
    return {
        "sentences": n,
        "aspects": mentions,
        "distinct_aspect_terms": len({sp.term.lower() for s in sentences for sp in s.spans}),
        "mean_words_per_sentence": words / n if n else 0.0,
        "mean_words_per_aspect": aspect_words / mentions if mentions else 0.0,
        "aspects_per_sentence_all": mentions / n if n else 0.0,
        "aspects_per_sentence_with_aspects": mentions / with_aspects if with_aspects else 0.0,
        "pct_sentences_with_aspects": 100.0 * with_aspects / n if n else 0.0,
    }


def format_stats(stats):
    rows = [
        ("# Sentences", f"{stats['sentences']}"),
        ("# Aspects (mentions)", f"{stats['aspects']}"),
        ("# Aspects (distinct terms)", f"{stats['distinct_aspect_terms']}"),
        ("Mean words/sentence", f"{stats['mean_words_per_sentence']:.2f}"),
        ("Mean words/aspect", f"{stats['mean_words_per_aspect']:.2f}"),
        ("Aspects/sentence (all)", f"{stats['aspects_per_sentence_all']:.2f}"),
        ("Aspects/sentence (with aspects)", f"{stats['aspects_per_sentence_with_aspects']:.2f}"),
        ("Sentences with aspects", f"{stats['pct_sentences_with_aspects']:.2f}%"),
    ]
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)
