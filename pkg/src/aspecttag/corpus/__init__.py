"""Corpus ingestion, tag schemes, embeddings and features."""

from .embeddings import (EmbeddingFormatError, EmbeddingTable, PAD_ID, UNK_ID, context_window,
                         load_embeddings, window_indices)
from .features import (FeatureTable, FeatureWarning, N_FEATURES, linguistic_features, pred_bits,
                       sentence_features)
from .readers import (attach_annotations, dumps_canonical, loads_canonical, parse_brat,
                      parse_semeval_xml, read_canonical, write_brat, write_canonical,
                      write_semeval_xml)
from .stats import corpus_stats, format_stats
from .tags import (TagScheme, chunks, decode_labels, decode_tags, encode_labels, encode_tags,
                   sentiment_disagreements, split_label, strip_sentiment)
from .tokenizer import tokenize
from .types import AlignmentWarning, AspectSpan, CorpusError, Sentence, Token, normalize_polarity
