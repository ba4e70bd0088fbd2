"""Corpus readers and writers: SemEval ABSA XML, brat standoff, canonical JSONL."""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import replace
from xml.sax.saxutils import quoteattr, escape

from .tokenizer import tokenize
from .types import AspectSpan, CorpusError, Sentence, Token, normalize_polarity


def _text(data):
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


# SemEval ABSA XML

def parse_semeval_xml(data):
    try:
        root = ET.fromstring(data)
    except ET.ParseError as err:
        line, col = err.position
        raise CorpusError(f"malformed XML at line {line}, column {col}: {err}") from None
    sentences = []
    for idx, node in enumerate(root.iter("sentence")):
        sid = node.get("id", str(idx))
        text_node = node.find("text")
        text = (text_node.text or "") if text_node is not None else ""
        spans = {}
        for term in node.iter("aspectTerm"):
            try:
                start, end = int(term.get("from")), int(term.get("to"))
            except (TypeError, ValueError):
                raise CorpusError(f"sentence {sid}: aspectTerm without integer from/to") from None
            surface = term.get("term", "")
            if text[start:end] != surface:
                raise CorpusError(
                    f"sentence {sid}: offsets [{start}, {end}) give {text[start:end]!r}, "
                    f"term attribute is {surface!r}")
            spans[(start, end)] = AspectSpan(start, end, surface, normalize_polarity(term.get("polarity")))
        try:
            sentences.append(Sentence(text, tokenize(text), sorted(spans.values(), key=lambda s: s.start), sid))
        except CorpusError as err:
            raise CorpusError(f"sentence {sid}: {err}") from None
    return sentences


def write_semeval_xml(sentences):
    out = ["<?xml version='1.0' encoding='UTF-8'?>", "<sentences>"]
    for i, s in enumerate(sentences):
        out.append(f"  <sentence id={quoteattr(s.source_id or str(i))}>")
        out.append(f"    <text>{escape(s.text)}</text>")
        if s.spans:
            out.append("    <aspectTerms>")
            for sp in s.spans:
                out.append(
                    f"      <aspectTerm term={quoteattr(sp.term)} polarity={quoteattr(sp.polarity)} "
                    f"from=\"{sp.start}\" to=\"{sp.end}\"/>")
            out.append("    </aspectTerms>")
        out.append("  </sentence>")
    out.append("</sentences>")
    return ("\n".join(out) + "\n").encode("utf-8")


# brat standoff

_T_LINE = re.compile(r"^(T\d+)\t(\S+) ([\d ;]+)\t(.*)$")
_A_LINE = re.compile(r"^([AM]\d+)\t(\S+) (T\d+)(?: (\S+))?$")


def parse_brat(txt_data, ann_data, doc_id="doc"):
    """Sentence-per-line ``.txt`` plus ``.ann`` standoff -> sentences.

    Span offsets in the ``.ann`` are document-level; they are rebased onto the
    line that contains them.
    """
    text = _text(txt_data)
    lines = []
    offset = 0
    for raw in text.split("\n"):
        lines.append((offset, raw))
        offset += len(raw) + 1

    entities = {}
    sentiments = {}
    for lineno, line in enumerate(_text(ann_data).splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        m = _T_LINE.match(line)
        if m:
            tid, _etype, offsets, surface = m.groups()
            frags = [tuple(int(v) for v in frag.split()) for frag in offsets.split(";")]
            if any(len(f) != 2 for f in frags):
                raise CorpusError(f"{doc_id}.ann line {lineno}: bad offsets {offsets!r}")
            entities[tid] = (frags[0][0], frags[-1][1], surface, lineno)
            continue
        m = _A_LINE.match(line)
        if m:
            _aid, _attr, target, value = m.groups()
            sentiments[target] = (normalize_polarity(value or ""), lineno)
            continue
        if line[0] in "T":
            raise CorpusError(f"{doc_id}.ann line {lineno}: cannot parse {line!r}")
        # relations, events and notes carry nothing we use

    for target, (_, lineno) in sentiments.items():
        if target not in entities:
            raise CorpusError(f"{doc_id}.ann line {lineno}: attribute references unknown entity {target}")

    per_line = {i: [] for i in range(len(lines))}
    for tid, (start, end, surface, lineno) in entities.items():
        for i, (base, raw) in enumerate(lines):
            if base <= start <= base + len(raw):
                break
        else:
            raise CorpusError(f"{doc_id}.ann line {lineno}: offsets [{start}, {end}) beyond text")
        if end > base + len(raw):
            raise CorpusError(f"{doc_id}.ann line {lineno}: {tid} [{start}, {end}) crosses a line boundary")
        local = (start - base, end - base)
        if raw[local[0]:local[1]] != surface and ";" not in surface:
            raise CorpusError(
                f"{doc_id}.ann line {lineno}: {tid} text {raw[local[0]:local[1]]!r} != {surface!r}")
        polarity = sentiments.get(tid, ("none", 0))[0]
        per_line[i].append(AspectSpan(local[0], local[1], raw[local[0]:local[1]], polarity))

    sentences = []
    for i, (base, raw) in enumerate(lines):
        if not raw.strip():
            if per_line[i]:
                raise CorpusError(f"{doc_id}: annotation on empty line {i + 1}")
            continue
        spans = sorted(per_line[i], key=lambda s: s.start)
        sentences.append(Sentence(raw, tokenize(raw), spans, f"{doc_id}:{i + 1}"))
    return sentences


def write_brat(sentences):
    """Inverse of :func:`parse_brat`; returns ``(txt_bytes, ann_bytes)``."""
    txt_lines, ann = [], []
    base = 0
    tid = aid = 0
    for s in sentences:
        for sp in s.spans:
            tid += 1
            ann.append(f"T{tid}\tAspect {base + sp.start} {base + sp.end}\t{sp.term}")
            if sp.polarity != "none":
                aid += 1
                ann.append(f"A{aid}\tSentiment T{tid} {sp.polarity}")
        txt_lines.append(s.text)
        base += len(s.text) + 1
    txt = "\n".join(txt_lines) + "\n"
    return txt.encode("utf-8"), ("\n".join(ann) + ("\n" if ann else "")).encode("utf-8")


# canonical JSON lines

def sentence_to_record(s):
    rec = {
        "id": s.source_id,
        "text": s.text,
        "tokens": [],
        "spans": [{"start": sp.start, "end": sp.end, "term": sp.term, "polarity": sp.polarity} for sp in s.spans],
    }
    for t in s.tokens:
        tok = {"surface": t.surface, "start": t.start, "end": t.end, "pos": t.pos, "chunk": t.chunk}
        if t.pred_iob is not None:
            tok["pred_iob"] = t.pred_iob
        rec["tokens"].append(tok)
    if s.weight != 1.0:
        rec["weight"] = s.weight
    return rec


def sentence_from_record(rec):
    tokens = [Token(t["surface"], t["start"], t["end"], t.get("pos"), t.get("chunk"), t.get("pred_iob"))
              for t in rec.get("tokens", [])]
    if not tokens and rec.get("text"):
        tokens = tokenize(rec["text"])
    spans = [AspectSpan(sp["start"], sp["end"], sp["term"], normalize_polarity(sp.get("polarity", "none")))
             for sp in rec.get("spans", [])]
    return Sentence(rec["text"], tokens, spans, rec.get("id", ""), float(rec.get("weight", 1.0)))


def dumps_canonical(sentences):
    return "".join(json.dumps(sentence_to_record(s), ensure_ascii=False) + "\n" for s in sentences)


def loads_canonical(data):
    sentences = []
    for lineno, line in enumerate(_text(data).splitlines(), 1):
        if not line.strip():
            continue
        try:
            sentences.append(sentence_from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError, CorpusError) as err:
            raise CorpusError(f"canonical corpus line {lineno}: {err}") from None
    return sentences


def read_canonical(path):
    with open(path, encoding="utf-8") as fh:
        return loads_canonical(fh.read())


def write_canonical(sentences, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(sentences))


def attach_annotations(sentences, conll_data):
    """Attach POS and chunk tags from a ``token POS CHUNK`` column file.

    Sentences are separated by blank lines and must match token counts.
    """
    blocks, cur = [], []
    for line in _text(conll_data).splitlines():
        if not line.strip():
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cols = line.split()
        if len(cols) < 3:
            raise CorpusError(f"annotation line needs token, POS and chunk columns: {line!r}")
        cur.append(cols)
    if cur:
        blocks.append(cur)
    if len(blocks) != len(sentences):
        raise CorpusError(f"{len(blocks)} annotation blocks for {len(sentences)} sentences")
    out = []
    for s, block in zip(sentences, blocks):
        if len(block) != len(s.tokens):
            raise CorpusError(f"{s.source_id}: {len(block)} annotated tokens, sentence has {len(s.tokens)}")
        toks = [replace(t, pos=cols[1], chunk=cols[2]) for t, cols in zip(s.tokens, block)]
        out.append(replace(s, tokens=tuple(toks)))
    return out
