"""Offset-anchored document model.

The raw text is the ground truth: every token, sentence and mention is a
span into it, and concatenating token surfaces with their recorded
whitespace reproduces the original string exactly. Offsets are Unicode
code point indices, not bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    trailing_ws: str = ""


@dataclass(frozen=True)
class SentenceSpan:
    first_token: int  # inclusive
    last_token: int   # inclusive


@dataclass(frozen=True)
class MentionSpan:
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class AbbreviationPair:
    short_form: MentionSpan
    long_form: MentionSpan


@dataclass(frozen=True)
class Document:
    text: str
    tokens: tuple[Token, ...] = ()
    sentences: tuple[SentenceSpan, ...] = ()
    # whitespace before the first token; kept off the token list so token
    # invariants stay simple
    leading_ws: str = ""

    def with_sentences(self, sentences: Iterable[SentenceSpan]) -> "Document":
        return Document(self.text, self.tokens, tuple(sentences), self.leading_ws)

    def sentence_text(self, span: SentenceSpan) -> str:
        first = self.tokens[span.first_token]
        last = self.tokens[span.last_token]
        return self.text[first.start:last.end]

    def sentence_char_span(self, span: SentenceSpan) -> tuple[int, int]:
        return (self.tokens[span.first_token].start,
                self.tokens[span.last_token].end)


def detokenize(doc: Document) -> str:
    """Reassemble the original text from the token sequence."""
    parts = [doc.leading_ws]
    for tok in doc.tokens:
        parts.append(tok.surface)
        parts.append(tok.trailing_ws)
    return "".join(parts)


def validate_document(doc: Document) -> None:
    """Check all structural invariants; raises AssertionError on violation.

    Intended for tests and debug paths, not hot loops.
    """
    prev_end = len(doc.leading_ws)
    assert doc.text.startswith(doc.leading_ws)
    for tok in doc.tokens:
        assert 0 <= tok.start < tok.end <= len(doc.text), tok
        assert tok.start == prev_end, (tok, prev_end)
        assert tok.surface == doc.text[tok.start:tok.end], tok
        assert tok.trailing_ws == "" or tok.trailing_ws.isspace(), tok
        assert doc.text[tok.end:tok.end + len(tok.trailing_ws)] == tok.trailing_ws
        prev_end = tok.end + len(tok.trailing_ws)
    assert prev_end == len(doc.text)
    assert detokenize(doc) == doc.text

    if doc.sentences:
        assert doc.sentences[0].first_token == 0
        assert doc.sentences[-1].last_token == len(doc.tokens) - 1
        prev_last = -1
        for sent in doc.sentences:
            assert sent.first_token == prev_last + 1
            assert sent.first_token <= sent.last_token
            prev_last = sent.last_token


def to_json_obj(doc: Document) -> dict:
    return {
        "text": doc.text,
        "tokens": [{"start": t.start, "end": t.end} for t in doc.tokens],
        "sentences": [
            {"first_token": s.first_token, "last_token": s.last_token}
            for s in doc.sentences
        ],
    }


def from_json_obj(obj: dict) -> Document:
    """Rebuild a Document from its JSON form.

    Surfaces and whitespace are recovered from the text and the spans; the
    gaps between consecutive token spans must be whitespace.
    """
    text = obj["text"]
    spans = [(t["start"], t["end"]) for t in obj.get("tokens", [])]
    tokens = []
    for i, (start, end) in enumerate(spans):
        nxt = spans[i + 1][0] if i + 1 < len(spans) else len(text)
        tokens.append(Token(text[start:end], start, end, text[end:nxt]))
    leading = text[:spans[0][0]] if spans else text
    sentences = tuple(
        SentenceSpan(s["first_token"], s["last_token"])
        for s in obj.get("sentences", [])
    )
    return Document(text, tuple(tokens), sentences, leading)


def write_jsonl(docs: Iterable[Document], fp) -> None:
    for doc in docs:
        fp.write(json.dumps(to_json_obj(doc), ensure_ascii=False))
        fp.write("\n")


def read_jsonl(fp) -> Iterator[tuple[Document, dict]]:
    """Yield (document, raw json object) per nonempty line.

    The raw object is passed along so callers can read extra fields
    (e.g. mention spans) that the document model does not carry.
    """
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from exc
        yield from_json_obj(obj), obj
