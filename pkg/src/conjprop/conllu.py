"""CoNLL-U reading and writing.

The representation keeps everything needed to reproduce a validator-clean
file byte for byte: multiword range lines are kept verbatim and re-emitted
in place, FEATS serialize in the canonical case-insensitive key order, and
DEPS serialize sorted by head id. Columns that the toolkit never interprets
(FORM, LEMMA, UPOS, XPOS, MISC) are stored as raw strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

COLUMN_NAMES = (
    "ID", "FORM", "LEMMA", "UPOS", "XPOS",
    "FEATS", "HEAD", "DEPREL", "DEPS", "MISC",
)


class ParseError(ValueError):
    """Raised on malformed input; carries the 1-based line number and column name."""

    def __init__(self, message: str, line: int, fieldname: str | None = None):
        where = f"line {line}" if fieldname is None else f"line {line}, {fieldname}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.field = fieldname


class TokenId(NamedTuple):
    """Token index; minor > 0 marks an empty node (e.g. 8.1)."""

    major: int
    minor: int = 0

    def __str__(self) -> str:
        if self.minor:
            return f"{self.major}.{self.minor}"
        return str(self.major)

    @property
    def is_empty(self) -> bool:
        return self.minor > 0


# Head value of the artificial root.
ROOT = TokenId(0, 0)


def parse_token_id(text: str, line: int = 0, fieldname: str = "ID") -> TokenId:
    try:
        if "." in text:
            major, minor = text.split(".", 1)
            tid = TokenId(int(major), int(minor))
            if tid.minor < 1:
                raise ValueError
            return tid
        return TokenId(int(text), 0)
    except ValueError:
        raise ParseError(f"unparseable token id {text!r}", line, fieldname) from None


@dataclass
class Token:
    id: TokenId
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: dict[str, str]
    head: TokenId | None          # None on empty nodes
    deprel: str | None
    deps: list[tuple[TokenId, str]]
    misc: str

    def feats_str(self) -> str:
        if not self.feats:
            return "_"
        items = sorted(self.feats.items(), key=lambda kv: kv[0].lower())
        return "|".join(f"{k}={v}" for k, v in items)

    def deps_str(self) -> str:
        if not self.deps:
            return "_"
        ordered = sorted(self.deps, key=lambda hl: (hl[0], hl[1]))
        return "|".join(f"{h}:{label}" for h, label in ordered)


@dataclass
class Sentence:
    comments: list[str] = field(default_factory=list)
    tokens: list[Token] = field(default_factory=list)
    # multiword range lines, keyed by the token-list position they precede
    ranges: dict[int, list[str]] = field(default_factory=dict)

    @property
    def sent_id(self) -> str | None:
        for c in self.comments:
            if c.startswith("# sent_id"):
                _, _, value = c.partition("=")
                return value.strip()
        return None

    def words(self) -> list[Token]:
        """Regular tokens only, empty nodes excluded."""
        return [t for t in self.tokens if not t.id.is_empty]

    def token_by_id(self) -> dict[TokenId, Token]:
        return {t.id: t for t in self.tokens}

    def clone(self) -> "Sentence":
        tokens = [
            Token(t.id, t.form, t.lemma, t.upos, t.xpos, dict(t.feats),
                  t.head, t.deprel, list(t.deps), t.misc)
            for t in self.tokens
        ]
        return Sentence(list(self.comments), tokens,
                        {i: list(lines) for i, lines in self.ranges.items()})


def _parse_feats(text: str, line: int) -> dict[str, str]:
    if text == "_":
        return {}
    feats: dict[str, str] = {}
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ParseError(f"malformed feature {item!r}", line, "FEATS")
        if key in feats:
            raise ParseError(f"duplicate feature key {key!r}", line, "FEATS")
        feats[key] = value
    return feats


def _parse_deps(text: str, line: int) -> list[tuple[TokenId, str]]:
    if text == "_":
        return []
    deps = []
    for item in text.split("|"):
        head, sep, label = item.partition(":")
        if not sep or not label:
            raise ParseError(f"malformed deps item {item!r}", line, "DEPS")
        deps.append((parse_token_id(head, line, "DEPS"), label))
    return deps


def _parse_head(text: str, line: int) -> TokenId | None:
    if text == "_":
        return None
    tid = parse_token_id(text, line, "HEAD")
    if tid.is_empty:
        raise ParseError("HEAD cannot reference an empty node", line, "HEAD")
    return tid


def _finish_sentence(sent: Sentence, start_line: int) -> Sentence:
    if not sent.tokens:
        raise ParseError("sentence has no token lines", start_line)
    ids = {t.id for t in sent.tokens}
    expected = 1
    prev: TokenId | None = None
    for t in sent.tokens:
        if prev is not None and t.id <= prev:
            raise ParseError(f"token id {t.id} out of order", start_line, "ID")
        prev = t.id
        if not t.id.is_empty:
            if t.id.major != expected:
                raise ParseError(
                    f"token ids not contiguous: expected {expected}, got {t.id.major}",
                    start_line, "ID")
            expected += 1
    for t in sent.tokens:
        if t.head is not None and t.head != ROOT and t.head not in ids:
            raise ParseError(f"token {t.id} has dangling head {t.head}",
                             start_line, "HEAD")
        for h, _ in t.deps:
            if h != ROOT and h not in ids:
                raise ParseError(f"token {t.id} has dangling deps head {h}",
                                 start_line, "DEPS")
    return sent


def parse_corpus(text: str) -> list[Sentence]:
    """Parse a whole CoNLL-U document. Raises ParseError on the first problem."""
    sentences: list[Sentence] = []
    current = Sentence()
    start_line = 1
    in_sentence = False

    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            if in_sentence:
                sentences.append(_finish_sentence(current, start_line))
                current = Sentence()
                in_sentence = False
            continue
        if not in_sentence:
            start_line = lineno
            in_sentence = True
        if line.startswith("#"):
            if current.tokens:
                raise ParseError("comment after token lines", lineno)
            current.comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 columns, got {len(cols)}", lineno)
        if "-" in cols[0]:
            a, _, b = cols[0].partition("-")
            if not (a.isdigit() and b.isdigit() and int(a) <= int(b)):
                raise ParseError(f"malformed range id {cols[0]!r}", lineno, "ID")
            current.ranges.setdefault(len(current.tokens), []).append(line)
            continue
        tid = parse_token_id(cols[0], lineno)
        head = _parse_head(cols[6], lineno)
        if not tid.is_empty and head is None:
            raise ParseError("regular token lacks a HEAD", lineno, "HEAD")
        deprel = None if cols[7] == "_" else cols[7]
        if head is not None and deprel is None:
            raise ParseError("HEAD given but DEPREL empty", lineno, "DEPREL")
        current.tokens.append(Token(
            id=tid,
            form=cols[1],
            lemma=cols[2],
            upos=cols[3],
            xpos=cols[4],
            feats=_parse_feats(cols[5], lineno),
            head=head,
            deprel=deprel,
            deps=_parse_deps(cols[8], lineno),
            misc=cols[9],
        ))
    if in_sentence:
        sentences.append(_finish_sentence(current, start_line))
    return sentences


def token_line(t: Token) -> str:
    head = "_" if t.head is None else str(t.head)
    return "\t".join((
        str(t.id), t.form, t.lemma, t.upos, t.xpos, t.feats_str(),
        head, t.deprel if t.deprel is not None else "_",
        t.deps_str(), t.misc,
    ))


def write_sentence(sent: Sentence) -> str:
    lines: list[str] = list(sent.comments)
    for i, tok in enumerate(sent.tokens):
        lines.extend(sent.ranges.get(i, ()))
        lines.append(token_line(tok))
    lines.extend(sent.ranges.get(len(sent.tokens), ()))
    return "\n".join(lines) + "\n"


def write_corpus(sentences: Iterable[Sentence]) -> str:
    return "".join(write_sentence(s) + "\n" for s in sentences)


def read_file(path: str) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read())


def write_file(sentences: Iterable[Sentence], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_corpus(sentences))
