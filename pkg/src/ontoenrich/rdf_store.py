"""N-Triples ingestion and an indexed in-memory triple store.

The store keeps triples in insertion order and maintains three nested
indexes (subject/predicate, predicate/object, object/subject) holding
positions into that order, so every pattern lookup can be served from an
index and still report results in the order triples were inserted.

Lookups are metered by a :class:`ScanBudget`: each candidate triple the
store examines costs one unit, which makes search cut-offs deterministic.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from itertools import chain
from typing import IO, Iterable, Iterator, NamedTuple, Union
from urllib.parse import unquote

from .errors import NTriplesError

RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
RDFS_COMMENT = "http://www.w3.org/2000/01/rdf-schema#comment"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

_IRI_FORBIDDEN = set('<>"{}|^`\\')
_LANG_RE = re.compile(r"[a-zA-Z]+(?:-[a-zA-Z0-9]+)*")
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True, slots=True)
class Term:
    """An IRI or a literal. Blank nodes are not modelled."""

    kind: str
    value: str
    lang: str | None = None
    datatype: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "iri":
            if not self.value:
                raise ValueError("IRI must be non-empty")
            if any(c.isspace() or c in "<>" for c in self.value):
                raise ValueError(f"IRI contains whitespace or angle bracket: {self.value!r}")
            if self.lang is not None or self.datatype is not None:
                raise ValueError("IRI terms carry no language tag or datatype")
        elif self.kind == "literal":
            if self.lang is not None and self.datatype is not None:
                raise ValueError("literal cannot have both a language tag and a datatype")
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"

    @property
    def is_literal(self) -> bool:
        return self.kind == "literal"

    def n3(self) -> str:
        if self.kind == "iri":
            return f"<{_escape_iri(self.value)}>"
        out = f'"{_escape_literal(self.value)}"'
        if self.lang is not None:
            out += f"@{self.lang}"
        elif self.datatype is not None:
            out += f"^^<{_escape_iri(self.datatype)}>"
        return out

    def __str__(self) -> str:
        return self.n3()


def IRI(value: str) -> Term:
    return Term("iri", value)


def Literal(value: str, lang: str | None = None, datatype: str | None = None) -> Term:
    return Term("literal", value, lang, datatype)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if not self.subject.is_iri:
            raise ValueError("triple subject must be an IRI")
        if not self.predicate.is_iri:
            raise ValueError("triple predicate must be an IRI")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def local_name(iri: str) -> str:
    """Return the fragment or last path segment of ``iri``, percent-decoded."""
    for sep in ("#", "/", ":"):
        head, found, tail = iri.rpartition(sep)
        if found and tail:
            return unquote(tail)
    return unquote(iri)


def normalize_name(text: str) -> str:
    """Case-fold and map ``_``/``-`` to spaces, collapsing runs of whitespace."""
    text = text.replace("_", " ").replace("-", " ")
    return " ".join(text.casefold().split())


# --------------------------------------------------------------------------
# N-Triples grammar
# --------------------------------------------------------------------------


class _LineError(Exception):
    def __init__(self, message: str, col: int) -> None:
        self.message = message
        self.col = col


class _LineParser:
    __slots__ = ("text", "pos")

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def fail(self, message: str, col: int | None = None) -> _LineError:
        return _LineError(message, self.pos if col is None else col)

    def skip_ws(self) -> None:
        text = self.text
        while self.pos < len(text) and text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, n: int = 1) -> str:
        return self.text[self.pos:self.pos + n]

    def parse(self) -> Triple | None:
        self.skip_ws()
        if self.at_end() or self.peek() == "#":
            return None

        start = self.pos
        ch = self.peek()
        if ch == "<":
            subject = self.iri()
        elif ch == '"':
            raise self.fail("literal in subject position")
        elif self.peek(2) == "_:":
            raise self.fail("blank nodes are not supported")
        else:
            raise self.fail("expected subject IRI")

        self.skip_ws()
        if self.peek() != "<":
            raise self.fail("predicate must be an IRI")
        predicate = self.iri()

        self.skip_ws()
        ch = self.peek()
        if ch == "<":
            obj = IRI(self.iri())
        elif ch == '"':
            obj = self.literal()
        elif self.peek(2) == "_:":
            raise self.fail("blank nodes are not supported")
        else:
            raise self.fail("expected object IRI or literal")

        self.skip_ws()
        if self.peek() != ".":
            raise self.fail("missing terminating '.'")
        self.pos += 1
        self.skip_ws()
        if not self.at_end() and self.peek() != "#":
            raise self.fail("unexpected content after '.'")
        try:
            return Triple(IRI(subject), IRI(predicate), obj)
        except ValueError as exc:  # pragma: no cover - guarded by the grammar above
            raise self.fail(str(exc), start) from None

    def uchar(self) -> str:
        # self.pos sits on the 'u' or 'U' after a backslash
        width = 4 if self.text[self.pos] == "u" else 8
        digits = self.text[self.pos + 1:self.pos + 1 + width]
        if len(digits) != width or any(c not in "0123456789abcdefABCDEF" for c in digits):
            raise self.fail("invalid unicode escape", self.pos - 1)
        code = int(digits, 16)
        if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
            raise self.fail("unicode escape out of range", self.pos - 1)
        self.pos += 1 + width
        return chr(code)

    def iri(self) -> str:
        start = self.pos
        self.pos += 1
        text = self.text
        out: list[str] = []
        while True:
            if self.pos >= len(text):
                raise self.fail("unterminated IRI", start)
            c = text[self.pos]
            if c == ">":
                self.pos += 1
                break
            if c == "\\":
                self.pos += 1
                if self.pos < len(text) and text[self.pos] in "uU":
                    decoded = self.uchar()
                    if decoded.isspace() or decoded in "<>":
                        raise self.fail("IRI escape decodes to a forbidden character", start)
                    out.append(decoded)
                    continue
                raise self.fail("invalid escape in IRI", self.pos - 1)
            if c in _IRI_FORBIDDEN or ord(c) <= 0x20:
                raise self.fail(f"character {c!r} not allowed in IRI", self.pos)
            out.append(c)
            self.pos += 1
        value = "".join(out)
        if not value:
            raise self.fail("empty IRI", start)
        return value

    def literal(self) -> Term:
        start = self.pos
        self.pos += 1
        text = self.text
        out: list[str] = []
        while True:
            if self.pos >= len(text):
                raise self.fail("unterminated literal", start)
            c = text[self.pos]
            if c == '"':
                self.pos += 1
                break
            if c == "\\":
                self.pos += 1
                esc = text[self.pos:self.pos + 1]
                if esc in ("u", "U"):
                    out.append(self.uchar())
                    continue
                if esc in _ECHAR:
                    out.append(_ECHAR[esc])
                    self.pos += 1
                    continue
                raise self.fail("invalid escape in literal", self.pos - 1)
            out.append(c)
            self.pos += 1
        value = "".join(out)

        if self.peek() == "@":
            m = _LANG_RE.match(text, self.pos + 1)
            if m is None:
                raise self.fail("malformed language tag")
            self.pos = m.end()
            return Literal(value, lang=m.group(0))
        if self.peek(2) == "^^":
            self.pos += 2
            if self.peek() != "<":
                raise self.fail("datatype must be an IRI")
            return Literal(value, datatype=self.iri())
        return Literal(value)


Source = Union[bytes, str, IO[bytes], IO[str], Iterable[bytes]]


def _iter_lines(source: Source) -> Iterator[bytes]:
    if isinstance(source, str):
        data = source.encode("utf-8")
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
        data = raw.encode("utf-8") if isinstance(raw, str) else raw
    else:
        data = b"".join(source)
    # keep line terminators so byte offsets stay exact
    return iter(data.splitlines(keepends=True))


def parse_ntriples(
    source: Source,
    *,
    lenient: bool = False,
    errors: list[NTriplesError] | None = None,
) -> list[Triple]:
    """Parse N-Triples text into a list of triples.

    By default the first malformed line raises :class:`NTriplesError`. With
    ``lenient=True`` bad lines are skipped; their errors are appended to
    ``errors`` when a list is supplied.
    """
    triples: list[Triple] = []
    offset = 0
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line_offset = offset
        offset += len(raw)
        body = raw.rstrip(b"\r\n")
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            err = NTriplesError("invalid UTF-8", lineno, line_offset + exc.start)
            if not lenient:
                raise err from None
            if errors is not None:
                errors.append(err)
            continue
        try:
            triple = _LineParser(text).parse()
        except _LineError as exc:
            byte_col = len(text[:exc.col].encode("utf-8"))
            err = NTriplesError(exc.message, lineno, line_offset + byte_col)
            if not lenient:
                raise err from None
            if errors is not None:
                errors.append(err)
            continue
        if triple is not None:
            triples.append(triple)
    return triples


def _escape_literal(value: str) -> str:
    out = []
    for c in value:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20 or ord(c) == 0x7F:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


def _escape_iri(value: str) -> str:
    return "".join(
        f"\\u{ord(c):04X}" if c in _IRI_FORBIDDEN or ord(c) <= 0x20 else c for c in value
    )


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    return "".join(t.n3() + "\n" for t in triples)


# --------------------------------------------------------------------------
# Store
# --------------------------------------------------------------------------


@dataclass
class ScanBudget:
    """Caps how many candidate triples a search may examine.

    ``max_triples_scanned=None`` means unlimited. ``max_seconds`` optionally
    adds a wall-clock cap measured from construction.
    """

    max_triples_scanned: int | None = None
    consumed: int = 0
    max_seconds: float | None = None
    _started: float = field(default_factory=time.monotonic, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.max_triples_scanned is not None and self.max_triples_scanned < 0:
            raise ValueError("max_triples_scanned must be non-negative")

    @property
    def exhausted(self) -> bool:
        if self.max_triples_scanned is not None and self.consumed >= self.max_triples_scanned:
            return True
        if self.max_seconds is not None and time.monotonic() - self._started >= self.max_seconds:
            return True
        return False

    def consume(self) -> None:
        self.consumed += 1


class Match(NamedTuple):
    triples: list[Triple]
    truncated: bool


class TripleStore:
    """Deduplicating triple store with SPO/POS/OSP indexes.

    Build it single-threaded; once loaded it is read-only and may be shared
    between threads as long as each caller passes its own ``ScanBudget``.
    """

    def __init__(self, triples: Iterable[Triple] = ()) -> None:
        self._triples: list[Triple] = []
        self._position: dict[Triple, int] = {}
        self._spo: dict[Term, dict[Term, list[int]]] = {}
        self._pos: dict[Term, dict[Term, list[int]]] = {}
        self._osp: dict[Term, dict[Term, list[int]]] = {}
        self._labels: dict[str, list[str]] = {}
        for t in triples:
            self.insert(t)

    @classmethod
    def from_ntriples(cls, source: Source, **kwargs) -> "TripleStore":
        return cls(parse_ntriples(source, **kwargs))

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t: object) -> bool:
        return t in self._position

    def index_of(self, t: Triple) -> int:
        return self._position[t]

    def insert(self, t: Triple) -> bool:
        """Add ``t``; returns False when it was already present."""
        if t in self._position:
            return False
        i = len(self._triples)
        self._triples.append(t)
        self._position[t] = i
        self._spo.setdefault(t.subject, {}).setdefault(t.predicate, []).append(i)
        self._pos.setdefault(t.predicate, {}).setdefault(t.object, []).append(i)
        self._osp.setdefault(t.object, {}).setdefault(t.subject, []).append(i)

        self._index_name(local_name(t.subject.value), t.subject.value)
        if t.object.is_iri:
            self._index_name(local_name(t.object.value), t.object.value)
        elif t.predicate.value == RDFS_LABEL:
            self._index_name(t.object.value, t.subject.value)
        return True

    def _index_name(self, name: str, iri: str) -> None:
        key = normalize_name(name)
        if not key:
            return
        bucket = self._labels.setdefault(key, [])
        if iri not in bucket:
            bucket.append(iri)

    def _candidates(self, s: Term | None, p: Term | None, o: Term | None) -> Iterable[int]:
        if s is not None:
            by_p = self._spo.get(s, {})
            if p is not None:
                return by_p.get(p, ())
            if o is not None:
                return self._osp.get(o, {}).get(s, ())
            return sorted(chain.from_iterable(by_p.values()))
        if p is not None:
            by_o = self._pos.get(p, {})
            if o is not None:
                return by_o.get(o, ())
            return sorted(chain.from_iterable(by_o.values()))
        if o is not None:
            return sorted(chain.from_iterable(self._osp.get(o, {}).values()))
        return range(len(self._triples))

    def match(
        self,
        s: Term | str | None = None,
        p: Term | str | None = None,
        o: Term | None = None,
        budget: ScanBudget | None = None,
    ) -> Match:
        """Return triples matching every bound position, in insertion order.

        Plain strings for ``s`` and ``p`` are taken as IRIs. Each candidate
        pulled from an index costs one budget unit; when the budget runs out
        with candidates left, the result is cut short and ``truncated`` is set.
        """
        if isinstance(s, str):
            s = IRI(s)
        if isinstance(p, str):
            p = IRI(p)
        out: list[Triple] = []
        for i in self._candidates(s, p, o):
            if budget is not None:
                if budget.exhausted:
                    return Match(out, True)
                budget.consume()
            t = self._triples[i]
            if s is not None and t.subject != s:
                continue
            if p is not None and t.predicate != p:
                continue
            if o is not None and t.object != o:
                continue
            out.append(t)
        return Match(out, False)

    def comment_of(self, resource: str) -> str | None:
        """First ``rdfs:comment`` of ``resource``, else its first ``rdfs:label``."""
        subject = IRI(resource)
        for pred in (RDFS_COMMENT, RDFS_LABEL):
            for t in self.match(subject, pred).triples:
                if t.object.is_literal:
                    return t.object.value
        return None

    def resolve_by_name(self, name: str) -> list[str]:
        """IRIs whose label or local name equals ``name`` after normalization."""
        if not name:
            raise ValueError("name must be non-empty")
        return list(self._labels.get(normalize_name(name), ()))

    def names_of(self, resource: str) -> set[str]:
        """All normalized names under which ``resource`` is resolvable."""
        names = {normalize_name(local_name(resource))}
        for t in self.match(resource, RDFS_LABEL).triples:
            if t.object.is_literal:
                names.add(normalize_name(t.object.value))
        names.discard("")
        return names

    def neighbors(self, resource: str) -> list[str]:
        """Distinct IRIs sharing a triple with ``resource`` (either direction)."""
        node = IRI(resource)
        seen: dict[str, None] = {}
        positions = sorted(
            chain(
                chain.from_iterable(self._spo.get(node, {}).values()),
                chain.from_iterable(self._osp.get(node, {}).values()),
            )
        )
        for i in positions:
            t = self._triples[i]
            other = t.object if t.subject == node else t.subject
            if other.is_iri and other != node:
                seen.setdefault(other.value, None)
        return list(seen)


def load_store(paths: Iterable[str], *, lenient: bool = False) -> TripleStore:
    """Build one store from several N-Triples files, in the given order."""
    store = TripleStore()
    for path in paths:
        with open(path, "rb") as fh:
            for t in parse_ntriples(fh, lenient=lenient):
                store.insert(t)
    return store
