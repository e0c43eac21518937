"""In-memory RDF: terms, triples, a three-way indexed graph, N-Triples I/O.

No blank nodes and no language tags.  Turtle is emitted for people to read;
N-Triples is the interchange format and the only one parsed back.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Iterator, Union

from .vocab import Iri, TermRegistry

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_DOUBLE = Iri(XSD + "double")
XSD_DATETIME = Iri(XSD + "dateTime")

_DOUBLE_LEX = re.compile(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?$")
_DATETIME_LEX = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
DATETIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


class TermError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PlainLiteral:
    lexical: str

    def n3(self) -> str:
        return f'"{_escape(self.lexical)}"'


@dataclass(frozen=True, slots=True)
class TypedLiteral:
    lexical: str
    datatype: Iri

    def __post_init__(self) -> None:
        if self.datatype == XSD_DOUBLE:
            if not _DOUBLE_LEX.match(self.lexical):
                raise TermError(f"not a finite xsd:double: {self.lexical!r}")
        elif self.datatype == XSD_DATETIME:
            parse_datetime(self.lexical)

    def n3(self) -> str:
        return f'"{_escape(self.lexical)}"^^{self.datatype.n3()}'


Term = Union[Iri, TypedLiteral, PlainLiteral]


def parse_datetime(text: str) -> datetime:
    """Parse the UTC-only ``YYYY-MM-DDThh:mm:ssZ`` form into an aware datetime."""
    if not _DATETIME_LEX.match(text):
        raise TermError(f"not a UTC xsd:dateTime: {text!r}")
    try:
        return datetime.strptime(text, DATETIME_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise TermError(f"not a UTC xsd:dateTime: {text!r}") from exc


def format_datetime(dt: datetime) -> str:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.strftime(DATETIME_FORMAT)


def double_literal(value: float) -> TypedLiteral:
    value = float(value)
    if not math.isfinite(value):
        raise TermError(f"non-finite value {value!r}")
    # repr is the shortest string that round-trips the float
    return TypedLiteral(repr(value), XSD_DOUBLE)


def datetime_literal(moment: datetime | date) -> TypedLiteral:
    if not isinstance(moment, datetime):
        moment = datetime(moment.year, moment.month, moment.day, tzinfo=timezone.utc)
    return TypedLiteral(format_datetime(moment), XSD_DATETIME)


def literal_value(term: Term) -> float | datetime | str:
    """Python value of a literal: float for xsd:double, datetime for xsd:dateTime."""
    if isinstance(term, TypedLiteral):
        if term.datatype == XSD_DOUBLE:
            return float(term.lexical)
        if term.datatype == XSD_DATETIME:
            return parse_datetime(term.lexical)
        return term.lexical
    if isinstance(term, PlainLiteral):
        return term.lexical
    raise TypeError(f"{term!r} is not a literal")


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, Iri) or not isinstance(self.predicate, Iri):
            raise TermError("subject and predicate must be IRIs")
        if not isinstance(self.object, (Iri, TypedLiteral, PlainLiteral)):
            raise TermError(f"bad object term {self.object!r}")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."

    def __iter__(self) -> Iterator[Term]:
        yield self.subject
        yield self.predicate
        yield self.object


class FrozenGraphError(RuntimeError):
    pass


class Graph:
    """Set of triples with subject-, predicate- and object-first indexes.

    Single writer while loading; call ``freeze()`` before sharing with readers.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: dict[Triple, None] = {}
        self._spo: dict[Iri, dict[Iri, set[Term]]] = {}
        self._pos: dict[Iri, dict[Term, set[Iri]]] = {}
        self._osp: dict[Term, dict[Iri, set[Iri]]] = {}
        self._frozen = False
        self.update(triples)

    def insert(self, t: Triple) -> bool:
        """Add ``t``; returns True when the triple was new."""
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if t in self._triples:
            return False
        self._triples[t] = None
        s, p, o = t.subject, t.predicate, t.object
        self._spo.setdefault(s, {}).setdefault(p, set()).add(o)
        self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
        self._osp.setdefault(o, {}).setdefault(s, set()).add(p)
        return True

    def add(self, s: Iri, p: Iri, o: Term) -> bool:
        return self.insert(Triple(s, p, o))

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.insert(t)

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: object) -> bool:
        return t in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples.keys() == other._triples.keys()

    def __or__(self, other: "Graph") -> "Graph":
        merged = Graph(self)
        merged.update(other)
        return merged

    def triples(self, s: Iri | None = None, p: Iri | None = None,
                o: Term | None = None) -> Iterator[Triple]:
        """Unordered matches; the index is picked from the bound positions."""
        if s is not None:
            if o is not None:
                preds = self._osp.get(o, {}).get(s, ())
                if p is not None:
                    if p in preds:
                        yield Triple(s, p, o)
                    return
                for pp in preds:
                    yield Triple(s, pp, o)
                return
            by_pred = self._spo.get(s)
            if not by_pred:
                return
            if p is not None:
                for oo in by_pred.get(p, ()):
                    yield Triple(s, p, oo)
                return
            for pp, objs in by_pred.items():
                for oo in objs:
                    yield Triple(s, pp, oo)
        elif p is not None:
            by_obj = self._pos.get(p)
            if not by_obj:
                return
            if o is not None:
                for ss in by_obj.get(o, ()):
                    yield Triple(ss, p, o)
                return
            for oo, subjs in by_obj.items():
                for ss in subjs:
                    yield Triple(ss, p, oo)
        elif o is not None:
            for ss, preds in self._osp.get(o, {}).items():
                for pp in preds:
                    yield Triple(ss, pp, o)
        else:
            yield from self._triples

    def count(self, s: Iri | None = None, p: Iri | None = None, o: Term | None = None) -> int:
        if s is None and p is None and o is None:
            return len(self._triples)
        if s is not None and p is not None and o is None:
            return len(self._spo.get(s, {}).get(p, ()))
        if p is not None and o is not None and s is None:
            return len(self._pos.get(p, {}).get(o, ()))
        if s is not None and p is None and o is None:
            return sum(len(v) for v in self._spo.get(s, {}).values())
        if o is not None and s is None and p is None:
            return sum(len(v) for v in self._osp.get(o, {}).values())
        return sum(1 for _ in self.triples(s, p, o))

    def match(self, s: Iri | None = None, p: Iri | None = None,
              o: Term | None = None) -> list[Triple]:
        """Matching triples, sorted by their N-Triples form."""
        return sorted(self.triples(s, p, o), key=Triple.n3)

    def objects(self, s: Iri, p: Iri) -> list[Term]:
        return [t.object for t in self.match(s, p, None)]

    def audit(self) -> None:
        """Re-scan every index against the triple set; raises AssertionError on drift."""
        for name, index, rebuild in (
            ("spo", self._spo, lambda t: (t.subject, t.predicate, t.object)),
            ("pos", self._pos, lambda t: (t.predicate, t.object, t.subject)),
            ("osp", self._osp, lambda t: (t.object, t.subject, t.predicate)),
        ):
            flat = {(a, b, c) for a, inner in index.items() for b, leaf in inner.items() for c in leaf}
            expected = {rebuild(t) for t in self._triples}
            if flat != expected:
                raise AssertionError(f"{name} index out of sync with triple set")
            if any(not inner or any(not leaf for leaf in inner.values()) for inner in index.values()):
                raise AssertionError(f"{name} index holds empty buckets")


# --- serialization -------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_ESCAPE_RE = re.compile(r'[\\"\n\r]')


def _escape(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES[m.group()], text)


def serialize(g: Graph, format: str = "ntriples", registry: TermRegistry | None = None) -> str:
    if format == "ntriples":
        return "".join(sorted(t.n3() + "\n" for t in g))
    if format == "turtle":
        return _turtle(g, registry or TermRegistry())
    raise ValueError(f"unknown format {format!r}")


def _turtle(g: Graph, registry: TermRegistry) -> str:
    rdf_type = registry.terms.rdf_type

    def name(iri: Iri) -> str:
        return registry.compact(iri) or iri.n3()

    def obj(term: Term) -> str:
        if isinstance(term, Iri):
            return name(term)
        if isinstance(term, TypedLiteral):
            return f'"{_escape(term.lexical)}"^^{name(term.datatype)}'
        return term.n3()

    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(registry.prefixes.items())]
    by_subject: dict[Iri, dict[Iri, list[Term]]] = {}
    for t in g:
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)
    for s in sorted(by_subject, key=Iri.n3):
        preds = by_subject[s]
        # rdf:type first, as 'a'
        order = sorted(preds, key=lambda p: (p != rdf_type, p.n3()))
        chunks = []
        for p in order:
            objs = ", ".join(obj(o) for o in sorted(preds[p], key=lambda o: o.n3()))
            chunks.append(("a" if p == rdf_type else name(p)) + " " + objs)
        lines.append("")
        lines.append(name(s) + " " + " ;\n    ".join(chunks) + " .")
    return "\n".join(lines) + "\n"


class NTriplesError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_LINE = re.compile(
    r'[ \t]*<([^>]*)>[ \t]*<([^>]*)>[ \t]*'
    r'(?:<([^>]*)>|"((?:[^"\\]|\\.)*)"(?:\^\^<([^>]*)>|(@[A-Za-z0-9-]+))?)'
    r'[ \t]*\.[ \t]*(?:#.*)?$'
)
_UNESCAPE = re.compile(r'\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|[tbnrf"\'\\])|\\')
_ECHARS = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str, lineno: int) -> str:
    def repl(m: re.Match) -> str:
        code = m.group(1)
        if code is None:
            raise NTriplesError(lineno, "invalid escape sequence")
        if code[0] in "uU":
            return chr(int(code[1:], 16))
        return _ECHARS[code]
    return _UNESCAPE.sub(repl, text) if "\\" in text else text


def _iri(text: str, lineno: int) -> Iri:
    try:
        return Iri(_unescape(text, lineno))
    except ValueError as exc:
        raise NTriplesError(lineno, str(exc)) from None


def parse_ntriples(text: str) -> Graph:
    g = Graph()
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        stripped = line.strip(" \t")
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(line)
        if m is None:
            if "_:" in line:
                raise NTriplesError(lineno, "blank nodes are not supported")
            raise NTriplesError(lineno, "malformed triple")
        s, p, o_iri, lex, dtype, lang = m.groups()
        if lang:
            raise NTriplesError(lineno, "language-tagged literals are not supported")
        if o_iri is not None:
            obj: Term = _iri(o_iri, lineno)
        elif dtype is not None:
            try:
                obj = TypedLiteral(_unescape(lex, lineno), _iri(dtype, lineno))
            except TermError as exc:
                raise NTriplesError(lineno, str(exc)) from None
        else:
            obj = PlainLiteral(_unescape(lex, lineno))
        g.insert(Triple(_iri(s, lineno), _iri(p, lineno), obj))
    return g
