"""A SPARQL subset: PREFIX, SELECT, basic graph patterns, FILTER, ORDER BY, LIMIT.

Comparison filters have the form ``?var OP constant`` (or the mirrored
``constant OP ?var``), optionally chained with ``&&``.  Comparisons are
defined only between terms of the same kind:

* xsd:double vs xsd:double      numeric
* xsd:dateTime vs xsd:dateTime  chronological
* other typed literals          lexical, same datatype only
* plain vs plain literal        lexical
* IRI vs IRI                    ``=`` and ``!=`` only

Any other pairing makes the filter false, so adding a filter never grows
a result.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .rdf_core import (
    XSD_DATETIME, XSD_DOUBLE, Graph, PlainLiteral, Term, TermError, TypedLiteral,
    double_literal, parse_datetime,
)
from .vocab import Iri, TermRegistry

RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

UNSUPPORTED_KEYWORDS = frozenset({
    "OPTIONAL", "UNION", "SERVICE", "GRAPH", "MINUS", "BIND", "VALUES", "GROUP", "HAVING",
    "DISTINCT", "REDUCED", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE",
    "LOAD", "CLEAR", "DROP", "CREATE", "WITH", "FROM", "NAMED", "BASE", "EXISTS", "NOT",
    "COUNT", "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "AS",
})
COMPARISONS = {
    "=": operator.eq, "!=": operator.ne, "<": operator.lt,
    "<=": operator.le, ">": operator.gt, ">=": operator.ge,
}
_MIRROR = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


class QueryError(ValueError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, position: int | None = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")
        self.position = position


class UnsupportedFeature(QueryError):
    def __init__(self, keyword: str, position: int | None = None):
        super().__init__(f"unsupported feature: {keyword}")
        self.keyword = keyword
        self.position = position


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


PatternTerm = Var | Iri | TypedLiteral | PlainLiteral


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def __iter__(self) -> Iterator[PatternTerm]:
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> list[Var]:
        return [t for t in self if isinstance(t, Var)]


@dataclass(frozen=True)
class Filter:
    var: Var
    op: str
    value: Term

    def test(self, term: Term) -> bool:
        return compare(term, self.op, self.value)


@dataclass(frozen=True)
class OrderBy:
    var: Var
    descending: bool = False


@dataclass(frozen=True)
class Query:
    select_vars: tuple[Var, ...] | None  # None means SELECT *
    patterns: tuple[TriplePattern, ...]
    filters: tuple[Filter, ...] = ()
    order_by: OrderBy | None = None
    limit: int | None = None
    prefixes: Mapping[str, str] = field(default_factory=dict, compare=False)

    def pattern_vars(self) -> list[Var]:
        seen: dict[Var, None] = {}
        for pat in self.patterns:
            for v in pat.variables():
                seen.setdefault(v)
        return list(seen)

    @property
    def projection(self) -> tuple[Var, ...]:
        return self.select_vars if self.select_vars is not None else tuple(self.pattern_vars())

    def with_limit(self, limit: int | None) -> "Query":
        return Query(self.select_vars, self.patterns, self.filters, self.order_by, limit, self.prefixes)


SolutionRow = dict[str, Term]


# --- comparison ----------------------------------------------------------

def _comparable(term: Term, other: Term) -> tuple[object, object] | None:
    if isinstance(term, Iri) and isinstance(other, Iri):
        return term.value, other.value
    if isinstance(term, PlainLiteral) and isinstance(other, PlainLiteral):
        return term.lexical, other.lexical
    if isinstance(term, TypedLiteral) and isinstance(other, TypedLiteral) \
            and term.datatype == other.datatype:
        if term.datatype == XSD_DOUBLE:
            return float(term.lexical), float(other.lexical)
        if term.datatype == XSD_DATETIME:
            return parse_datetime(term.lexical), parse_datetime(other.lexical)
        return term.lexical, other.lexical
    return None


def compare(term: Term, op: str, constant: Term) -> bool:
    pair = _comparable(term, constant)
    if pair is None:
        return False
    if isinstance(term, Iri) and op not in ("=", "!="):
        return False
    return COMPARISONS[op](*pair)


def order_key(term: Term) -> tuple:
    """Total order over terms: IRIs, plain literals, doubles, dateTimes, other typed."""
    if isinstance(term, Iri):
        return (0, term.value)
    if isinstance(term, PlainLiteral):
        return (1, term.lexical)
    if term.datatype == XSD_DOUBLE:
        return (2, float(term.lexical))
    if term.datatype == XSD_DATETIME:
        return (3, parse_datetime(term.lexical))
    return (4, term.datatype.value, term.lexical)


# --- tokenizer -----------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<lang>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_.-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?)
  | (?P<number>[+-]?(?:[0-9]+\.[0-9]*(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+(?:[eE][+-]?[0-9]+)?))
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|&&|\|\||[=<>!])
  | (?P<punct>[{}().;,*])
""", re.VERBOSE)

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _unquote(token: Token) -> str:
    body = token.text[1:-1]

    def repl(m: re.Match) -> str:
        ch = m.group(1)
        if ch in _ESCAPES:
            return _ESCAPES[ch]
        raise QuerySyntaxError(f"invalid escape \\{ch}", token.pos)
    return re.sub(r"\\(.)", repl, body)


# --- parser --------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, registry: TermRegistry):
        self.tokens = tokenize(text)
        self.i = 0
        self.registry = registry
        self.prefixes: dict[str, str] = {}

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_word(self, *words: str) -> bool:
        return self.tok.kind == "word" and self.tok.text.upper() in words

    def check_unsupported(self) -> None:
        tok = self.tok
        if tok.kind == "word" and tok.text.upper() in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(tok.text.upper(), tok.pos)
        if tok.kind == "op" and tok.text in ("||", "!"):
            raise UnsupportedFeature(tok.text, tok.pos)

    def expect(self, kind: str, text: str | None = None) -> Token:
        self.check_unsupported()
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text.upper() != text.upper()):
            want = text or kind
            raise QuerySyntaxError(f"expected {want!r}, found {tok.text or 'end of query'!r}", tok.pos)
        return self.advance()

    def parse(self) -> Query:
        while self.is_word("PREFIX"):
            self.advance()
            name = self.expect("pname")
            if not name.text.endswith(":"):
                raise QuerySyntaxError("prefix declaration must end with ':'", name.pos)
            iri = self.expect("iri")
            self.prefixes[name.text[:-1]] = iri.text[1:-1]
        self.expect("word", "SELECT")
        self.check_unsupported()
        select: list[Var] | None = []
        if self.tok.kind == "punct" and self.tok.text == "*":
            self.advance()
            select = None
        else:
            while self.tok.kind == "var":
                select.append(Var(self.advance().text[1:]))
            self.check_unsupported()
            if not select:
                raise QuerySyntaxError("SELECT needs '*' or at least one variable", self.tok.pos)
        if self.is_word("WHERE"):
            self.advance()
        patterns, filters = self.group()
        order = self.order_by()
        limit = self.limit()
        self.check_unsupported()
        if self.tok.kind != "eof":
            raise QuerySyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)

        q = Query(tuple(select) if select is not None else None, tuple(patterns), tuple(filters),
                  order, limit, dict(self.prefixes))
        bound = set(q.pattern_vars())
        used = list(select or []) + [f.var for f in filters] + ([order.var] if order else [])
        for v in used:
            if v not in bound:
                raise QuerySyntaxError(f"variable {v} does not occur in any triple pattern")
        if not patterns:
            raise QuerySyntaxError("query has no triple patterns")
        return q

    def group(self) -> tuple[list[TriplePattern], list[Filter]]:
        self.expect("punct", "{")
        patterns: list[TriplePattern] = []
        filters: list[Filter] = []
        while True:
            self.check_unsupported()
            tok = self.tok
            if tok.kind == "punct" and tok.text == "}":
                self.advance()
                return patterns, filters
            if tok.kind == "punct" and tok.text == "{":
                raise UnsupportedFeature("nested group", tok.pos)
            if self.is_word("FILTER"):
                self.advance()
                filters.extend(self.filter())
            else:
                patterns.extend(self.triples())
            if self.tok.kind == "punct" and self.tok.text == ".":
                self.advance()

    def triples(self) -> list[TriplePattern]:
        subject = self.term(position="subject")
        out = []
        while True:
            verb = self.verb()
            while True:
                out.append(TriplePattern(subject, verb, self.term(position="object")))
                if self.tok.kind == "punct" and self.tok.text == ",":
                    self.advance()
                    continue
                break
            if self.tok.kind == "punct" and self.tok.text == ";":
                while self.tok.kind == "punct" and self.tok.text == ";":
                    self.advance()
                if self.tok.kind == "punct" and self.tok.text in (".", "}"):
                    break
                continue
            break
        return out

    def verb(self) -> PatternTerm:
        if self.tok.kind == "word" and self.tok.text == "a":
            self.advance()
            return RDF_TYPE
        return self.term(position="predicate")

    def iri(self, tok: Token) -> Iri:
        if tok.kind == "iri":
            try:
                return Iri(tok.text[1:-1])
            except ValueError as exc:
                raise QuerySyntaxError(str(exc), tok.pos) from None
        prefix, _, local = tok.text.partition(":")
        if prefix in self.prefixes:
            namespace = self.prefixes[prefix]
        elif prefix in self.registry.prefixes:
            namespace = self.registry.prefixes[prefix]
        else:
            raise QuerySyntaxError(f"unknown prefix {prefix!r}", tok.pos)
        try:
            return Iri(namespace + local)
        except ValueError as exc:
            raise QuerySyntaxError(str(exc), tok.pos) from None

    def term(self, position: str) -> PatternTerm:
        self.check_unsupported()
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Var(tok.text[1:])
        if tok.kind in ("iri", "pname"):
            self.advance()
            return self.iri(tok)
        if position == "predicate":
            raise QuerySyntaxError(f"expected a predicate, found {tok.text!r}", tok.pos)
        const = self.literal()
        if position == "subject":
            raise QuerySyntaxError("literal in subject position", tok.pos)
        return const

    def literal(self) -> Term:
        tok = self.tok
        if tok.kind == "string":
            self.advance()
            lexical = _unquote(tok)
            if self.tok.kind == "lang":
                raise UnsupportedFeature("language tag", self.tok.pos)
            if self.tok.kind == "dtype":
                self.advance()
                dt_tok = self.tok
                if dt_tok.kind not in ("iri", "pname"):
                    raise QuerySyntaxError("expected datatype IRI after '^^'", dt_tok.pos)
                self.advance()
                try:
                    return TypedLiteral(lexical, self.iri(dt_tok))
                except TermError as exc:
                    raise QuerySyntaxError(str(exc), tok.pos) from None
            return PlainLiteral(lexical)
        if tok.kind == "number":
            self.advance()
            return double_literal(float(tok.text))
        if tok.kind == "word" and tok.text.lower() in ("true", "false"):
            raise UnsupportedFeature("boolean literal", tok.pos)
        raise QuerySyntaxError(f"expected a term, found {tok.text or 'end of query'!r}", tok.pos)

    def filter(self) -> list[Filter]:
        self.expect("punct", "(")
        out = [self.comparison()]
        while self.tok.kind == "op" and self.tok.text == "&&":
            self.advance()
            out.append(self.comparison())
        self.expect("punct", ")")
        return out

    def comparison(self) -> Filter:
        self.check_unsupported()
        tok = self.tok
        if tok.kind == "word" and self.tokens[self.i + 1].text == "(":
            raise UnsupportedFeature(f"function {tok.text.upper()}", tok.pos)
        if tok.kind == "punct" and tok.text == "(":
            raise UnsupportedFeature("nested expression", tok.pos)
        left = self.operand()
        op = self.tok
        if op.kind != "op" or op.text not in COMPARISONS:
            self.check_unsupported()
            raise QuerySyntaxError("expected a comparison operator", op.pos)
        self.advance()
        right = self.operand()
        if isinstance(left, Var) and not isinstance(right, Var):
            return Filter(left, op.text, right)
        if isinstance(right, Var) and not isinstance(left, Var):
            return Filter(right, _MIRROR[op.text], left)
        raise UnsupportedFeature("comparison must be between a variable and a constant", tok.pos)

    def operand(self) -> Var | Term:
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Var(tok.text[1:])
        if tok.kind in ("iri", "pname"):
            self.advance()
            return self.iri(tok)
        return self.literal()

    def order_by(self) -> OrderBy | None:
        if not self.is_word("ORDER"):
            return None
        self.advance()
        self.expect("word", "BY")
        if self.is_word("ASC", "DESC"):
            desc = self.advance().text.upper() == "DESC"
            self.expect("punct", "(")
            var = Var(self.expect("var").text[1:])
            self.expect("punct", ")")
        else:
            desc = False
            var = Var(self.expect("var").text[1:])
        if self.tok.kind == "var" or self.is_word("ASC", "DESC"):
            raise UnsupportedFeature("multiple ORDER BY keys", self.tok.pos)
        return OrderBy(var, desc)

    def limit(self) -> int | None:
        if not self.is_word("LIMIT"):
            return None
        self.advance()
        tok = self.expect("number")
        if not tok.text.isdigit() or int(tok.text) <= 0:
            raise QuerySyntaxError("LIMIT must be a positive integer", tok.pos)
        return int(tok.text)


def parse_query(text: str, registry: TermRegistry | None = None) -> Query:
    return _Parser(text, registry or TermRegistry()).parse()


# --- evaluation ----------------------------------------------------------

def _resolve(term: PatternTerm, binding: Mapping[Var, Term]) -> Term | None:
    if isinstance(term, Var):
        return binding.get(term)
    return term


def _estimate(g: Graph, pat: TriplePattern, bound: set[Var]) -> tuple[int, float]:
    """Lower is better: (cross-product flag, estimated matches)."""
    consts = [None if isinstance(t, Var) else t for t in pat]
    if any(isinstance(c, (TypedLiteral, PlainLiteral)) for c in consts[:2]):
        return (0, 0.0)
    count = g.count(*consts)
    pvars = set(pat.variables())
    shared = pvars & bound
    # each already-bound variable position cuts the fan-out sharply
    estimate = count / (100.0 ** len(shared))
    connected = bool(shared) or not pvars or not bound
    return (0 if connected else 1, estimate)


def plan(g: Graph, patterns: tuple[TriplePattern, ...]) -> list[TriplePattern]:
    """Greedy most-selective-first join order."""
    remaining = list(patterns)
    bound: set[Var] = set()
    order = []
    while remaining:
        best = min(range(len(remaining)), key=lambda i: (_estimate(g, remaining[i], bound), i))
        pat = remaining.pop(best)
        order.append(pat)
        bound.update(pat.variables())
    return order


def _extend(g: Graph, binding: dict[Var, Term], pat: TriplePattern) -> Iterator[dict[Var, Term]]:
    s, p, o = (_resolve(t, binding) for t in pat)
    if (s is not None and not isinstance(s, Iri)) or (p is not None and not isinstance(p, Iri)):
        return
    for triple in g.triples(s, p, o):
        new = dict(binding)
        ok = True
        for pos_term, value in zip(pat, triple):
            if isinstance(pos_term, Var):
                seen = new.get(pos_term)
                if seen is None:
                    new[pos_term] = value
                elif seen != value:
                    ok = False
                    break
        if ok:
            yield new


def row_key(row: SolutionRow, names: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(row[n].n3() for n in names)


def evaluate(g: Graph, q: Query) -> list[SolutionRow]:
    if not g.frozen:
        raise QueryError("graph must be frozen before evaluation")
    pending = list(q.filters)
    solutions: list[dict[Var, Term]] = [{}]
    for pat in plan(g, q.patterns):
        solutions = [b for prev in solutions for b in _extend(g, prev, pat)]
        ready = [f for f in pending if f.var in pat.variables()]
        if ready:
            pending = [f for f in pending if f not in ready]
            solutions = [b for b in solutions if all(f.test(b[f.var]) for f in ready)]
        if not solutions:
            break

    names = tuple(v.name for v in q.projection)
    if q.order_by is not None:
        ov = q.order_by.var
        # stable sorts: tie-break on the serialized row, then the ORDER BY key
        solutions.sort(key=lambda b: tuple(b[v].n3() for v in q.projection))
        solutions.sort(key=lambda b: order_key(b[ov]), reverse=q.order_by.descending)
        rows = [{v.name: b[v] for v in q.projection} for b in solutions]
    else:
        rows = [{v.name: b[v] for v in q.projection} for b in solutions]
        rows.sort(key=lambda r: row_key(r, names))
    if q.limit is not None:
        rows = rows[: q.limit]
    return rows
