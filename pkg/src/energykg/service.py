"""Result rendering (SPARQL JSON / TSV) and the read-only HTTP query endpoint."""
from __future__ import annotations

import json
import logging
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Sequence
from urllib.parse import parse_qs, urlsplit

from .query import Query, QueryError, SolutionRow, evaluate, parse_query
from .rdf_core import Graph, PlainLiteral, Term, TypedLiteral
from .vocab import Iri, TermRegistry

log = logging.getLogger(__name__)

JSON_RESULTS = "application/sparql-results+json"
SPARQL_QUERY = "application/sparql-query"
FORM = "application/x-www-form-urlencoded"


def term_json(term: Term) -> dict[str, str]:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, TypedLiteral):
        return {"type": "literal", "value": term.lexical, "datatype": term.datatype.value}
    if isinstance(term, PlainLiteral):
        return {"type": "literal", "value": term.lexical}
    raise TypeError(term)


def render_json(names: Sequence[str], rows: Sequence[SolutionRow]) -> str:
    doc = {
        "head": {"vars": list(names)},
        "results": {"bindings": [{n: term_json(row[n]) for n in names} for row in rows]},
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_tsv(names: Sequence[str], rows: Sequence[SolutionRow]) -> str:
    lines = ["\t".join("?" + n for n in names)]
    lines.extend("\t".join(row[n].n3() for n in names) for row in rows)
    return "\n".join(lines) + "\n"


def run_query(g: Graph, text: str, registry: TermRegistry, limit: int | None = None) -> tuple[Query, list[SolutionRow]]:
    q = parse_query(text, registry)
    if limit is not None:
        q = q.with_limit(limit)
    return q, evaluate(g, q)


def answer(g: Graph, text: str, registry: TermRegistry) -> str:
    q, rows = run_query(g, text, registry)
    return render_json([v.name for v in q.projection], rows)


class QueryHandler(BaseHTTPRequestHandler):
    graph: Graph
    registry: TermRegistry
    server_version = "energykg"

    def log_message(self, format: str, *args) -> None:
        log.debug("%s - " + format, self.address_string(), *args)

    def _send(self, status: HTTPStatus, body: str, ctype: str) -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", f"{ctype}; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _respond(self, text: str | None) -> None:
        if not text:
            self._send(HTTPStatus.BAD_REQUEST, "missing query\n", "text/plain")
            return
        try:
            body = answer(self.graph, text, self.registry)
        except QueryError as exc:
            self._send(HTTPStatus.BAD_REQUEST, f"{exc}\n", "text/plain")
            return
        self._send(HTTPStatus.OK, body, JSON_RESULTS)

    def do_GET(self) -> None:
        url = urlsplit(self.path)
        if url.path != "/query":
            self._send(HTTPStatus.NOT_FOUND, "not found\n", "text/plain")
            return
        self._respond(parse_qs(url.query).get("query", [None])[0])

    def do_POST(self) -> None:
        if urlsplit(self.path).path != "/query":
            self._send(HTTPStatus.NOT_FOUND, "not found\n", "text/plain")
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length).decode("utf-8")
        ctype = (self.headers.get("Content-Type") or "").split(";")[0].strip().lower()
        if ctype == SPARQL_QUERY:
            self._respond(raw)
        elif ctype == FORM:
            self._respond(parse_qs(raw).get("query", [None])[0])
        else:
            self._send(HTTPStatus.UNSUPPORTED_MEDIA_TYPE, f"expected {SPARQL_QUERY}\n", "text/plain")


class QueryServer(ThreadingHTTPServer):
    # the socketserver default backlog of 5 resets bursts of concurrent clients
    request_queue_size = 128
    daemon_threads = True


def make_server(g: Graph, registry: TermRegistry, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind (but do not start) a threaded server over a frozen graph."""
    if not g.frozen:
        g.freeze()
    handler = type("BoundQueryHandler", (QueryHandler,), {"graph": g, "registry": registry})
    server = QueryServer((host, port), handler)
    return server
