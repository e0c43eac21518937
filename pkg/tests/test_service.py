import json
import threading
import urllib.error
import urllib.parse
import urllib.request

import pytest

from energykg.cli import load_graphs
from energykg.rdf_core import PlainLiteral, TypedLiteral
from energykg.service import SPARQL_QUERY, make_server, render_json, render_tsv, term_json
from energykg.vocab import Iri

from conftest import QUERIES


@pytest.fixture(scope="module")
def endpoint(month_graphs, registry):
    server = make_server(load_graphs(month_graphs), registry, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/query"
    server.shutdown()
    server.server_close()


def request(url, data=None, ctype=None, method=None):
    req = urllib.request.Request(url, data=data, method=method)
    if ctype:
        req.add_header("Content-Type", ctype)
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return resp.status, resp.headers.get("Content-Type"), resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.headers.get("Content-Type"), exc.read()


def test_term_json():
    assert term_json(Iri("http://ex.org/a")) == {"type": "uri", "value": "http://ex.org/a"}
    assert term_json(PlainLiteral("x")) == {"type": "literal", "value": "x"}
    dt = Iri("http://www.w3.org/2001/XMLSchema#double")
    assert term_json(TypedLiteral("1.5", dt)) == {"type": "literal", "value": "1.5", "datatype": dt.value}


def test_render_empty():
    assert json.loads(render_json(["a"], [])) == {"head": {"vars": ["a"]}, "results": {"bindings": []}}
    assert render_tsv(["a", "b"], []) == "?a\t?b\n"


def test_post_sparql_query(endpoint):
    body = (QUERIES / "energy_weather.rq").read_bytes()
    status, ctype, data = request(endpoint, body, SPARQL_QUERY)
    assert status == 200
    assert ctype.startswith("application/sparql-results+json")
    assert json.loads(data)["results"]["bindings"]


def test_post_form(endpoint):
    form = urllib.parse.urlencode({"query": (QUERIES / "grid_feeds.rq").read_text()}).encode()
    status, _, data = request(endpoint, form, "application/x-www-form-urlencoded")
    assert status == 200
    assert len(json.loads(data)["results"]["bindings"]) == 2


def test_get(endpoint):
    q = urllib.parse.quote((QUERIES / "weather_link.rq").read_text())
    status, _, data = request(f"{endpoint}?query={q}")
    assert status == 200
    assert len(json.loads(data)["results"]["bindings"]) == 1


def test_service_keyword_rejected(endpoint):
    status, ctype, data = request(endpoint, b"SELECT ?x { SERVICE <http://ex.org/s> { ?x ?p ?o } }", SPARQL_QUERY)
    assert status == 400
    assert ctype.startswith("text/plain")
    assert b"SERVICE" in data


def test_wrong_content_type(endpoint):
    status, _, _ = request(endpoint, b"{}", "application/json")
    assert status == 415


def test_missing_query_and_wrong_path(endpoint):
    assert request(endpoint)[0] == 400
    assert request(endpoint.replace("/query", "/other"))[0] == 404


def test_no_update_methods(endpoint):
    assert request(endpoint, b"", SPARQL_QUERY, method="PUT")[0] == 501
