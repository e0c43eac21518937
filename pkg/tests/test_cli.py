import csv
import json
import subprocess
import sys

import pytest

from energykg.cli import main
from energykg.rdf_core import parse_ntriples

from conftest import FIXTURES, QUERIES
from oracles import count_cells, expected_topology_count

CONFIG = str(FIXTURES / "config.json")


def run(*argv):
    return main([str(a) for a in argv])


def test_convert_24x3(tmp_path, capsys):
    out = tmp_path / "g.nt"
    assert run("convert", FIXTURES / "household_24x3.csv", "--out", out) == 0
    g = parse_ntriples(out.read_text())
    headings = (FIXTURES / "household_24x3.csv").read_text().splitlines()[0].split(",")[1:]
    active, cells = count_cells(FIXTURES / "household_24x3.csv")
    assert len(g) == active + 4 * cells + expected_topology_count(headings)
    assert active + 4 * cells == 251
    err = capsys.readouterr().err
    assert f"triples: {len(g)}" in err
    with open(FIXTURES / "household_24x3.csv", newline="") as fh:
        body = list(csv.reader(fh))[1:]
    for i, h in enumerate(headings, 1):
        filled = sum(1 for r in body if r[i])
        assert f"{h}: {filled} values, {len(body) - filled} empty" in err


def test_convert_header_only(tmp_path):
    table = tmp_path / "empty.csv"
    table.write_text("utc_timestamp,DE_KN_residential1_pv\n")
    out = tmp_path / "g.nt"
    assert run("convert", table, "--out", out) == 0
    assert len(parse_ntriples(out.read_text())) == expected_topology_count(["DE_KN_residential1_pv"])


def test_convert_malformed_timestamp(tmp_path, capsys):
    table = tmp_path / "bad.csv"
    table.write_text("utc_timestamp,DE_KN_residential1_pv\n2016-05-01T00:00:00Z,1\n2016-05-01 01:00,2\n")
    assert run("convert", table) == 2
    assert "line 3" in capsys.readouterr().err


def test_convert_bad_heading(tmp_path, capsys):
    table = tmp_path / "bad.csv"
    table.write_text("utc_timestamp,DE_KN_residential1_toaster\n")
    assert run("convert", table) == 2
    assert "toaster" in capsys.readouterr().err


def test_convert_turtle(tmp_path):
    out = tmp_path / "g.ttl"
    assert run("convert", FIXTURES / "household_24x3.csv", "--format", "turtle", "--out", out) == 0
    assert out.read_text().startswith("@prefix")


def test_convert_deterministic(tmp_path):
    a, b = tmp_path / "a.nt", tmp_path / "b.nt"
    assert run("--config", CONFIG, "convert", FIXTURES / "household_month.csv", "--out", a) == 0
    assert run("--config", CONFIG, "convert", FIXTURES / "household_month.csv", "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_climate_730(tmp_path, capsys):
    out = tmp_path / "c.nt"
    assert run("climate", FIXTURES / "climate_730.csv", "--out", out) == 0
    assert len(parse_ntriples(out.read_text())) == 3651
    assert "from 730 records" in capsys.readouterr().err


def test_missing_input_is_usage_error(tmp_path, capsys):
    assert run("convert", tmp_path / "nope.csv") == 1
    assert run("query", QUERIES / "energy_weather.rq", tmp_path / "nope.nt") == 1
    assert "not found" in capsys.readouterr().err


def test_limit_zero_is_usage_error(month_graphs, capsys):
    with pytest.raises(SystemExit) as info:
        run("query", "--limit", "0", QUERIES / "energy_weather.rq", *month_graphs)
    assert info.value.code == 1


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        run("frobnicate")
    assert info.value.code == 1


def test_query_json(month_graphs, capsys):
    assert run("query", QUERIES / "energy_weather.rq", *month_graphs) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["head"]["vars"] == ["time", "energy", "datatype", "weather"]
    assert doc["results"]["bindings"]


def test_query_tsv_limit(month_graphs, capsys):
    assert run("query", "--results", "tsv", "--limit", "3", QUERIES / "energy_weather.rq", *month_graphs) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "?time\t?energy\t?datatype\t?weather"
    assert len(lines) == 4


def test_query_unsupported_exit_3(month_graphs, tmp_path, capsys):
    q = tmp_path / "q.rq"
    q.write_text("SELECT ?x { SERVICE <http://ex.org/s> { ?x ?p ?o } }")
    assert run("query", q, *month_graphs) == 3
    assert "SERVICE" in capsys.readouterr().err


def test_query_bad_graph_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.nt"
    bad.write_text("<http://ex.org/s> <http://ex.org/p> <http://ex.org/o> .\n_:b <http://ex.org/p> <http://ex.org/o> .\n")
    assert run("query", QUERIES / "energy_weather.rq", bad) == 2
    assert "line 2" in capsys.readouterr().err


def test_analyze(month_graphs, tmp_path, capsys):
    out = tmp_path / "study"
    assert run("--config", CONFIG, "analyze", *month_graphs, "--devices",
               "DE_KN_residential1_pv,DE_KN_industrial1_pv_1", "--year", "2016", "--out", out) == 0
    table = (out / "correlations.csv").read_text().splitlines()
    assert table[0] == "datatype,device,r,n"
    assert len(table) == 1 + 4
    assert (out / "scatter.csv").read_text().startswith("device,date,energy_kwh,tmax_c,prcp_mm\n")


def test_analyze_without_link(tmp_path, capsys):
    g = tmp_path / "g.nt"
    assert run("convert", FIXTURES / "household_24x3.csv", "--out", g) == 0
    headings = (FIXTURES / "household_24x3.csv").read_text().splitlines()[0].split(",")[1:]
    assert run("analyze", g, "--devices", headings[0], "--out", tmp_path) == 2
    assert "weather link" in capsys.readouterr().err


def test_module_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "energykg", "climate", str(FIXTURES / "climate_730.csv"),
                         "--out", str(tmp_path / "c.nt")], capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    bad = subprocess.run([sys.executable, "-m", "energykg", "query", "--limit", "0", "x.rq", "y.nt"],
                         capture_output=True, text=True)
    assert bad.returncode == 1
