"""energykg command line: convert, climate, query, analyze, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 query error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .analysis import StudyError, UndefinedCorrelation, run_correlation_study
from .config import CONFIG_ENV, ConfigError, PipelineConfig
from .heading_parser import HeadingError
from .query import QueryError
from .rdf_core import Graph, NTriplesError, parse_ntriples, serialize
from .service import make_server, render_json, render_tsv, run_query
from .uplift import (
    UpliftError, build_topology, heading_statistics, parse_headings, read_climate_csv,
    read_energy_table, uplift_climate, uplift_rows, weather_links,
)
from .vocab import Iri

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_QUERY = 0, 1, 2, 3

log = logging.getLogger("energykg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _listen(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="energykg", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help=f"pipeline config JSON (fallback: ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("convert", help="household energy table -> RDF")
    c.add_argument("table", type=Path)
    c.add_argument("--out", type=Path)
    c.add_argument("--format", choices=("ntriples", "turtle"), default="ntriples")

    c = sub.add_parser("climate", help="climate records CSV -> RDF")
    c.add_argument("records", type=Path)
    c.add_argument("--out", type=Path)
    c.add_argument("--format", choices=("ntriples", "turtle"), default="ntriples")

    c = sub.add_parser("query", help="evaluate a query file over N-Triples graphs")
    c.add_argument("query", type=Path)
    c.add_argument("graphs", type=Path, nargs="+")
    c.add_argument("--results", choices=("json", "tsv"), default="json")
    c.add_argument("--limit", type=_positive_int)
    c.add_argument("--out", type=Path)

    c = sub.add_parser("analyze", help="solar-vs-weather correlation study")
    c.add_argument("graphs", type=Path, nargs="+")
    c.add_argument("--devices", required=True, help="comma-separated device IRIs or local names")
    c.add_argument("--year", type=int, default=2016)
    c.add_argument("--out", type=Path, default=Path("."), help="output directory")

    c = sub.add_parser("serve", help="read-only HTTP query endpoint")
    c.add_argument("graphs", type=Path, nargs="+")
    c.add_argument("--listen", type=_listen, default=("127.0.0.1", 8080))
    return p


def load_config(path: Path | None) -> PipelineConfig:
    if path is None and os.environ.get(CONFIG_ENV):
        path = Path(os.environ[CONFIG_ENV])
    if path is None:
        return PipelineConfig()
    return PipelineConfig.load(path)


def load_graphs(paths: Sequence[Path]) -> Graph:
    g = Graph()
    for path in paths:
        if not path.is_file():
            raise UsageError(f"graph file not found: {path}")
        try:
            g.update(parse_ntriples(path.read_text(encoding="utf-8")))
        except NTriplesError as exc:
            raise NTriplesError(exc.lineno, f"{path}: {exc}") from None
    return g.freeze()


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="\n")


def cmd_convert(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    registry = cfg.registry()
    if not args.table.is_file():
        raise UsageError(f"table not found: {args.table}")
    headings, rows = read_energy_table(args.table)
    descriptors = parse_headings(headings, cfg.role_table())
    network = cfg.network_iri()
    g = build_topology(descriptors.values(), network, cfg.locality_label, registry)
    topology_size = len(g)
    g.update(weather_links(descriptors.values(), network, cfg.station_map(), registry))
    g.update(uplift_rows(rows, descriptors, registry))
    _emit(serialize(g, args.format, registry), args.out)

    print(f"triples: {len(g)} (topology {topology_size})", file=sys.stderr)
    for heading, (filled, empty) in heading_statistics(headings, rows).items():
        print(f"  {heading}: {filled} values, {empty} empty", file=sys.stderr)
    return EXIT_OK


def cmd_climate(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    registry = cfg.registry()
    if not args.records.is_file():
        raise UsageError(f"climate file not found: {args.records}")
    records = read_climate_csv(args.records)
    g = uplift_climate(records, registry, cfg.datatype_registry())
    _emit(serialize(g, args.format, registry), args.out)
    print(f"triples: {len(g)} from {len(records)} records", file=sys.stderr)
    return EXIT_OK


def cmd_query(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    if not args.query.is_file():
        raise UsageError(f"query file not found: {args.query}")
    registry = cfg.registry()
    g = load_graphs(args.graphs)
    q, rows = run_query(g, args.query.read_text(encoding="utf-8"), registry, args.limit)
    names = [v.name for v in q.projection]
    render = render_json if args.results == "json" else render_tsv
    _emit(render(names, rows), args.out)
    return EXIT_OK


def _device_iri(text: str, cfg: PipelineConfig) -> Iri:
    text = text.strip()
    if "://" in text:
        return Iri(text)
    registry = cfg.registry()
    if ":" in text:
        return registry.expand(text)
    return registry.system("device", text)


def cmd_analyze(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    devices = [_device_iri(d, cfg) for d in args.devices.split(",") if d.strip()]
    if not devices:
        raise UsageError("--devices needs at least one device")
    g = load_graphs(args.graphs)
    result = run_correlation_study(g, devices, args.year, registry=cfg.registry(),
                                   datatype_registry=cfg.datatype_registry())
    args.out.mkdir(parents=True, exist_ok=True)
    table_csv = result.table.to_csv()
    (args.out / "correlations.csv").write_text(table_csv, encoding="utf-8", newline="\n")
    (args.out / "scatter.csv").write_text(result.scatter_csv(), encoding="utf-8", newline="\n")
    sys.stdout.write(table_csv)
    for code, label, reason in result.table.undefined:
        print(f"undefined correlation {code}/{label}: {reason}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    g = load_graphs(args.graphs)
    host, port = args.listen
    try:
        server = make_server(g, cfg.registry(), host, port)
    except OSError as exc:
        raise UsageError(f"cannot listen on {host}:{port}: {exc}") from None
    print(f"serving {len(g)} triples on http://{host}:{server.server_address[1]}/query", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


COMMANDS = {
    "convert": cmd_convert, "climate": cmd_climate, "query": cmd_query,
    "analyze": cmd_analyze, "serve": cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QueryError as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (UpliftError, HeadingError, NTriplesError, StudyError, UndefinedCorrelation, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
