"""Tabular energy rows and climate records -> RDF following the household model.

Per device heading the data chain is::

    device --producedElectricPower|consumedElectricPower--> property node
    property node --seas:evaluation--> evaluation
    evaluation rdf:type seas:ElectricPowerEvaluation
    evaluation seas:evaluatedValue "kWh"^^xsd:double
    evaluation sosa:resultTime "UTC instant"^^xsd:dateTime
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import warnings
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .heading_parser import (
    RoleTable, SystemDescriptor, canonical_heading, parse_heading,
    power_property,
)
from .rdf_core import Graph, PlainLiteral, Triple, datetime_literal, double_literal
from .vocab import DEFAULTS_DIR, Iri, TermRegistry, load_tsv_pairs

log = logging.getLogger(__name__)

TIMESTAMP_COLUMN = "utc_timestamp"
IGNORED_COLUMNS = ("cet_cest_timestamp", "interpolated")
CLIMATE_HEADER = ("station", "date", "datatype", "value", "unit")


class UpliftError(ValueError):
    pass


class DataError(UpliftError):
    def __init__(self, locator: str, message: str):
        super().__init__(f"{locator}: {message}")
        self.locator = locator


class TopologyError(UpliftError):
    pass


class WeatherLinkWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EnergyRow:
    utc_timestamp: datetime
    readings: Mapping[str, float | None]
    line: int | None = None

    @property
    def locator(self) -> str:
        return f"line {self.line}" if self.line is not None else self.utc_timestamp.isoformat()


@dataclass(frozen=True)
class ClimateRecord:
    station_id: str
    date: date
    datatype: str
    value: float
    unit: str = ""


@dataclass(frozen=True)
class DatatypeSpec:
    code: str
    scale: float
    unit: str


class DatatypeRegistry:
    """Climate datatype codes with the factor that converts raw values to ``unit``."""

    def __init__(self, specs: Iterable[DatatypeSpec]):
        self._specs = {s.code: s for s in specs}

    @classmethod
    def from_file(cls, path: str | Path) -> "DatatypeRegistry":
        specs = []
        for fields in load_tsv_pairs(path):
            if len(fields) != 3:
                raise UpliftError(f"{path}: expected code<TAB>scale<TAB>unit, got {fields!r}")
            specs.append(DatatypeSpec(fields[0], float(fields[1]), fields[2]))
        return cls(specs)

    @classmethod
    def default(cls) -> "DatatypeRegistry":
        return cls.from_file(DEFAULTS_DIR / "datatypes.tsv")

    def __contains__(self, code: str) -> bool:
        return code in self._specs

    def __getitem__(self, code: str) -> DatatypeSpec:
        try:
            return self._specs[code]
        except KeyError:
            raise UpliftError(f"unknown climate datatype {code!r}") from None


# --- readers ---------------------------------------------------------------

def parse_utc_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None or dt.utcoffset().total_seconds() != 0:
        raise ValueError(f"timestamp {text!r} is not UTC")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def read_energy_table(source: str | Path | TextIO) -> tuple[list[str], list[EnergyRow]]:
    """Read a household table: ``utc_timestamp`` first, then one column per heading.

    Returns the heading columns (in file order) and the rows.  Empty cells map
    to None.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_energy_table(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("line 1", "missing header row") from None
    if not header or header[0].strip() != TIMESTAMP_COLUMN:
        raise DataError("line 1", f"first column must be {TIMESTAMP_COLUMN!r}")
    keep: list[tuple[int, str]] = []
    for idx, name in enumerate(header[1:], 1):
        name = name.strip()
        if name in IGNORED_COLUMNS:
            log.info("ignoring column %r", name)
            continue
        keep.append((idx, name))
    headings = [name for _, name in keep]
    if len(set(headings)) != len(headings):
        raise DataError("line 1", "duplicate heading columns")

    rows: list[EnergyRow] = []
    previous: datetime | None = None
    for lineno, record in enumerate(reader, 2):
        if not record or all(not c.strip() for c in record):
            continue
        locator = f"line {lineno}"
        if len(record) != len(header):
            raise DataError(locator, f"expected {len(header)} fields, got {len(record)}")
        try:
            ts = parse_utc_timestamp(record[0])
        except ValueError as exc:
            raise DataError(locator, f"bad timestamp {record[0]!r} ({exc})") from None
        if previous is not None and ts <= previous:
            raise DataError(locator, "timestamps must strictly increase")
        previous = ts
        readings: dict[str, float | None] = {}
        for idx, name in keep:
            cell = record[idx].strip()
            if not cell:
                readings[name] = None
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(locator, f"{name}: not a number {cell!r}") from None
            if not math.isfinite(value) or value < 0:
                raise DataError(locator, f"{name}: reading must be a non-negative number, got {cell!r}")
            readings[name] = value
        rows.append(EnergyRow(ts, readings, lineno))
    return headings, rows


def read_climate_csv(source: str | Path | TextIO) -> list[ClimateRecord]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_climate_csv(fh)
    reader = csv.reader(source)
    header = tuple(h.strip() for h in next(reader, ()))
    if header != CLIMATE_HEADER:
        raise DataError("line 1", f"climate header must be {','.join(CLIMATE_HEADER)}")
    records = []
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        locator = f"line {lineno}"
        if len(row) != len(CLIMATE_HEADER):
            raise DataError(locator, f"expected {len(CLIMATE_HEADER)} fields")
        station, day, datatype, value, unit = (c.strip() for c in row)
        try:
            parsed_day = date.fromisoformat(day)
        except ValueError:
            raise DataError(locator, f"bad date {day!r}") from None
        try:
            number = float(value)
        except ValueError:
            raise DataError(locator, f"bad value {value!r}") from None
        if not math.isfinite(number):
            raise DataError(locator, f"bad value {value!r}")
        records.append(ClimateRecord(station, parsed_day, datatype, number, unit))
    return records


def parse_headings(headings: Iterable[str], roles: RoleTable | None = None) -> dict[str, SystemDescriptor]:
    return {h: parse_heading(h, roles) for h in headings}


# --- minting helpers -----------------------------------------------------

def device_iri(registry: TermRegistry, d: SystemDescriptor) -> Iri:
    parts = [d.country, d.locality, f"{d.site_kind}{d.site_ordinal}", d.device_kind]
    if d.device_ordinal is not None:
        parts.append(str(d.device_ordinal))
    return registry.mint_individual("device", parts)


def site_iri(registry: TermRegistry, d: SystemDescriptor) -> Iri:
    return registry.mint_individual("site", (d.country, d.locality, f"{d.site_kind}{d.site_ordinal}"))


def locality_iri(registry: TermRegistry, d: SystemDescriptor) -> Iri:
    return registry.mint_individual("locality", (d.country, d.locality))


def property_iri(registry: TermRegistry, d: SystemDescriptor) -> Iri:
    return registry.mint_individual("property", (canonical_heading(d), d.power_role.value))


def evaluation_iri(registry: TermRegistry, d: SystemDescriptor, moment: datetime) -> Iri:
    return registry.mint_individual("evaluation", (canonical_heading(d), _stamp(moment)))


def station_iri(registry: TermRegistry, station: str) -> Iri:
    """Absolute IRIs pass through; bare identifiers are minted under the base."""
    if "://" in station:
        return Iri(station)
    return registry.mint_individual("station", (station,))


def datatype_iri(registry: TermRegistry, code: str) -> Iri:
    return registry.mint_individual("datatype", (code,))


def observation_iri(registry: TermRegistry, record: ClimateRecord) -> Iri:
    station = record.station_id
    if "://" in station:
        station = "iri_" + hashlib.sha1(station.encode("utf-8")).hexdigest()[:20]
    return registry.mint_individual("observation", (station, record.date.isoformat(), record.datatype))


def _stamp(moment: datetime) -> str:
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# --- uplift operations ---------------------------------------------------

def _is_grid_feed(d: SystemDescriptor) -> bool:
    return d.device_kind in ("grid_import", "grid_export")


def build_topology(descriptors: Iterable[SystemDescriptor], network: Iri, locality_label: str | None,
                   registry: TermRegistry) -> Graph:
    """Network/site/device hierarchy.

    Triple count: 1 (network type) + 3 per site + 2 per device + 1 label per
    locality + 1 per (site, feed direction) having a grid_import/grid_export device.
    """
    T = registry.terms
    by_heading: dict[str, SystemDescriptor] = {}
    for d in descriptors:
        heading = canonical_heading(d)
        seen = by_heading.setdefault(heading, d)
        if seen != d:
            raise TopologyError(f"conflicting descriptors for heading {heading!r}")

    g = Graph()
    g.add(network, T.rdf_type, T.distribution_network)
    for d in by_heading.values():
        dev, site, loc = device_iri(registry, d), site_iri(registry, d), locality_iri(registry, d)
        g.add(dev, T.rdf_type, T.transmission_system if _is_grid_feed(d) else T.system)
        g.add(dev, T.sub_system_of, site)
        g.add(site, T.rdf_type, T.system)
        g.add(site, T.sub_system_of, network)
        g.add(site, T.located_in, loc)
        if locality_label:
            g.add(loc, T.label, PlainLiteral(locality_label))
        if d.device_kind == "grid_import":
            g.add(network, T.powers, site)
        elif d.device_kind == "grid_export":
            g.add(network, T.is_powered_by, site)
    return g


def uplift_rows(rows: Iterable[EnergyRow], descriptors: Mapping[str, SystemDescriptor],
                registry: TermRegistry) -> Graph:
    """One property link per heading with data, plus four triples per non-empty cell."""
    T = registry.terms
    g = Graph()
    # per heading: (device, power predicate, property node), resolved lazily
    resolved: dict[str, tuple[Iri, Iri, Iri, SystemDescriptor]] = {}
    for row in rows:
        stamp = datetime_literal(row.utc_timestamp)
        for heading, value in row.readings.items():
            if value is None:
                continue
            if value < 0 or not math.isfinite(value):
                raise DataError(row.locator, f"{heading}: negative or non-finite reading {value!r}")
            entry = resolved.get(heading)
            if entry is None:
                try:
                    d = descriptors[heading]
                except KeyError:
                    raise UpliftError(f"no descriptor for heading {heading!r}") from None
                entry = (device_iri(registry, d), power_property(d, registry), property_iri(registry, d), d)
                resolved[heading] = entry
                g.add(entry[0], entry[1], entry[2])
            prop, d = entry[2], entry[3]
            ev = evaluation_iri(registry, d, row.utc_timestamp)
            g.add(prop, T.evaluation, ev)
            g.add(ev, T.rdf_type, T.evaluation_class)
            g.add(ev, T.evaluated_value, double_literal(value))
            g.add(ev, T.result_time, stamp)
    return g


def uplift_climate(records: Iterable[ClimateRecord], registry: TermRegistry,
                   datatypes: DatatypeRegistry | None = None) -> Graph:
    """Five triples per observation plus one ca:Station type triple per station."""
    T = registry.terms
    datatypes = datatypes or DatatypeRegistry.default()
    g = Graph()
    seen: dict[tuple[str, date, str], float] = {}
    for n, rec in enumerate(records, 1):
        if rec.datatype not in datatypes:
            raise DataError(f"record {n}", f"unknown datatype code {rec.datatype!r}")
        key = (rec.station_id, rec.date, rec.datatype)
        if key in seen:
            if seen[key] != rec.value:
                raise DataError(f"record {n}", f"conflicting duplicate for {key!r}")
            continue
        seen[key] = rec.value
        station = station_iri(registry, rec.station_id)
        obs = observation_iri(registry, rec)
        g.add(station, T.rdf_type, T.station)
        g.add(obs, T.rdf_type, T.observation)
        g.add(obs, T.source_station, station)
        g.add(obs, T.with_data_type, datatype_iri(registry, rec.datatype))
        g.add(obs, T.has_result, double_literal(rec.value))
        g.add(obs, T.result_time, datetime_literal(rec.date))
    return g


def link_weather(subject: Iri, station: Iri, registry: TermRegistry) -> Triple:
    if subject == station:
        warnings.warn(f"{subject} is linked to itself as weather source", WeatherLinkWarning, stacklevel=2)
    return Triple(subject, registry.terms.retrieve_weather_from, station)


def weather_links(descriptors: Iterable[SystemDescriptor], network: Iri,
                  stations: Mapping[str, Iri], registry: TermRegistry) -> Graph:
    """Attach weather stations to the topology.

    ``stations`` is keyed by locality code (``KN``) or full locality name
    (``DE_KN``).  When every site shares one locality the network itself is
    linked; otherwise each site is linked to its own locality's station.
    Unmapped localities get no link.
    """
    descriptors = list(descriptors)

    def lookup(d: SystemDescriptor) -> Iri | None:
        return stations.get(d.locality_name) or stations.get(d.locality)

    g = Graph()
    localities = {d.locality_name for d in descriptors}
    if len(localities) == 1:
        station = lookup(descriptors[0])
        if station is not None:
            g.insert(link_weather(network, station, registry))
        return g
    for d in descriptors:
        station = lookup(d)
        if station is not None:
            g.insert(link_weather(site_iri(registry, d), station, registry))
    return g


def load_station_map(path: str | Path, registry: TermRegistry) -> dict[str, Iri]:
    return {fields[0]: station_iri(registry, fields[1]) for fields in load_tsv_pairs(path)}


@dataclass
class AuditReport:
    evaluations: int = 0
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def audit_evaluations(g: Graph, registry: TermRegistry) -> AuditReport:
    """Every evaluation node must carry exactly one value and one result time."""
    T = registry.terms
    report = AuditReport()
    for t in g.match(None, T.rdf_type, T.evaluation_class):
        ev = t.subject
        report.evaluations += 1
        for pred in (T.evaluated_value, T.result_time):
            n = g.count(ev, pred, None)
            if n != 1:
                report.problems.append(f"{ev}: {n} values for {pred}")
    return report


def heading_statistics(headings: Sequence[str], rows: Sequence[EnergyRow]) -> dict[str, tuple[int, int]]:
    """heading -> (non-empty cells, empty cells)."""
    stats = {}
    for h in headings:
        filled = sum(1 for r in rows if r.readings.get(h) is not None)
        stats[h] = (filled, len(rows) - filled)
    return stats


def energy_table_text(headings: Sequence[str], rows: Sequence[EnergyRow]) -> str:
    """Inverse of ``read_energy_table`` (used by fixture generators)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([TIMESTAMP_COLUMN, *headings])
    for r in rows:
        cells = ["" if r.readings.get(h) is None else repr(float(r.readings[h])) for h in headings]
        w.writerow([_stamp(r.utc_timestamp), *cells])
    return buf.getvalue()

