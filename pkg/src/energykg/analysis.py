"""Daily solar energy vs. daily weather: differencing, alignment, Pearson r."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from .query import evaluate, parse_query
from .rdf_core import Graph, literal_value
from .uplift import DatatypeRegistry, datatype_iri
from .vocab import Iri, TermRegistry

SCATTER_HEADER = ("device", "date", "energy_kwh", "tmax_c", "prcp_mm")
TABLE_HEADER = ("datatype", "device", "r", "n")


class UndefinedCorrelation(ValueError):
    pass


class StudyError(ValueError):
    pass


@dataclass(frozen=True)
class DailySeries:
    points: Mapping[date, float]
    unit: str = ""
    # days whose difference was negative (counter reset) and therefore dropped
    skipped: tuple[date, ...] = ()

    def __post_init__(self) -> None:
        if any(not math.isfinite(v) for v in self.points.values()):
            raise ValueError("daily series values must be finite")

    def __len__(self) -> int:
        return len(self.points)


def cumulative_to_daily(samples: Iterable[tuple[datetime, float]], unit: str = "kWh") -> DailySeries:
    """Daily energy from a cumulative counter.

    value(d) = last reading on d - last reading on the previous day that has
    samples.  The first day has no baseline and is absent.
    """
    last: dict[date, float] = {}
    previous: datetime | None = None
    for moment, reading in samples:
        if previous is not None and moment < previous:
            raise ValueError("samples must be time-sorted")
        previous = moment
        last[moment.astimezone(timezone.utc).date()] = reading

    points: dict[date, float] = {}
    skipped = []
    days = list(last)
    for prev_day, day in zip(days, days[1:]):
        diff = last[day] - last[prev_day]
        if diff < 0:
            skipped.append(day)
        else:
            points[day] = diff
    return DailySeries(points, unit, tuple(skipped))


def unit_normalize(series: DailySeries, datatype: str, registry: DatatypeRegistry) -> DailySeries:
    spec = registry[datatype]
    scale = Decimal(repr(spec.scale))
    if scale == 1:
        return DailySeries(dict(series.points), spec.unit, series.skipped)
    # decimal product so that e.g. 215 * 0.1 gives exactly 21.5
    points = {d: float(Decimal(repr(v)) * scale) for d, v in series.points.items()}
    return DailySeries(points, spec.unit, series.skipped)


def align_join(a: DailySeries, b: DailySeries) -> list[tuple[date, float, float]]:
    return [(d, a.points[d], b.points[d]) for d in sorted(a.points.keys() & b.points.keys())]


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    if n != len(y):
        raise ValueError(f"length mismatch: {n} vs {len(y)}")
    if n < 2:
        raise UndefinedCorrelation(f"need at least 2 pairs, got {n}")
    # exact test: the rounded mean of a constant series can differ from its value
    if min(x) == max(x) or min(y) == max(y):
        raise UndefinedCorrelation("zero variance")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("zero variance")
    # one sqrt of the product: for y == x this is exactly sxx, so r == 1.0
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationTable:
    # datatype -> device label -> (r, n)
    rows: dict[str, dict[str, tuple[float, int]]] = field(default_factory=dict)
    # (datatype, device label, reason) for pairs with no defined coefficient
    undefined: list[tuple[str, str, str]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for dtype, by_device in self.rows.items():
            for device, (r, n) in by_device.items():
                w.writerow([dtype, device, repr(r), n])
        return buf.getvalue()


@dataclass(frozen=True)
class ScatterPoint:
    device: str
    day: date
    energy_kwh: float
    tmax_c: float | None
    prcp_mm: float | None


@dataclass
class StudyResult:
    table: CorrelationTable
    scatter: list[ScatterPoint]
    energy: dict[str, DailySeries]

    def scatter_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCATTER_HEADER)
        for p in self.scatter:
            w.writerow([
                p.device, p.day.isoformat(), repr(p.energy_kwh),
                "" if p.tmax_c is None else repr(p.tmax_c),
                "" if p.prcp_mm is None else repr(p.prcp_mm),
            ])
        return buf.getvalue()


def device_label(iri: Iri) -> str:
    return iri.value.rstrip("/").rsplit("/", 1)[-1].rsplit("#", 1)[-1]


def find_weather_station(g: Graph, subject: Iri, registry: TermRegistry) -> Iri:
    """Nearest ca:retrieveWeatherFrom target along the seas:subSystemOf chain."""
    T = registry.terms
    level = [subject]
    seen = {subject}
    while level:
        stations = sorted({t.object for s in level for t in g.triples(s, T.retrieve_weather_from)},
                          key=lambda o: o.n3())
        if len(stations) > 1:
            raise StudyError(f"{subject}: ambiguous weather stations {[str(s) for s in stations]}")
        if stations:
            return stations[0]
        nxt = []
        for s in level:
            for t in g.triples(s, T.sub_system_of):
                if isinstance(t.object, Iri) and t.object not in seen:
                    seen.add(t.object)
                    nxt.append(t.object)
        level = nxt
    raise StudyError(f"no weather link for {subject}")


def _year_filter(year: int) -> str:
    return (f'FILTER(?time >= "{year:04d}-01-01T00:00:00Z"^^xsd:dateTime '
            f'&& ?time < "{year + 1:04d}-01-01T00:00:00Z"^^xsd:dateTime)')


def energy_query(device: Iri, year: int) -> str:
    return f"""
SELECT ?time ?value WHERE {{
  {device.n3()} seas:producedElectricPower ?prop .
  ?prop seas:evaluation ?eval .
  ?eval seas:evaluatedValue ?value .
  ?eval sosa:resultTime ?time .
  {_year_filter(year)}
}} ORDER BY ?time
"""


def weather_query(station: Iri, datatype: Iri, year: int) -> str:
    return f"""
SELECT ?time ?value WHERE {{
  ?obs ca:sourceStation {station.n3()} .
  ?obs ca:withDataType {datatype.n3()} .
  ?obs sosa:hasResult ?value .
  ?obs sosa:resultTime ?time .
  {_year_filter(year)}
}} ORDER BY ?time
"""


def _series_from_rows(rows) -> list[tuple[datetime, float]]:
    return [(literal_value(r["time"]), literal_value(r["value"])) for r in rows]


def run_correlation_study(g: Graph, devices: Sequence[Iri], year: int,
                          datatypes: Sequence[str] = ("TMAX", "PRCP"),
                          registry: TermRegistry | None = None,
                          datatype_registry: DatatypeRegistry | None = None) -> StudyResult:
    registry = registry or TermRegistry()
    datatype_registry = datatype_registry or DatatypeRegistry.default()
    for code in datatypes:
        datatype_registry[code]

    table = CorrelationTable(rows={code: {} for code in datatypes})
    scatter: list[ScatterPoint] = []
    energy_by_device: dict[str, DailySeries] = {}
    weather_cache: dict[tuple[Iri, str], DailySeries] = {}

    for device in devices:
        label = device_label(device)
        station = find_weather_station(g, device, registry)
        rows = evaluate(g, parse_query(energy_query(device, year), registry))
        if not rows:
            raise StudyError(f"no production evaluations for {device} in {year}")
        energy = cumulative_to_daily(_series_from_rows(rows))
        energy_by_device[label] = energy

        weather: dict[str, DailySeries] = {}
        for code in datatypes:
            key = (station, code)
            if key not in weather_cache:
                wrows = evaluate(g, parse_query(weather_query(station, datatype_iri(registry, code), year), registry))
                raw = DailySeries({t.date(): v for t, v in _series_from_rows(wrows)})
                weather_cache[key] = unit_normalize(raw, code, datatype_registry)
            weather[code] = weather_cache[key]
            pairs = align_join(energy, weather[code])
            try:
                r = pearson([p[1] for p in pairs], [p[2] for p in pairs])
            except UndefinedCorrelation as exc:
                table.undefined.append((code, label, str(exc)))
                continue
            table.rows[code][label] = (r, len(pairs))

        tmax = weather.get("TMAX")
        prcp = weather.get("PRCP")
        for day, value in energy.points.items():
            t = tmax.points.get(day) if tmax else None
            p = prcp.points.get(day) if prcp else None
            if t is None and p is None:
                continue
            scatter.append(ScatterPoint(label, day, value, t, p))
    return StudyResult(table, scatter, energy_by_device)
