"""Synthetic household/weather fixtures with the quirks of the real data.

PV counters are cumulative kWh driven by a weather model (warm dry days
generate more), with optional missing cells and a counter reset.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Sequence

from .uplift import CLIMATE_HEADER, ClimateRecord, EnergyRow, energy_table_text

# hours of daylight production and their relative weight
_PROFILE = {h: math.sin(math.pi * (h - 5) / 15) for h in range(6, 20)}
_PROFILE_TOTAL = sum(_PROFILE.values())


@dataclass
class SyntheticFixture:
    headings: list[str]
    rows: list[EnergyRow]
    climate: list[ClimateRecord]
    station: str
    reset: tuple[str, datetime] | None = None
    notes: dict = field(default_factory=dict)

    def energy_csv(self) -> str:
        return energy_table_text(self.headings, self.rows)

    def climate_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CLIMATE_HEADER)
        for r in self.climate:
            w.writerow([r.station_id, r.date.isoformat(), r.datatype, repr(r.value), r.unit])
        return buf.getvalue()


def pv_headings(rng: random.Random, n: int) -> list[str]:
    pool = [f"DE_KN_residential{i}_pv" for i in range(1, 7)]
    pool += [f"DE_KN_industrial{i}_pv_{j}" for i in range(1, 4) for j in (1, 2)]
    return sorted(rng.sample(pool, n))


def weather(rng: random.Random, start: date, days: int, station: str,
            missing_rate: float = 0.0) -> list[ClimateRecord]:
    """Raw GHCN-style records: TMAX in tenths of degC, PRCP in tenths of mm."""
    out = []
    for i in range(days):
        d = start + timedelta(days=i)
        doy = d.timetuple().tm_yday
        tmax = round(120 + 110 * math.sin(2 * math.pi * (doy - 110) / 365) + rng.gauss(0, 35))
        prcp = 0 if rng.random() < 0.55 else round(rng.expovariate(1 / 45))
        for code, value, unit in (("TMAX", tmax, "tenths_degC"), ("PRCP", prcp, "tenths_mm")):
            if rng.random() >= missing_rate:
                out.append(ClimateRecord(station, d, code, float(value), unit))
    return out


def make_fixture(rng: random.Random, start: date, days: int, headings: Sequence[str],
                 step_hours: int = 1, missing_rate: float = 0.03, weather_missing_rate: float = 0.03,
                 reset: bool = True, station: str = "GME00000001") -> SyntheticFixture:
    climate = weather(rng, start, days, station, weather_missing_rate)
    # generation model uses the full weather, including records later dropped
    t_by_day = {}
    p_by_day = {}
    for i in range(days):
        d = start + timedelta(days=i)
        doy = d.timetuple().tm_yday
        t_by_day[d] = 12 + 11 * math.sin(2 * math.pi * (doy - 110) / 365)
        p_by_day[d] = 0.0
    for r in climate:
        if r.datatype == "TMAX":
            t_by_day[r.date] = r.value / 10
        else:
            p_by_day[r.date] = r.value / 10

    headings = list(headings)
    capacity = {h: rng.uniform(0.4, 2.5) for h in headings}
    counters = {h: rng.uniform(0, 5000) for h in headings}
    reset_at: tuple[str, datetime] | None = None
    n_steps = days * 24 // step_hours
    if reset and headings and n_steps > 4:
        reset_at = (rng.choice(headings),
                    datetime.combine(start, datetime.min.time(), timezone.utc)
                    + timedelta(hours=step_hours * rng.randrange(n_steps // 4, 3 * n_steps // 4)))

    rows = []
    t0 = datetime.combine(start, datetime.min.time(), timezone.utc)
    for k in range(n_steps):
        moment = t0 + timedelta(hours=k * step_hours)
        d = moment.date()
        sun = max(0.0, t_by_day[d] + 4) * math.exp(-p_by_day[d] / 8)
        readings: dict[str, float | None] = {}
        for h in headings:
            hours = range(moment.hour, moment.hour + step_hours)
            share = sum(_PROFILE.get(x, 0.0) for x in hours) / _PROFILE_TOTAL
            counters[h] += capacity[h] * sun * share * rng.uniform(0.7, 1.3)
            if reset_at and reset_at == (h, moment):
                counters[h] = rng.uniform(0, 1)
            value = round(counters[h], 4)
            readings[h] = None if rng.random() < missing_rate else value
        rows.append(EnergyRow(moment, readings))
    return SyntheticFixture(headings, rows, climate, station, reset_at)


def random_fixture(rng: random.Random) -> SyntheticFixture:
    """7-60 days, 1-6 PV devices, missing cells, one counter reset."""
    start = date(2016, 1, 1) + timedelta(days=rng.randrange(-20, 330))
    days = rng.randint(7, 60)
    n = rng.randint(1, 6)
    return make_fixture(rng, start, days, pv_headings(rng, n),
                        step_hours=rng.choice((1, 2, 3)),
                        missing_rate=rng.uniform(0.0, 0.08),
                        weather_missing_rate=rng.uniform(0.0, 0.1))
