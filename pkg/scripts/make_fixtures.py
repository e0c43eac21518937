"""Regenerate the bundled test fixtures under tests/fixtures/ (deterministic per seed)."""
import argparse
import csv
import io
import random
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from zoneinfo import ZoneInfo

from energykg.synthetic import make_fixture, weather
from energykg.uplift import EnergyRow, energy_table_text

HERE = Path(__file__).resolve().parent
OUT = HERE.parent / "tests" / "fixtures"

MONTH_PV = ["DE_KN_industrial1_pv_1", "DE_KN_industrial2_pv", "DE_KN_residential1_pv", "DE_KN_residential2_pv"]
MONTH_OTHER = [
    "DE_KN_industrial1_grid_import", "DE_KN_industrial1_pv_2", "DE_KN_industrial3_pv_facade",
    "DE_KN_industrial3_area_room_2", "DE_KN_industrial3_ev", "DE_KN_public1_grid_import",
    "DE_KN_residential1_heat_pump", "DE_KN_residential1_dishwasher", "DE_KN_residential2_washing_machine",
    "DE_KN_residential4_grid_export", "DE_KN_residential4_storage_charge", "DE_KN_residential4_storage_decharge",
]


def small_table(rng: random.Random) -> str:
    headings = ["DE_KN_residential1_pv", "DE_KN_residential1_grid_import", "DE_KN_industrial1_pv_1"]
    t0 = datetime(2016, 5, 1, tzinfo=timezone.utc)
    cells = [(i, h) for i in range(24) for h in headings]
    blank = set(rng.sample(cells, 10))
    counters = {h: rng.uniform(100, 900) for h in headings}
    rows = []
    for i in range(24):
        readings = {}
        for h in headings:
            counters[h] += rng.uniform(0, 2)
            readings[h] = None if (i, h) in blank else round(counters[h], 3)
        rows.append(EnergyRow(t0 + timedelta(hours=i), readings))
    return energy_table_text(headings, rows)


def climate_year(rng: random.Random) -> str:
    records = weather(rng, date(2015, 1, 1), 365, "GME00000001")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["station", "date", "datatype", "value", "unit"])
    for r in records:
        w.writerow([r.station_id, r.date.isoformat(), r.datatype, repr(r.value), r.unit])
    return buf.getvalue()


def with_local_columns(text: str) -> str:
    """Add the cet_cest_timestamp and interpolated columns of the public dataset."""
    rows = list(csv.reader(io.StringIO(text)))
    berlin = ZoneInfo("Europe/Berlin")
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow([rows[0][0], "cet_cest_timestamp", *rows[0][1:], "interpolated"])
    for row in rows[1:]:
        utc = datetime.strptime(row[0], "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        w.writerow([row[0], utc.astimezone(berlin).isoformat(), *row[1:], ""])
    return out.getvalue()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2016)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    OUT.mkdir(parents=True, exist_ok=True)

    (OUT / "household_24x3.csv").write_text(small_table(rng), encoding="utf-8")
    (OUT / "climate_730.csv").write_text(climate_year(rng), encoding="utf-8")

    fx = make_fixture(rng, date(2016, 5, 1), 31, sorted(MONTH_PV + MONTH_OTHER),
                      missing_rate=0.02, weather_missing_rate=0.04)
    (OUT / "household_month.csv").write_text(with_local_columns(fx.energy_csv()), encoding="utf-8")
    (OUT / "climate_month.csv").write_text(fx.climate_csv(), encoding="utf-8")
    (OUT / "stations.tsv").write_text(f"KN\t{fx.station}\n", encoding="utf-8")
    (OUT / "config.json").write_text('{\n  "stations": "stations.tsv"\n}\n', encoding="utf-8")
    print(f"wrote fixtures to {OUT} (reset: {fx.reset})")


if __name__ == "__main__":
    main()
