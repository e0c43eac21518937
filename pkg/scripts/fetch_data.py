"""Download the 2016 household table and one GHCN-Daily station, in pipeline format.

Writes into DATA_DIR (default ./data):
  household_2016.csv    utc_timestamp plus the selected device columns, 2016 rows only
  climate_konstanz.csv  station,date,datatype,value,unit long table (raw GHCN units)
  stations.tsv          KN -> station id
  config.json           pipeline config pointing at stations.tsv

The GHCN station id is not guessed; pass the one nearest Konstanz with --station.
"""
import argparse
import csv
import io
import json
import logging
import urllib.request
from pathlib import Path

OPSD_URL = ("https://data.open-power-system-data.org/household_data/2020-04-15/"
            "household_data_60min_singleindex.csv")
GHCN_URL = "https://www.ncei.noaa.gov/data/global-historical-climatology-network-daily/access/{station}.csv"
DEVICES = ["DE_KN_residential1_pv", "DE_KN_residential2_pv", "DE_KN_industrial1_pv_1", "DE_KN_industrial2_pv"]
UNITS = {"TMAX": "tenths_degC", "PRCP": "tenths_mm"}

log = logging.getLogger("fetch_data")


def download(url: str) -> str:
    log.info("GET %s", url)
    with urllib.request.urlopen(url, timeout=300) as resp:
        return resp.read().decode("utf-8")


def trim_household(text: str, year: int, devices: list[str]) -> str:
    reader = csv.DictReader(io.StringIO(text))
    missing = [d for d in devices if d not in reader.fieldnames]
    if missing:
        raise SystemExit(f"columns not in household table: {missing}")
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["utc_timestamp", *devices])
    prefix = str(year)
    for row in reader:
        if row["utc_timestamp"].startswith(prefix):
            w.writerow([row["utc_timestamp"], *(row[d] for d in devices)])
    return out.getvalue()


def ghcn_long(text: str, year: int) -> str:
    """Wide GHCN access CSV (one column per element) to the long record table."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["station", "date", "datatype", "value", "unit"])
    for row in csv.DictReader(io.StringIO(text)):
        if not row["DATE"].startswith(str(year)):
            continue
        for code, unit in UNITS.items():
            value = (row.get(code) or "").strip()
            if value:
                w.writerow([row["STATION"], row["DATE"], code, value, unit])
    return out.getvalue()


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--station", required=True, help="GHCN-Daily station id")
    p.add_argument("--year", type=int, default=2016)
    p.add_argument("--devices", default=",".join(DEVICES))
    p.add_argument("--out", type=Path, default=Path("data"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    args.out.mkdir(parents=True, exist_ok=True)
    devices = [d for d in args.devices.split(",") if d]
    (args.out / "household_2016.csv").write_text(trim_household(download(OPSD_URL), args.year, devices))
    (args.out / "climate_konstanz.csv").write_text(ghcn_long(download(GHCN_URL.format(station=args.station)), args.year))
    (args.out / "stations.tsv").write_text(f"KN\t{args.station}\n")
    (args.out / "config.json").write_text(json.dumps({"stations": "stations.tsv"}, indent=2) + "\n")
    log.info("wrote %s", args.out)


if __name__ == "__main__":
    main()
