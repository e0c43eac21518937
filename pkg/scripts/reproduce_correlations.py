"""Run convert -> climate -> analyze on the real 2016 data and compare with the published coefficients.

Expects the layout written by fetch_data.py.
"""
import argparse
import csv
import sys
import tempfile
from pathlib import Path

from energykg.cli import main as cli

DEVICES = ["DE_KN_residential1_pv", "DE_KN_residential2_pv", "DE_KN_industrial1_pv_1", "DE_KN_industrial2_pv"]
PUBLISHED = {
    "TMAX": (0.792388, 0.782947, 0.779747, 0.802174),
    "PRCP": (-0.190667, -0.164119, -0.140355, -0.124258),
}
TOLERANCE = {"TMAX": 0.05, "PRCP": 0.07}


def run(data: Path, out: Path) -> bool:
    cfg = str(data / "config.json")
    with tempfile.TemporaryDirectory() as tmp:
        h, c = Path(tmp) / "h.nt", Path(tmp) / "c.nt"
        steps = [
            ["--config", cfg, "convert", str(data / "household_2016.csv"), "--out", str(h)],
            ["--config", cfg, "climate", str(data / "climate_konstanz.csv"), "--out", str(c)],
            ["--config", cfg, "analyze", str(h), str(c), "--devices", ",".join(DEVICES),
             "--year", "2016", "--out", str(out)],
        ]
        for argv in steps:
            if cli(argv) != 0:
                return False
    with open(out / "correlations.csv", newline="") as fh:
        got = {(r["datatype"], r["device"]): float(r["r"]) for r in csv.DictReader(fh)}
    ok = True
    print(f"{'':6}" + "".join(f"{d:>26}" for d in DEVICES))
    for code, values in PUBLISHED.items():
        cells = []
        for dev, ref in zip(DEVICES, values):
            r = got.get((code, dev))
            good = r is not None and abs(r - ref) <= TOLERANCE[code]
            ok &= good
            cells.append(f"{'-' if r is None else f'{r:.4f}'} ({ref:+.4f}) {'ok' if good else 'XX'}")
        print(f"{code:6}" + "".join(f"{c:>26}" for c in cells))
    return ok


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--data", type=Path, default=Path("data"))
    p.add_argument("--out", type=Path, default=Path("results"))
    args = p.parse_args()
    sys.exit(0 if run(args.data, args.out) else 1)
