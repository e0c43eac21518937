"""Independent reference implementations used to check the package.

None of these touch the graph indexes, the join planner, or the analysis
module; they work from linear scans or directly from the input tables.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from datetime import datetime, timezone

import numpy as np
import pandas as pd

XSD = "http://www.w3.org/2001/XMLSchema#"


# --- triple matching / BGP ----------------------------------------------

def scan_match(triples, s=None, p=None, o=None):
    return {t for t in triples
            if (s is None or t.subject == s) and (p is None or t.predicate == p)
            and (o is None or t.object == o)}


def _kind(term):
    name = type(term).__name__
    if name == "Iri":
        return ("iri",), term.value
    if name == "PlainLiteral":
        return ("plain",), term.lexical
    dt = term.datatype.value
    if dt == XSD + "double":
        return ("num",), float(term.lexical)
    if dt == XSD + "dateTime":
        return ("dt",), datetime.strptime(term.lexical, "%Y-%m-%dT%H:%M:%SZ")
    return ("typed", dt), term.lexical


def oracle_compare(term, op, const):
    k1, v1 = _kind(term)
    k2, v2 = _kind(const)
    if k1 != k2:
        return False
    if k1 == ("iri",) and op not in ("=", "!="):
        return False
    return {"=": v1 == v2, "!=": v1 != v2, "<": v1 < v2, "<=": v1 <= v2,
            ">": v1 > v2, ">=": v1 >= v2}[op]


def brute_force_bgp(triples, patterns, filters, projection):
    """All consistent assignments of graph triples to patterns, by exhaustive
    nested enumeration (each level scans every triple).  A graph is a set, so
    repeated input triples count once."""
    triples = list(dict.fromkeys(triples))
    is_var = lambda t: type(t).__name__ == "Var"  # noqa: E731
    results = Counter()

    def walk(i, binding):
        if i == len(patterns):
            if all(oracle_compare(binding[f.var], f.op, f.value) for f in filters):
                results[tuple(binding[v].n3() for v in projection)] += 1
            return
        pat = patterns[i]
        for t in triples:
            new = dict(binding)
            ok = True
            for pt, val in zip((pat.subject, pat.predicate, pat.object), (t.subject, t.predicate, t.object)):
                if is_var(pt):
                    if new.setdefault(pt, val) != val:
                        ok = False
                        break
                elif pt != val:
                    ok = False
                    break
            if ok:
                walk(i + 1, new)

    walk(0, {})
    return results


def rows_multiset(rows, names):
    return Counter(tuple(r[n].n3() for n in names) for r in rows)


# --- statistics -----------------------------------------------------------

def textbook_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = 0.0
    sx = 0.0
    sy = 0.0
    for a, b in zip(x, y):
        num += (a - mx) * (b - my)
        sx += (a - mx) ** 2
        sy += (b - my) ** 2
    return num / math.sqrt(sx * sy)


# --- counting -------------------------------------------------------------

def count_cells(csv_path):
    """(headings with >=1 value, non-empty cells) by reading the raw table."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    cols = [i for i, h in enumerate(header) if i > 0 and h not in ("cet_cest_timestamp", "interpolated")]
    active = 0
    cells = 0
    for i in cols:
        filled = sum(1 for r in rows[1:] if r[i].strip())
        cells += filled
        active += filled > 0
    return active, cells


def expected_topology_count(headings):
    """Closed form: 1 + 3*sites + 2*devices + localities + grid-feed (site, direction) pairs."""
    sites = set()
    localities = set()
    feeds = set()
    for h in headings:
        parts = h.split("_")
        site = "_".join(parts[:3])
        sites.add(site)
        localities.add("_".join(parts[:2]))
        if h.endswith("grid_import") or h.endswith("grid_export"):
            feeds.add((site, h[-6:]))
    return 1 + 3 * len(sites) + 2 * len(headings) + len(localities) + len(feeds)


# --- flat-file correlation pipeline ----------------------------------------

RAW_SCALE = {"TMAX": 0.1, "PRCP": 0.1}


def flat_correlations(energy_csv, climate_csv, devices, year, datatypes=("TMAX", "PRCP")):
    """Correlation table straight from the CSV files with pandas/numpy.

    Returns {(datatype, device): (r, n)} and the set of undefined pairs.
    """
    table = pd.read_csv(energy_csv, dtype=str, keep_default_na=False)
    stamps = pd.to_datetime(table["utc_timestamp"], utc=True)
    in_year = (stamps >= pd.Timestamp(f"{year}-01-01", tz="UTC")) & (stamps < pd.Timestamp(f"{year + 1}-01-01", tz="UTC"))
    climate = pd.read_csv(climate_csv, dtype={"value": float})
    climate["date"] = pd.to_datetime(climate["date"])
    climate = climate[climate["date"].dt.year == year]

    out = {}
    undefined = set()
    for dev in devices:
        values = pd.to_numeric(table[dev].replace("", np.nan))
        frame = pd.DataFrame({"t": stamps, "v": values})[in_year].dropna()
        last = frame.groupby(frame["t"].dt.date)["v"].last()
        daily = last.diff().iloc[1:]
        daily = daily[daily >= 0]
        for code in datatypes:
            w = climate[climate["datatype"] == code]
            weather = pd.Series(w["value"].to_numpy() * RAW_SCALE[code], index=w["date"].dt.date)
            joined = pd.concat([daily.rename("e"), weather.rename("w")], axis=1, join="inner")
            n = len(joined)
            if n < 2 or joined["e"].nunique() < 2 or joined["w"].nunique() < 2:
                undefined.add((code, dev))
                continue
            out[(code, dev)] = (float(np.corrcoef(joined["e"], joined["w"])[0, 1]), n)
    return out, undefined


def utc(*args):
    return datetime(*args, tzinfo=timezone.utc)
