"""Ontology term registry and the IRI-minting scheme for pipeline individuals.

System individuals (locality, network, site, device) live directly under the
base namespace with their heading-style names, e.g. ``:DE_KN_COSSMIC`` or
``:DE_KN_industrial1_pv_1``.  Every other individual kind gets its own path
segment, e.g. ``:evaluation/DE_KN_residential1_pv/2016-05-01T00-00-00Z``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

DEFAULT_BASE = "http://example.org/energykg/"
DEFAULTS_DIR = Path(__file__).parent / "defaults"

# Characters that cannot appear unescaped inside an N-Triples IRIREF.
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_PREFIX = re.compile(r"^(|[A-Za-z][A-Za-z0-9_.-]*)$")
_LOCAL = re.compile(r"^[A-Za-z0-9_]([A-Za-z0-9_.-]*[A-Za-z0-9_-])?$")


class RegistryError(ValueError):
    pass


class MintError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not self.value or not _SCHEME.match(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")
        if _IRI_FORBIDDEN.search(self.value):
            raise ValueError(f"illegal character in IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Terms:
    """The well-known ontology terms the pipeline emits, resolved once per registry."""

    rdf_type: Iri
    label: Iri
    xsd_double: Iri
    xsd_datetime: Iri
    # SEAS
    system: Iri
    distribution_network: Iri
    transmission_system: Iri
    is_powered_by: Iri
    powers: Iri
    produced_power: Iri
    consumed_power: Iri
    sub_system_of: Iri
    evaluation_class: Iri
    evaluation: Iri
    evaluated_value: Iri
    # climate analysis
    station: Iri
    observation: Iri
    source_station: Iri
    with_data_type: Iri
    retrieve_weather_from: Iri
    # SOSA
    has_result: Iri
    result_time: Iri
    # minted under the base namespace
    located_in: Iri


_TERM_CURIES = {
    "rdf_type": "rdf:type",
    "label": "rdfs:label",
    "xsd_double": "xsd:double",
    "xsd_datetime": "xsd:dateTime",
    "system": "seas:System",
    "distribution_network": "seas:ElectricPowerDistributionNetwork",
    "transmission_system": "seas:ElectricPowerTransmissionSystem",
    "is_powered_by": "seas:isPoweredBy",
    "powers": "seas:powers",
    "produced_power": "seas:producedElectricPower",
    "consumed_power": "seas:consumedElectricPower",
    "sub_system_of": "seas:subSystemOf",
    "evaluation_class": "seas:ElectricPowerEvaluation",
    "evaluation": "seas:evaluation",
    "evaluated_value": "seas:evaluatedValue",
    "station": "ca:Station",
    "observation": "ca:Observation",
    "source_station": "ca:sourceStation",
    "with_data_type": "ca:withDataType",
    "retrieve_weather_from": "ca:retrieveWeatherFrom",
    "has_result": "sosa:hasResult",
    "result_time": "sosa:resultTime",
    "located_in": ":locatedIn",
}

# Name grammars for individuals minted directly under the base namespace.
# The four languages are pairwise disjoint, which keeps minting injective.
_UPPER = re.compile(r"^[A-Z]+$")
_COUNTRY = re.compile(r"^[A-Z]{2}$")
_NETWORK_NAME = re.compile(r"^[A-Z0-9]+$")
_SITE = re.compile(r"^[a-z]+[1-9][0-9]*$")
_DEVICE_KIND = re.compile(r"^[a-z][a-z0-9]*(_[a-z][a-z0-9]*)*$")
_ORDINAL = re.compile(r"^[1-9][0-9]*$")
_PART = re.compile(r"^[A-Za-z0-9_]+$")
_KIND = re.compile(r"^[a-z][a-z0-9_]*$")
_TIMESTAMP_PART = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_DATE_PART = re.compile(r"^\d{4}-\d{2}-\d{2}$")

SYSTEM_KINDS = ("locality", "network", "site", "device")


def _check_system_parts(kind: str, parts: tuple[str, ...]) -> None:
    def bad() -> MintError:
        return MintError(f"parts {parts!r} do not form a {kind} name")

    if len(parts) < 2 or not _COUNTRY.match(parts[0]) or not _UPPER.match(parts[1]):
        raise bad()
    rest = parts[2:]
    if kind == "locality":
        ok = not rest
    elif kind == "network":
        ok = len(rest) == 1 and bool(_NETWORK_NAME.match(rest[0]))
    elif kind == "site":
        ok = len(rest) == 1 and bool(_SITE.match(rest[0]))
    else:
        ok = (
            len(rest) in (2, 3)
            and bool(_SITE.match(rest[0]))
            and bool(_DEVICE_KIND.match(rest[1]))
            and (len(rest) == 2 or bool(_ORDINAL.match(rest[2])))
        )
    if not ok:
        raise bad()


def _path_part(part: str) -> str:
    if _TIMESTAMP_PART.match(part):
        # '-' never occurs in ordinary parts, so this stays injective
        return part.replace(":", "-")
    if _DATE_PART.match(part) or _PART.match(part):
        return part
    raise MintError(f"illegal characters in name part {part!r}")


def load_tsv_pairs(path: str | Path) -> list[tuple[str, ...]]:
    """Read tab-separated rows, skipping blank lines and ``#`` comments."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = tuple(f.strip() for f in line.split("\t"))
        if len(fields) < 2 or not all(fields):
            raise RegistryError(f"{path}:{lineno}: expected tab-separated fields")
        rows.append(fields)
    return rows


def load_prefix_map(path: str | Path) -> dict[str, str]:
    prefixes: dict[str, str] = {}
    for fields in load_tsv_pairs(path):
        prefix, namespace = fields[0], fields[1]
        if prefix in prefixes:
            raise RegistryError(f"duplicate prefix {prefix!r} in {path}")
        prefixes[prefix] = namespace
    return prefixes


class TermRegistry:
    """Prefix map plus minting; immutable once constructed.

    The base namespace is always registered under the empty prefix.
    """

    def __init__(self, prefixes: Mapping[str, str] | None = None, base: str = DEFAULT_BASE):
        if prefixes is None:
            prefixes = load_prefix_map(DEFAULTS_DIR / "prefixes.tsv")
        Iri(base)
        merged = dict(prefixes)
        if merged.get("", base) != base:
            raise RegistryError("empty prefix is reserved for the base namespace")
        merged[""] = base
        for prefix, namespace in merged.items():
            if not _PREFIX.match(prefix):
                raise RegistryError(f"invalid prefix name {prefix!r}")
            Iri(namespace)
        self.base = base
        self._prefixes = MappingProxyType(merged)
        # longest namespace first so compact() picks the most specific prefix
        self._by_length = sorted(merged.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        self.terms = Terms(**{name: self.expand(curie) for name, curie in _TERM_CURIES.items()})

    @classmethod
    def from_file(cls, path: str | Path, base: str = DEFAULT_BASE) -> "TermRegistry":
        """Registry from a prefix file layered over the bundled defaults."""
        prefixes = load_prefix_map(DEFAULTS_DIR / "prefixes.tsv")
        prefixes.update(load_prefix_map(path))
        return cls(prefixes, base=base)

    @property
    def prefixes(self) -> Mapping[str, str]:
        return self._prefixes

    def expand(self, curie: str) -> Iri:
        prefix, sep, local = curie.partition(":")
        if not sep:
            raise RegistryError(f"not a prefixed name: {curie!r}")
        try:
            namespace = self._prefixes[prefix]
        except KeyError:
            raise RegistryError(f"unknown prefix {prefix!r} in {curie!r}") from None
        return Iri(namespace + local)

    def compact(self, iri: Iri) -> str | None:
        """Shortest safe prefixed name for ``iri``, or None when no prefix applies."""
        for prefix, namespace in self._by_length:
            if iri.value.startswith(namespace):
                local = iri.value[len(namespace):]
                if _LOCAL.match(local):
                    return f"{prefix}:{local}"
        return None

    def mint_individual(self, kind: str, parts: Iterable[str]) -> Iri:
        parts = tuple(parts)
        if not parts:
            raise MintError("no name parts given")
        if not _KIND.match(kind):
            raise MintError(f"illegal individual kind {kind!r}")
        if kind in SYSTEM_KINDS:
            _check_system_parts(kind, parts)
            return Iri(self.base + "_".join(parts))
        return Iri(self.base + kind + "/" + "/".join(_path_part(p) for p in parts))

    # convenience wrappers used throughout the uplift
    def system(self, kind: str, name: str) -> Iri:
        """Mint a system individual from its already-joined name (e.g. ``DE_KN_COSSMIC``)."""
        return self.mint_individual(kind, split_system_name(kind, name))


def split_system_name(kind: str, name: str) -> tuple[str, ...]:
    tokens = name.split("_")
    if kind != "device" or len(tokens) < 4:
        return tuple(tokens)
    head, tail = tokens[:3], tokens[3:]
    if len(tail) > 1 and _ORDINAL.match(tail[-1]):
        return (*head, "_".join(tail[:-1]), tail[-1])
    return (*head, "_".join(tail))
