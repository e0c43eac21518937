"""Column headings of the household table -> typed system descriptors.

Grammar::

    COUNTRY '_' LOCALITY '_' SITEKIND SITEORD '_' DEVICEKIND ['_' DEVICEORD]

DEVICEKIND may contain underscores; it is resolved against the role table.
Kind segments always start with a letter, so a trailing all-digit token is
unambiguously the device ordinal.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .vocab import DEFAULTS_DIR, Iri, TermRegistry, load_tsv_pairs

SITE_KINDS = ("residential", "industrial", "public")

_COUNTRY = re.compile(r"^[A-Z]{2}$")
_LOCALITY = re.compile(r"^[A-Z]+$")
_SITE = re.compile(r"^([a-z]+)([1-9][0-9]*)$")
_ORDINAL = re.compile(r"^[1-9][0-9]*$")
_KIND = re.compile(r"^[a-z][a-z0-9]*(_[a-z][a-z0-9]*)*$")


class HeadingError(ValueError):
    pass


class PowerRole(str, enum.Enum):
    PRODUCED = "produced"
    CONSUMED = "consumed"


class RoleTable:
    """device kind -> power role. Kinds missing from the table are rejected."""

    def __init__(self, roles: Mapping[str, PowerRole | str]):
        table = {}
        for kind, role in roles.items():
            if not _KIND.match(kind):
                raise HeadingError(f"invalid device kind {kind!r} in role table")
            table[kind] = PowerRole(role)
        self._roles = MappingProxyType(table)

    @classmethod
    def from_file(cls, path: str | Path) -> "RoleTable":
        roles: dict[str, str] = {}
        for fields in load_tsv_pairs(path):
            kind, role = fields[0], fields[1]
            if kind in roles:
                raise HeadingError(f"duplicate device kind {kind!r} in {path}")
            if role not in ("produced", "consumed"):
                raise HeadingError(f"{path}: role for {kind!r} must be produced|consumed")
            roles[kind] = role
        return cls(roles)

    @classmethod
    def default(cls) -> "RoleTable":
        return cls.from_file(DEFAULTS_DIR / "roles.tsv")

    def __contains__(self, kind: str) -> bool:
        return kind in self._roles

    def __getitem__(self, kind: str) -> PowerRole:
        return self._roles[kind]

    def kinds(self) -> list[str]:
        return sorted(self._roles)


_DEFAULT_ROLES: RoleTable | None = None


def default_roles() -> RoleTable:
    global _DEFAULT_ROLES
    if _DEFAULT_ROLES is None:
        _DEFAULT_ROLES = RoleTable.default()
    return _DEFAULT_ROLES


@dataclass(frozen=True, order=True)
class SystemDescriptor:
    country: str
    locality: str
    site_kind: str
    site_ordinal: int
    device_kind: str
    device_ordinal: int | None
    power_role: PowerRole

    @property
    def locality_name(self) -> str:
        return f"{self.country}_{self.locality}"

    @property
    def site_name(self) -> str:
        return f"{self.locality_name}_{self.site_kind}{self.site_ordinal}"

    @property
    def device_name(self) -> str:
        return canonical_heading(self)


def parse_heading(text: str, roles: RoleTable | None = None) -> SystemDescriptor:
    roles = roles or default_roles()
    tokens = text.split("_")
    if len(tokens) < 4:
        raise HeadingError(f"{text!r}: expected COUNTRY_LOCALITY_SITE_DEVICE")
    country, locality, site, *tail = tokens
    if not _COUNTRY.match(country):
        raise HeadingError(f"{text!r}: bad country segment {country!r}")
    if not _LOCALITY.match(locality):
        raise HeadingError(f"{text!r}: bad locality segment {locality!r}")
    m = _SITE.match(site)
    if not m or m.group(1) not in SITE_KINDS:
        raise HeadingError(f"{text!r}: unknown site kind in segment {site!r}")

    ordinal = None
    if len(tail) > 1 and _ORDINAL.match(tail[-1]):
        ordinal = int(tail[-1])
        tail = tail[:-1]
    kind = "_".join(tail)
    if kind not in roles:
        raise HeadingError(f"{text!r}: device kind {kind!r} not in role table")
    return SystemDescriptor(
        country=country,
        locality=locality,
        site_kind=m.group(1),
        site_ordinal=int(m.group(2)),
        device_kind=kind,
        device_ordinal=ordinal,
        power_role=roles[kind],
    )


def canonical_heading(d: SystemDescriptor) -> str:
    head = f"{d.country}_{d.locality}_{d.site_kind}{d.site_ordinal}_{d.device_kind}"
    return head if d.device_ordinal is None else f"{head}_{d.device_ordinal}"


def power_property(d: SystemDescriptor, registry: TermRegistry) -> Iri:
    if d.power_role is PowerRole.PRODUCED:
        return registry.terms.produced_power
    return registry.terms.consumed_power
