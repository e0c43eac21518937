from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .heading_parser import RoleTable
from .uplift import DatatypeRegistry, load_station_map
from .vocab import DEFAULT_BASE, Iri, TermRegistry

CONFIG_ENV = "ENERGYKG_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    """Pipeline settings; every file path is optional and falls back to the bundled default.

    Loaded from JSON.  Relative paths resolve against the config file's directory.
    """

    base_iri: str = DEFAULT_BASE
    prefixes: Path | None = None
    roles: Path | None = None
    datatypes: Path | None = None
    stations: Path | None = None
    network: str = "DE_KN_COSSMIC"
    locality_label: str | None = "Konstanz"

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("prefixes", "roles", "datatypes", "stations"):
            if raw.get(key) is not None:
                raw[key] = (path.parent / raw[key]).resolve()
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for key in ("prefixes", "roles", "datatypes", "stations"):
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{key} file not found: {p}")
        try:
            self.registry()
            self.role_table()
            self.datatype_registry()
            self.station_map()
            self.network_iri()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def registry(self) -> TermRegistry:
        if self.prefixes is None:
            return TermRegistry(base=self.base_iri)
        return TermRegistry.from_file(self.prefixes, base=self.base_iri)

    def role_table(self) -> RoleTable:
        return RoleTable.from_file(self.roles) if self.roles else RoleTable.default()

    def datatype_registry(self) -> DatatypeRegistry:
        return DatatypeRegistry.from_file(self.datatypes) if self.datatypes else DatatypeRegistry.default()

    def station_map(self) -> dict[str, Iri]:
        return load_station_map(self.stations, self.registry()) if self.stations else {}

    def network_iri(self) -> Iri:
        return self.registry().system("network", self.network)
