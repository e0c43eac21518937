import random

import pytest
from hypothesis import given, strategies as st

from energykg.vocab import DEFAULT_BASE, Iri, MintError, RegistryError, TermRegistry


def test_expand_seas(registry):
    assert registry.expand("seas:subSystemOf") == Iri("https://w3id.org/seas/subSystemOf")


def test_expand_rdf_type(registry):
    assert registry.expand("rdf:type") == Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def test_expand_unknown_prefix(registry):
    with pytest.raises(RegistryError):
        registry.expand("bogus:x")


@pytest.mark.parametrize("bad", ["", "no-scheme", "http://a b", "http://a<b>", "http://x/\"q\""])
def test_iri_rejects(bad):
    with pytest.raises(ValueError):
        Iri(bad)


def test_iri_equality_is_textual():
    assert Iri("http://a/b") == Iri("http://a/b")
    assert Iri("http://a/b") != Iri("http://a/B")


def test_required_constants_present(registry):
    T = registry.terms
    expected = {
        T.distribution_network: "https://w3id.org/seas/ElectricPowerDistributionNetwork",
        T.transmission_system: "https://w3id.org/seas/ElectricPowerTransmissionSystem",
        T.is_powered_by: "https://w3id.org/seas/isPoweredBy",
        T.powers: "https://w3id.org/seas/powers",
        T.produced_power: "https://w3id.org/seas/producedElectricPower",
        T.consumed_power: "https://w3id.org/seas/consumedElectricPower",
        T.sub_system_of: "https://w3id.org/seas/subSystemOf",
        T.evaluation_class: "https://w3id.org/seas/ElectricPowerEvaluation",
        T.evaluation: "https://w3id.org/seas/evaluation",
        T.evaluated_value: "https://w3id.org/seas/evaluatedValue",
        T.has_result: "http://www.w3.org/ns/sosa/hasResult",
        T.result_time: "http://www.w3.org/ns/sosa/resultTime",
    }
    for term, text in expected.items():
        assert term.value == text
    ca = registry.prefixes["ca"]
    for term, local in [(T.station, "Station"), (T.observation, "Observation"),
                        (T.source_station, "sourceStation"), (T.with_data_type, "withDataType"),
                        (T.retrieve_weather_from, "retrieveWeatherFrom")]:
        assert term.value == ca + local


def test_expand_compact_identity(registry):
    for curie in ["seas:subSystemOf", "sosa:resultTime", "ca:Station", ":DE_KN_COSSMIC", "xsd:double"]:
        iri = registry.expand(curie)
        assert registry.compact(iri) == curie
        assert registry.expand(registry.compact(iri)) == iri


def test_compact_falls_back_for_path_names(registry):
    iri = registry.mint_individual("evaluation", ("DE_KN_residential1_pv", "2016-05-01T00:00:00Z"))
    assert registry.compact(iri) is None


def test_mint_examples(registry):
    assert registry.mint_individual("device", ("DE", "KN", "industrial1", "pv", "1")) == \
        Iri(DEFAULT_BASE + "DE_KN_industrial1_pv_1")
    assert registry.mint_individual("network", ("DE", "KN", "COSSMIC")) == Iri(DEFAULT_BASE + "DE_KN_COSSMIC")
    ev = registry.mint_individual("evaluation", ("DE_KN_residential1_pv", "2016-05-01T00:00:00Z"))
    assert ev == Iri(DEFAULT_BASE + "evaluation/DE_KN_residential1_pv/2016-05-01T00-00-00Z")
    assert ev != registry.mint_individual("device", ("DE", "KN", "residential1", "pv"))


@pytest.mark.parametrize("kind,parts", [
    ("device", ("DE", "KN", "industrial1", "pv 1")),
    ("device", ()),
    ("station", ("a/b",)),
    ("evaluation", ("x", "2016-05-01 00:00")),
    ("network", ("DE", "KN", "cossmic")),
    ("device", ("DE", "KN", "industrial1", "pv_1")),
    ("Bad", ("x",)),
])
def test_mint_rejects(registry, kind, parts):
    with pytest.raises(MintError):
        registry.mint_individual(kind, parts)


def test_custom_base():
    reg = TermRegistry(base="https://data.example.com/kg#")
    assert reg.mint_individual("network", ("DE", "KN", "COSSMIC")).value == "https://data.example.com/kg#DE_KN_COSSMIC"


def test_prefix_file_roundtrip(tmp_path):
    path = tmp_path / "prefixes.tsv"
    path.write_text("# comment\nex\thttp://ex.org/\nseas\thttps://w3id.org/seas/\n", encoding="utf-8")
    reg = TermRegistry.from_file(path)
    assert reg.expand("ex:a").value == "http://ex.org/a"
    path.write_text("ex\thttp://ex.org/\nex\thttp://other/\n", encoding="utf-8")
    with pytest.raises(RegistryError):
        TermRegistry.from_file(path)


def _random_parts(rng):
    kind = rng.choice(["locality", "network", "site", "device", "evaluation", "station", "observation"])
    country = rng.choice(["DE", "FR", "NL"])
    loc = rng.choice(["KN", "B", "HH"])
    site = rng.choice(["residential", "industrial", "public"]) + str(rng.randint(1, 12))
    if kind == "locality":
        return kind, (country, loc)
    if kind == "network":
        return kind, (country, loc, rng.choice(["COSSMIC", "GRID", "N1"]))
    if kind == "site":
        return kind, (country, loc, site)
    if kind == "device":
        dev = rng.choice(["pv", "grid_import", "heat_pump", "ev", "pv_facade"])
        parts = (country, loc, site, dev)
        return kind, parts + ((str(rng.randint(1, 4)),) if rng.random() < 0.5 else ())
    if kind == "evaluation":
        return kind, ("_".join((country, loc, site, "pv")),
                      f"2016-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}T{rng.randint(0, 23):02d}:00:00Z")
    if kind == "station":
        return kind, (rng.choice(["GME0001", "GME0002", "X_1"]),)
    return kind, (rng.choice(["GME0001", "X_1"]), f"2016-01-{rng.randint(1, 31):02d}", rng.choice(["TMAX", "PRCP"]))


def test_mint_injective_on_random_sample(registry):
    rng = random.Random(7)
    seen = {}
    for _ in range(20000):
        key = _random_parts(rng)
        iri = registry.mint_individual(*key)
        assert seen.setdefault(iri, key) == key
        assert registry.mint_individual(*key) == iri


@given(st.lists(st.from_regex(r"[A-Za-z0-9_]{1,8}", fullmatch=True), min_size=1, max_size=4),
       st.lists(st.from_regex(r"[A-Za-z0-9_]{1,8}", fullmatch=True), min_size=1, max_size=4))
def test_path_kinds_injective(registry, a, b):
    if a != b:
        assert registry.mint_individual("thing", a) != registry.mint_individual("thing", b)
    assert registry.mint_individual("thing", a) != registry.mint_individual("other", a)
