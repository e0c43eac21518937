from datetime import datetime, timedelta, timezone

from hypothesis import strategies as st

from energykg.rdf_core import (
    XSD, PlainLiteral, Triple, TypedLiteral, datetime_literal, double_literal,
)
from energykg.vocab import Iri

iri_chars = st.characters(
    blacklist_categories=("Cs", "Cc", "Zs", "Zl", "Zp"),
    blacklist_characters='<>"{}|^`\\ ',
)
iris = st.builds(lambda ns, local: Iri(ns + local),
                 st.sampled_from(["http://ex.org/", "https://w3id.org/seas/", "urn:x:"]),
                 st.text(iri_chars, max_size=12))

doubles = st.floats(allow_nan=False, allow_infinity=False).map(double_literal)
datetimes = st.datetimes(min_value=datetime(1900, 1, 1), max_value=datetime(2100, 1, 1)).map(
    lambda d: datetime_literal(d.replace(microsecond=0, tzinfo=timezone.utc)))
plain = st.text(st.characters(blacklist_categories=("Cs",)), max_size=20).map(PlainLiteral)
other_typed = st.builds(TypedLiteral, st.text(st.characters(blacklist_categories=("Cs",)), max_size=10),
                        st.just(Iri(XSD + "string")))
objects = st.one_of(iris, doubles, datetimes, plain, other_typed)
triples = st.builds(Triple, iris, iris, objects)


# small vocabularies so random patterns actually join
SMALL_S = [Iri(f"http://ex.org/s{i}") for i in range(6)]
SMALL_P = [Iri(f"http://ex.org/p{i}") for i in range(3)]
BASE_TIME = datetime(2016, 1, 1, tzinfo=timezone.utc)
SMALL_LIT = (
    [double_literal(v) for v in (-1.5, 0.0, 2.0, 7.25)]
    + [datetime_literal(BASE_TIME + timedelta(days=d)) for d in (0, 1, 40)]
    + [PlainLiteral(x) for x in ("a", "b", "Zeta")]
)
SMALL_O = SMALL_S + SMALL_LIT
small_triples = st.builds(Triple, st.sampled_from(SMALL_S), st.sampled_from(SMALL_P), st.sampled_from(SMALL_O))
