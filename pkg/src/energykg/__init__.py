"""Household energy tables -> RDF knowledge graph, queries, and weather correlation."""
from .heading_parser import SystemDescriptor, canonical_heading, parse_heading
from .rdf_core import Graph, PlainLiteral, Triple, TypedLiteral, parse_ntriples, serialize
from .vocab import Iri, TermRegistry

__version__ = "0.1.0"

__all__ = [
    "Graph", "Iri", "PlainLiteral", "SystemDescriptor", "TermRegistry", "Triple", "TypedLiteral",
    "canonical_heading", "parse_heading", "parse_ntriples", "serialize",
]
