"""RDF data model, Turtle/N-Triples syntax, quad store, and graph isomorphism."""

from .canon import isomorphic, relabel, stable_labeling
from .parse import NQUADS, NTRIPLES, TURTLE, parse_document, parse_nquads
from .serialize import (
    serialize_document,
    serialize_nquads,
    serialize_ntriples,
    serialize_turtle,
    term_to_ntriples,
    triple_to_ntriples,
)
from .store import QuadStore
from .terms import (
    RDF_LANG_STRING,
    RDF_NS,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_HEX_BINARY,
    XSD_INTEGER,
    XSD_NS,
    XSD_STRING,
    BlankNode,
    IRI,
    Literal,
    Quad,
    Term,
    Triple,
    defragment,
    is_absolute_iri,
    iri_scheme,
    local_name,
    relabel_blank_nodes,
    resolve_iri,
)

__all__ = [
    "BlankNode",
    "IRI",
    "Literal",
    "NQUADS",
    "NTRIPLES",
    "Quad",
    "QuadStore",
    "RDF_LANG_STRING",
    "RDF_NS",
    "RDF_TYPE",
    "TURTLE",
    "Term",
    "Triple",
    "XSD_BOOLEAN",
    "XSD_DATE",
    "XSD_DECIMAL",
    "XSD_DOUBLE",
    "XSD_HEX_BINARY",
    "XSD_INTEGER",
    "XSD_NS",
    "XSD_STRING",
    "defragment",
    "is_absolute_iri",
    "iri_scheme",
    "isomorphic",
    "local_name",
    "parse_document",
    "parse_nquads",
    "relabel",
    "relabel_blank_nodes",
    "resolve_iri",
    "stable_labeling",
    "serialize_document",
    "serialize_nquads",
    "serialize_ntriples",
    "serialize_turtle",
    "term_to_ntriples",
    "triple_to_ntriples",
]
