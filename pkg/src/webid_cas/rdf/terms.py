"""RDF term and triple model.

Terms are immutable and hashable so triples can live in sets. IRIs are kept
as plain strings; parsers are responsible for resolving relative references
before constructing an :class:`IRI`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union
from urllib.parse import urljoin, urlsplit

from ..errors import ParseError

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

_ABSOLUTE_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


@dataclass(frozen=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return "_:" + self.label


XSD_STRING = IRI(XSD_NS + "string")
XSD_INTEGER = IRI(XSD_NS + "integer")
XSD_DECIMAL = IRI(XSD_NS + "decimal")
XSD_DOUBLE = IRI(XSD_NS + "double")
XSD_BOOLEAN = IRI(XSD_NS + "boolean")
XSD_DATE = IRI(XSD_NS + "date")
XSD_HEX_BINARY = IRI(XSD_NS + "hexBinary")
RDF_TYPE = IRI(RDF_NS + "type")
RDF_LANG_STRING = IRI(RDF_NS + "langString")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: IRI = XSD_STRING
    language: str | None = field(default=None)

    def __post_init__(self) -> None:
        if self.language is not None and self.datatype != RDF_LANG_STRING:
            raise ValueError("language-tagged literal must use the rdf:langString datatype")
        if self.language is None and self.datatype == RDF_LANG_STRING:
            raise ValueError("rdf:langString literal requires a language tag")

    def __str__(self) -> str:
        return self.lexical


Term = Union[IRI, Literal, BlankNode]


@dataclass(frozen=True)
class Triple:
    subject: IRI | BlankNode
    predicate: IRI
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject must not be a literal")
        if not isinstance(self.predicate, IRI):
            raise ValueError("triple predicate must be an IRI")


@dataclass(frozen=True)
class Quad:
    """A triple together with the name of the graph it was found in."""

    graph: str
    triple: Triple


def is_absolute_iri(value: str) -> bool:
    return bool(_ABSOLUTE_IRI_RE.match(value))


def defragment(iri: str) -> str:
    return iri.split("#", 1)[0]


def resolve_iri(base: str | None, reference: str) -> str:
    """Resolve ``reference`` against ``base`` per RFC 3986.

    Fragment-only references are handled explicitly because urljoin drops an
    empty fragment ("#" must resolve to the base document plus "#").
    """
    if is_absolute_iri(reference):
        return reference
    if base is None:
        raise ParseError(f"relative IRI <{reference}> with no base")
    if reference.startswith("#"):
        return defragment(base) + reference
    if reference == "":
        return base
    resolved = urljoin(defragment(base), reference)
    if not is_absolute_iri(resolved):
        raise ParseError(f"cannot resolve <{reference}> against <{base}>")
    return resolved


def local_name(iri: IRI | str) -> str:
    """Local part of an IRI: everything after the fragment, else the last path segment."""
    value = iri.value if isinstance(iri, IRI) else iri
    if "#" in value:
        return value.rsplit("#", 1)[1]
    return value.rstrip("/").rsplit("/", 1)[-1]


def iri_scheme(iri: IRI | str) -> str:
    value = iri.value if isinstance(iri, IRI) else iri
    return urlsplit(value).scheme


def relabel_blank_nodes(triples: Iterable[Triple], prefix: str, start: int = 0) -> list[Triple]:
    """Rewrite blank-node labels to ``{prefix}{n}``, preserving co-reference.

    Used at ingestion boundaries: blank-node labels are document-scoped, so
    inserting parsed triples into a shared graph must not capture labels
    already present there.
    """
    mapping: dict[str, BlankNode] = {}
    counter = start

    def fresh(label: str) -> BlankNode:
        nonlocal counter
        node = mapping.get(label)
        if node is None:
            node = BlankNode(f"{prefix}{counter}")
            counter += 1
            mapping[label] = node
        return node

    out: list[Triple] = []
    for t in triples:
        s = fresh(t.subject.label) if isinstance(t.subject, BlankNode) else t.subject
        o = fresh(t.object.label) if isinstance(t.object, BlankNode) else t.object
        out.append(Triple(s, t.predicate, o))
    return out
