"""N-Triples, Turtle, and N-Quads serialization.

The serializers guarantee only that their output re-parses to a graph
isomorphic to the input; blank-node labels are rewritten where needed to
stay within the N-Triples label grammar.
"""

from __future__ import annotations

import hashlib
import re
from typing import Iterable, Mapping

from ..errors import ValidationError
from .parse import NTRIPLES, TURTLE
from .terms import (
    RDF_TYPE,
    XSD_STRING,
    BlankNode,
    IRI,
    Literal,
    Quad,
    Term,
    Triple,
    is_absolute_iri,
)

_SAFE_LABEL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_PN_LOCAL_OK_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")

_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape_string(value: str) -> str:
    out: list[str] = []
    for ch in value:
        if ch in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(value: str) -> str:
    out: list[str] = []
    for ch in value:
        if ch in '<>"{}|^`\\' or ord(ch) <= 0x20:
            code = ord(ch)
            out.append(f"\\u{code:04X}" if code <= 0xFFFF else f"\\U{code:08X}")
        else:
            out.append(ch)
    return "".join(out)


def _safe_label(label: str) -> str:
    if _SAFE_LABEL_RE.match(label):
        return label
    return "x" + hashlib.sha1(label.encode("utf-8")).hexdigest()[:12]


def term_to_ntriples(term: Term) -> str:
    if isinstance(term, IRI):
        return f"<{_escape_iri(term.value)}>"
    if isinstance(term, BlankNode):
        return "_:" + _safe_label(term.label)
    if isinstance(term, Literal):
        body = f'"{_escape_string(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^<{_escape_iri(term.datatype.value)}>"
    raise ValidationError(f"not an RDF term: {term!r}")


def triple_to_ntriples(triple: Triple) -> str:
    return (
        f"{term_to_ntriples(triple.subject)} "
        f"{term_to_ntriples(triple.predicate)} "
        f"{term_to_ntriples(triple.object)} ."
    )


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    lines = [triple_to_ntriples(t) for t in triples]
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_nquads(quads: Iterable[Quad]) -> str:
    lines = []
    for q in quads:
        t = q.triple
        lines.append(
            f"{term_to_ntriples(t.subject)} {term_to_ntriples(t.predicate)} "
            f"{term_to_ntriples(t.object)} <{_escape_iri(q.graph)}> ."
        )
    return "\n".join(lines) + ("\n" if lines else "")


def _turtle_iri(iri: IRI, prefixes: Mapping[str, str]) -> str:
    best: tuple[str, str] | None = None
    for prefix, namespace in prefixes.items():
        if iri.value.startswith(namespace):
            local = iri.value[len(namespace):]
            if (local == "" or _PN_LOCAL_OK_RE.match(local)) and (
                best is None or len(namespace) > len(prefixes[best[0]])
            ):
                best = (prefix, local)
    if best is not None:
        return f"{best[0]}:{best[1]}"
    return f"<{_escape_iri(iri.value)}>"


def _turtle_term(term: Term, prefixes: Mapping[str, str]) -> str:
    if isinstance(term, IRI):
        return _turtle_iri(term, prefixes)
    if isinstance(term, Literal) and term.language is None and term.datatype != XSD_STRING:
        return f'"{_escape_string(term.lexical)}"^^{_turtle_iri(term.datatype, prefixes)}'
    return term_to_ntriples(term)


def serialize_turtle(triples: Iterable[Triple], prefixes: Mapping[str, str] | None = None) -> str:
    """Turtle writer: subject-grouped with ';' continuation, 'a' for rdf:type."""
    prefixes = dict(prefixes or {})
    out: list[str] = []
    for prefix, namespace in prefixes.items():
        out.append(f"@prefix {prefix}: <{_escape_iri(namespace)}> .")
    if out:
        out.append("")

    by_subject: dict[IRI | BlankNode, list[Triple]] = {}
    order: list[IRI | BlankNode] = []
    for t in triples:
        if t.subject not in by_subject:
            by_subject[t.subject] = []
            order.append(t.subject)
        by_subject[t.subject].append(t)

    for subject in order:
        group = by_subject[subject]
        if isinstance(subject, BlankNode):
            subject_text = "_:" + _safe_label(subject.label)
        else:
            subject_text = _turtle_iri(subject, prefixes)
        parts: list[str] = []
        for t in group:
            predicate_text = "a" if t.predicate == RDF_TYPE else _turtle_iri(t.predicate, prefixes)
            parts.append(f"{predicate_text} {_turtle_term(t.object, prefixes)}")
        body = " ;\n    ".join(parts)
        out.append(f"{subject_text} {body} .")
    return "\n".join(out) + ("\n" if out else "")


def serialize_document(
    triples: Iterable[Triple],
    syntax: str = NTRIPLES,
    prefixes: Mapping[str, str] | None = None,
) -> str:
    """Serialize triples as UTF-8 text in the named syntax.

    All IRIs must be absolute; the output re-parses to a graph isomorphic to
    the input (blank-node labels may be rewritten, co-reference preserved).
    """
    from .. import opslog

    opslog.note("rdf.serialize_document")
    materialized = list(triples)
    for t in materialized:
        for term in (t.subject, t.predicate, t.object):
            if isinstance(term, IRI) and not is_absolute_iri(term.value):
                raise ValidationError(f"cannot serialize relative IRI <{term.value}>")
    if syntax == NTRIPLES:
        return serialize_ntriples(materialized)
    if syntax == TURTLE:
        return serialize_turtle(materialized, prefixes)
    raise ValidationError(f"unknown syntax {syntax!r}")
