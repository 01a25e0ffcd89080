"""Turtle and N-Triples parsing.

Covers the Turtle constructs needed for attribute-style data documents:
prefixes, @base, ``a``, predicate-object lists, object lists, blank-node
property lists, typed and language-tagged literals, numeric and boolean
shorthand, short and long strings, and comments. RDF collections are
rejected with a clear diagnostic. N-Triples (and, internally, N-Quads) are
parsed by the same machinery with the Turtle-only constructs disallowed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError, ValidationError
from .terms import (
    RDF_LANG_STRING,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    IRI,
    Literal,
    Quad,
    Term,
    Triple,
    is_absolute_iri,
    resolve_iri,
)

TURTLE = "turtle"
NTRIPLES = "ntriples"
NQUADS = "nquads"

_PN_LOCAL_RE = re.compile(r"[A-Za-z0-9_À-￿](?:[A-Za-z0-9_.\-À-￿]*[A-Za-z0-9_\-À-￿])?")
_PN_PREFIX_RE = re.compile(r"[A-Za-zÀ-￿](?:[A-Za-z0-9_.\-À-￿]*[A-Za-z0-9_\-À-￿])?")
_BNODE_LABEL_RE = re.compile(r"[A-Za-z0-9_À-￿](?:[A-Za-z0-9_.\-À-￿]*[A-Za-z0-9_\-À-￿])?")
_NUMBER_RE = re.compile(
    r"[+-]?(?:"
    r"(?:\d+\.\d*|\.\d+|\d+)[eE][+-]?\d+"  # double
    r"|\d*\.\d+"  # decimal
    r"|\d+"  # integer
    r")"
)
_LANGTAG_RE = re.compile(r"[a-zA-Z]+(?:-[a-zA-Z0-9]+)*")
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass
class _Token:
    kind: str
    value: object
    line: int
    column: int


class _Scanner:
    """Single-pass tokenizer with line/column tracking."""

    def __init__(self, text: str, syntax: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.syntax = syntax

    def error(self, message: str, line: int | None = None, column: int | None = None) -> ParseError:
        return ParseError(message, line if line is not None else self.line, column if column is not None else self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text):
                if self.text[self.pos] == "\n":
                    self.line += 1
                    self.col = 1
                else:
                    self.col += 1
                self.pos += 1

    def _skip_ws_and_comments(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def _match_re(self, pattern: re.Pattern[str]) -> str | None:
        m = pattern.match(self.text, self.pos)
        if m is None:
            return None
        value = m.group(0)
        self._advance(len(value))
        return value

    def next_token(self) -> _Token:
        self._skip_ws_and_comments()
        line, col = self.line, self.col
        if self.pos >= len(self.text):
            return _Token("EOF", None, line, col)
        ch = self.text[self.pos]

        if ch == "<":
            return _Token("IRIREF", self._scan_iriref(), line, col)
        if ch in "\"'":
            return _Token("STRING", self._scan_string(), line, col)
        if ch == "_":
            return _Token("BNODE", self._scan_bnode_label(), line, col)
        if ch == "@":
            self._advance()
            word = self._match_re(_LANGTAG_RE)
            if word is None:
                raise self.error("expected directive or language tag after '@'", line, col)
            return _Token("AT", word, line, col)
        if ch == "^":
            if self.text[self.pos : self.pos + 2] == "^^":
                self._advance(2)
                return _Token("^^", None, line, col)
            raise self.error("expected '^^'", line, col)
        if ch.isdigit() or (ch in "+-." and _NUMBER_RE.match(self.text, self.pos)):
            lexical = self._match_re(_NUMBER_RE)
            assert lexical is not None
            return _Token("NUMBER", lexical, line, col)
        if ch in ".;,[]()":
            self._advance()
            return _Token(ch, None, line, col)
        if ch in "{}":
            raise self.error("graph blocks are not supported", line, col)
        if ch == ":" or _PN_PREFIX_RE.match(self.text, self.pos):
            return self._scan_word(line, col)
        raise self.error(f"unexpected character {ch!r}", line, col)

    def _scan_word(self, line: int, col: int) -> _Token:
        prefix = ""
        if self.text[self.pos] != ":":
            matched = self._match_re(_PN_PREFIX_RE)
            assert matched is not None
            prefix = matched
        if self.pos < len(self.text) and self.text[self.pos] == ":":
            self._advance()
            local = self._match_re(_PN_LOCAL_RE) or ""
            return _Token("PNAME", (prefix, local), line, col)
        if prefix == "a":
            return _Token("A", None, line, col)
        if prefix in ("true", "false"):
            return _Token("BOOLEAN", prefix, line, col)
        raise self.error(f"unexpected token {prefix!r}", line, col)

    def _scan_iriref(self) -> str:
        start_line, start_col = self.line, self.col
        self._advance()  # <
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated IRI", start_line, start_col)
            ch = self.text[self.pos]
            if ch == ">":
                self._advance()
                return "".join(out)
            if ch == "\\":
                out.append(self._scan_uchar())
                continue
            if ch in ' "{}|^`' or ord(ch) <= 0x20:
                raise self.error(f"invalid character {ch!r} in IRI", self.line, self.col)
            out.append(ch)
            self._advance()

    def _scan_uchar(self) -> str:
        line, col = self.line, self.col
        self._advance()  # backslash
        if self.pos >= len(self.text):
            raise self.error("truncated escape", line, col)
        kind = self.text[self.pos]
        if kind not in "uU":
            raise self.error(f"invalid IRI escape '\\{kind}'", line, col)
        self._advance()
        width = 4 if kind == "u" else 8
        digits = self.text[self.pos : self.pos + width]
        if len(digits) < width or not all(c in "0123456789abcdefABCDEF" for c in digits):
            raise self.error("malformed unicode escape", line, col)
        self._advance(width)
        return chr(int(digits, 16))

    def _scan_string(self) -> str:
        start_line, start_col = self.line, self.col
        quote = self.text[self.pos]
        long_form = self.text[self.pos : self.pos + 3] == quote * 3
        if long_form and self.syntax != TURTLE:
            raise self.error("long strings are not allowed in this syntax", start_line, start_col)
        if quote == "'" and self.syntax != TURTLE:
            raise self.error("single-quoted strings are not allowed in this syntax", start_line, start_col)
        self._advance(3 if long_form else 1)
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string", start_line, start_col)
            ch = self.text[self.pos]
            if long_form:
                if self.text[self.pos : self.pos + 3] == quote * 3:
                    self._advance(3)
                    return "".join(out)
            elif ch == quote:
                self._advance()
                return "".join(out)
            elif ch == "\n":
                raise self.error("newline in string literal", start_line, start_col)
            if ch == "\\":
                nxt = self.text[self.pos + 1 : self.pos + 2]
                if nxt in _ECHAR:
                    out.append(_ECHAR[nxt])
                    self._advance(2)
                elif nxt in "uU":
                    out.append(self._scan_uchar())
                else:
                    raise self.error(f"invalid string escape '\\{nxt}'")
                continue
            out.append(ch)
            self._advance()

    def _scan_bnode_label(self) -> str:
        line, col = self.line, self.col
        if self.text[self.pos : self.pos + 2] != "_:":
            raise self.error("expected blank node label", line, col)
        self._advance(2)
        label = self._match_re(_BNODE_LABEL_RE)
        if label is None:
            raise self.error("malformed blank node label", line, col)
        return label


class _Parser:
    def __init__(self, text: str, base: str | None, syntax: str):
        self.scanner = _Scanner(text, syntax)
        self.base = base
        self.syntax = syntax
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.quads: list[Quad] = []
        self._bnode_counter = 0
        self._token: _Token = self.scanner.next_token()

    def _error(self, message: str, token: _Token | None = None) -> ParseError:
        tok = token or self._token
        return ParseError(message, tok.line, tok.column)

    def _next(self) -> _Token:
        token = self._token
        self._token = self.scanner.next_token()
        return token

    def _expect(self, kind: str) -> _Token:
        if self._token.kind != kind:
            raise self._error(f"expected {kind!r}, found {self._token.kind!r}")
        return self._next()

    def _fresh_bnode(self) -> BlankNode:
        node = BlankNode(f"a{self._bnode_counter}")
        self._bnode_counter += 1
        return node

    def parse(self) -> list[Triple]:
        while self._token.kind != "EOF":
            if self._token.kind == "AT" and self.syntax == TURTLE:
                self._directive()
            else:
                self._statement()
        return self.triples

    def _directive(self) -> None:
        token = self._next()
        word = token.value
        if word == "prefix":
            pname = self._expect("PNAME")
            prefix, local = pname.value  # type: ignore[misc]
            if local:
                raise self._error("malformed prefix declaration", pname)
            iriref = self._expect("IRIREF")
            self.prefixes[prefix] = resolve_iri(self.base, str(iriref.value))
            self._expect(".")
        elif word == "base":
            iriref = self._expect("IRIREF")
            self.base = resolve_iri(self.base, str(iriref.value))
            self._expect(".")
        else:
            raise self._error(f"unknown directive '@{word}'", token)

    def _statement(self) -> None:
        if self.syntax == TURTLE and self._token.kind == "[":
            subject = self._blank_node_property_list()
            if self._token.kind != ".":
                self._predicate_object_list(subject)
            self._expect(".")
            return
        subject = self._subject()
        if self.syntax == TURTLE:
            self._predicate_object_list(subject)
            self._expect(".")
        else:
            predicate = self._predicate()
            obj = self._object()
            if self.syntax == NQUADS and self._token.kind in ("IRIREF", "BNODE"):
                graph_token = self._next()
                if graph_token.kind == "BNODE":
                    raise self._error("blank-node graph labels are not supported", graph_token)
                graph = resolve_iri(self.base, str(graph_token.value))
                self.quads.append(Quad(graph, Triple(subject, predicate, obj)))
                self.triples.append(Triple(subject, predicate, obj))
                self._expect(".")
                return
            triple = Triple(subject, predicate, obj)
            self.triples.append(triple)
            if self.syntax == NQUADS:
                self.quads.append(Quad("", triple))
            self._expect(".")

    def _subject(self) -> IRI | BlankNode:
        token = self._token
        if token.kind == "IRIREF":
            self._next()
            return IRI(resolve_iri(self.base, str(token.value)))
        if token.kind == "PNAME":
            return self._pname()
        if token.kind == "BNODE":
            self._next()
            return BlankNode("u_" + str(token.value))
        if token.kind == "(":
            raise self._error("RDF collections are not supported")
        raise self._error(f"expected subject, found {token.kind!r}")

    def _predicate(self) -> IRI:
        token = self._token
        if token.kind == "A":
            if self.syntax != TURTLE:
                raise self._error("'a' keyword is not allowed in this syntax")
            self._next()
            return RDF_TYPE
        if token.kind == "IRIREF":
            self._next()
            return IRI(resolve_iri(self.base, str(token.value)))
        if token.kind == "PNAME":
            return self._pname()
        raise self._error(f"expected predicate, found {token.kind!r}")

    def _object(self) -> Term:
        token = self._token
        if token.kind == "IRIREF":
            self._next()
            return IRI(resolve_iri(self.base, str(token.value)))
        if token.kind == "PNAME":
            return self._pname()
        if token.kind == "BNODE":
            self._next()
            return BlankNode("u_" + str(token.value))
        if token.kind == "[":
            return self._blank_node_property_list()
        if token.kind == "(":
            raise self._error("RDF collections are not supported")
        if token.kind == "STRING":
            return self._rdf_literal()
        if token.kind == "NUMBER":
            if self.syntax != TURTLE:
                raise self._error("numeric shorthand is not allowed in this syntax")
            self._next()
            return _number_literal(str(token.value))
        if token.kind == "BOOLEAN":
            if self.syntax != TURTLE:
                raise self._error("boolean shorthand is not allowed in this syntax")
            self._next()
            return Literal(str(token.value), XSD_BOOLEAN)
        raise self._error(f"expected object, found {token.kind!r}")

    def _rdf_literal(self) -> Literal:
        token = self._next()
        lexical = str(token.value)
        if self._token.kind == "AT":
            lang = str(self._next().value)
            return Literal(lexical, RDF_LANG_STRING, lang)
        if self._token.kind == "^^":
            self._next()
            dt_token = self._token
            if dt_token.kind == "IRIREF":
                self._next()
                datatype = IRI(resolve_iri(self.base, str(dt_token.value)))
            elif dt_token.kind == "PNAME" and self.syntax == TURTLE:
                datatype = self._pname()
            else:
                raise self._error("expected datatype IRI after '^^'")
            if datatype == RDF_LANG_STRING:
                raise self._error("rdf:langString requires a language tag, not '^^'", token)
            return Literal(lexical, datatype)
        return Literal(lexical, XSD_STRING)

    def _pname(self) -> IRI:
        token = self._next()
        if self.syntax != TURTLE:
            raise self._error("prefixed names are not allowed in this syntax", token)
        prefix, local = token.value  # type: ignore[misc]
        if prefix not in self.prefixes:
            raise self._error(f"undeclared prefix '{prefix}:'", token)
        return IRI(self.prefixes[prefix] + local)

    def _blank_node_property_list(self) -> BlankNode:
        if self.syntax != TURTLE:
            raise self._error("blank node property lists are not allowed in this syntax")
        self._expect("[")
        node = self._fresh_bnode()
        if self._token.kind != "]":
            self._predicate_object_list(node)
        self._expect("]")
        return node

    def _predicate_object_list(self, subject: IRI | BlankNode) -> None:
        while True:
            predicate = self._predicate()
            self._object_list(subject, predicate)
            if self._token.kind != ";":
                return
            while self._token.kind == ";":
                self._next()
            if self._token.kind in (".", "]"):
                return

    def _object_list(self, subject: IRI | BlankNode, predicate: IRI) -> None:
        while True:
            obj = self._object()
            self.triples.append(Triple(subject, predicate, obj))
            if self._token.kind != ",":
                return
            self._next()


def _number_literal(lexical: str) -> Literal:
    if re.search(r"[eE]", lexical):
        return Literal(lexical, XSD_DOUBLE)
    if "." in lexical:
        return Literal(lexical, XSD_DECIMAL)
    return Literal(lexical, XSD_INTEGER)


def parse_document(text: str, base: str | None = None, syntax: str = TURTLE) -> list[Triple]:
    """Parse a complete Turtle or N-Triples document into a list of triples.

    Prefixes and ``@base`` are expanded; predicate-object lists and blank-node
    property lists are flattened. Blank-node labels in the result are unique
    within the document (labelled nodes keep a ``u_`` prefix, anonymous nodes
    are numbered), so co-reference survives later re-labeling.
    """
    if syntax not in (TURTLE, NTRIPLES):
        raise ValidationError(f"unknown syntax {syntax!r}")
    from .. import opslog

    opslog.note("rdf.parse_document")
    return _Parser(text, base, syntax).parse()


def parse_nquads(text: str) -> list[Quad]:
    """Parse an N-Quads document (internal persistence format)."""
    parser = _Parser(text, None, NQUADS)
    parser.parse()
    return parser.quads


def validate_graph_name(name: str) -> str:
    if not is_absolute_iri(name):
        raise ValidationError(f"graph name must be an absolute IRI, got {name!r}")
    return name
