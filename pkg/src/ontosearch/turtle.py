"""Turtle subset parser and deterministic serializer.

This is the on-disk format for the ontology and for knowledge-base
snapshots (.ttl, UTF-8). Supported syntax: @prefix/@base, <IRI>s,
prefixed names, 'a', ';' predicate lists, ',' object lists, quoted
literals with language tags and datatypes, _:labels, [ ... ] property
lists, ( ... ) collections, and # comments. Numeric/boolean shorthand
literals are deliberately out: every literal is quoted.

The serializer never emits '[ ]' or '( )' sugar; it writes explicit
blank-node labels and list triples, one statement per line, sorted, so
equal graphs always produce identical bytes.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional
from urllib.parse import urljoin

from .rdf import (
    RDF_LANGSTRING,
    XSD_STRING,
    BlankNode,
    Graph,
    GraphBuilder,
    Iri,
    Literal,
    RdfError,
    Term,
    Triple,
    RDF,
)


class ParseError(Exception):
    """Syntax error with a 1-based line/column position."""

    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class PrefixMap:
    """Ordered prefix-label → namespace bindings plus an optional base IRI.

    Re-declaring a label overwrites the earlier binding (last wins).
    """

    def __init__(
        self,
        bindings: Optional[dict[str, str]] = None,
        base: Optional[str] = None,
    ) -> None:
        self._bindings: dict[str, str] = {}
        self.base = base
        if bindings:
            for label, ns in bindings.items():
                self.declare(label, ns)

    def declare(self, label: str, namespace: str) -> None:
        # Last wins: move the label to the end so iteration order follows
        # declaration order of the surviving binding.
        self._bindings.pop(label, None)
        self._bindings[label] = namespace

    def lookup(self, label: str) -> Optional[str]:
        return self._bindings.get(label)

    def items(self) -> list[tuple[str, str]]:
        return list(self._bindings.items())

    def as_dict(self) -> dict[str, str]:
        return dict(self._bindings)

    def __contains__(self, label: str) -> bool:
        return label in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def compress(self, iri: str) -> Optional[str]:
        """Prefixed-name form of an IRI, or None if no binding applies."""
        best: Optional[tuple[int, str, str]] = None
        for label, ns in sorted(self._bindings.items()):
            if iri.startswith(ns):
                local = iri[len(ns):]
                if _PN_LOCAL_SAFE.match(local):
                    if best is None or len(ns) > best[0]:
                        best = (len(ns), label, local)
        if best is None:
            return None
        return f"{best[1]}:{best[2]}"


# Conservative local-name charset: everything it accepts is unambiguous to
# re-parse, anything else falls back to an <IRI>.
_PN_LOCAL_SAFE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
_ABSOLUTE_IRI = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")

_NAME_START = re.compile(r"[A-Za-z_À-￿]")
_NAME_CHAR = re.compile(r"[A-Za-z0-9_\-À-￿]")

_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}
_ESCAPE_OUT = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


class _Scanner:
    """Character cursor with 1-based line/column tracking."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def error(self, message: str) -> ParseError:
        return ParseError(self.line, self.col, message)

    def skip_ws_and_comments(self) -> None:
        while not self.at_end():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#":
                while not self.at_end() and self.peek() != "\n":
                    self.advance()
            else:
                return


def read_quoted_string(sc: _Scanner) -> str:
    """Consume a quoted literal body (cursor on the opening quote)."""
    quote = sc.advance()
    out: list[str] = []
    while True:
        if sc.at_end():
            raise sc.error("unterminated string literal")
        ch = sc.peek()
        if ch == "\n":
            raise sc.error("unterminated string literal")
        sc.advance()
        if ch == quote:
            return "".join(out)
        if ch != "\\":
            out.append(ch)
            continue
        if sc.at_end():
            raise sc.error("unterminated escape sequence")
        esc = sc.advance()
        if esc in _ESCAPES:
            out.append(_ESCAPES[esc])
        elif esc == "u" or esc == "U":
            width = 4 if esc == "u" else 8
            digits = ""
            for _ in range(width):
                if sc.at_end() or sc.peek() not in "0123456789abcdefABCDEF":
                    raise sc.error(f"\\{esc} escape needs {width} hex digits")
                digits += sc.advance()
            code = int(digits, 16)
            if code > 0x10FFFF:
                raise sc.error(f"\\U escape out of range: {digits}")
            out.append(chr(code))
        else:
            raise sc.error(f"unknown escape sequence \\{esc}")


def escape_literal(text: str) -> str:
    out: list[str] = []
    for ch in text:
        if ch in _ESCAPE_OUT:
            out.append(_ESCAPE_OUT[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


class _BlankNodeNamer:
    """Fresh labels for anonymous nodes that never collide with parsed ones."""

    def __init__(self, text: str) -> None:
        # Over-approximate the used labels (matches inside strings/comments
        # are counted too, which only costs skipped labels).
        self._used = set(re.findall(r"_:([A-Za-z_][A-Za-z0-9_.\-]*)", text))
        self._counter = 0

    def fresh(self) -> BlankNode:
        while True:
            label = f"b{self._counter}"
            self._counter += 1
            if label not in self._used:
                self._used.add(label)
                return BlankNode(label)


class _TurtleParser:
    def __init__(self, text: str) -> None:
        self.sc = _Scanner(text)
        self.prefixes = PrefixMap()
        self.builder = GraphBuilder()
        self.namer = _BlankNodeNamer(text)

    def parse(self) -> tuple[Graph, PrefixMap]:
        while True:
            self.sc.skip_ws_and_comments()
            if self.sc.at_end():
                break
            if self.sc.peek() == "@":
                self._directive()
            else:
                self._triples()
                self._expect(".")
        return self.builder.freeze(), self.prefixes

    # -- low-level helpers ------------------------------------------------

    def _expect(self, ch: str) -> None:
        self.sc.skip_ws_and_comments()
        if self.sc.at_end() or self.sc.peek() != ch:
            found = "end of input" if self.sc.at_end() else repr(self.sc.peek())
            raise self.sc.error(f"expected {ch!r}, found {found}")
        self.sc.advance()

    def _peek_after_ws(self) -> str:
        self.sc.skip_ws_and_comments()
        return self.sc.peek()

    def _read_iriref(self) -> Iri:
        line, col = self.sc.line, self.sc.col
        self.sc.advance()  # <
        out: list[str] = []
        while True:
            if self.sc.at_end():
                raise ParseError(line, col, "unterminated IRI")
            ch = self.sc.advance()
            if ch == ">":
                break
            if ch in " \t\r\n<":
                raise ParseError(line, col, f"bad IRI: illegal character {ch!r}")
            out.append(ch)
        raw = "".join(out)
        if not _ABSOLUTE_IRI.match(raw):
            if self.prefixes.base is None:
                raise ParseError(line, col, f"relative IRI without @base: <{raw}>")
            raw = urljoin(self.prefixes.base, raw)
        try:
            return Iri(raw)
        except RdfError as e:
            raise ParseError(line, col, f"bad IRI: {e}") from e

    def _read_name(self) -> str:
        out = [self.sc.advance()]
        while not self.sc.at_end():
            ch = self.sc.peek()
            if _NAME_CHAR.match(ch):
                out.append(self.sc.advance())
            elif ch == "." and _NAME_CHAR.match(self.sc.peek(1) or " "):
                # Dots are legal inside a name but never terminal, so a
                # trailing '.' stays with the statement.
                out.append(self.sc.advance())
            else:
                break
        return "".join(out)

    def _read_pname_or_keyword(self) -> tuple[str, Optional[tuple[str, Optional[str]]]]:
        """Returns ('keyword', None) for bare 'a', else ('pname', (prefix, local))."""
        line, col = self.sc.line, self.sc.col
        prefix = ""
        if self.sc.peek() != ":":
            prefix = self._read_name()
        if self.sc.peek() != ":":
            if prefix == "a":
                return "keyword", None
            raise ParseError(line, col, f"unexpected token {prefix!r}")
        self.sc.advance()  # :
        local: Optional[str] = None
        if not self.sc.at_end() and _NAME_CHAR.match(self.sc.peek()):
            local = self._read_name()
        return "pname", (prefix, local)

    def _resolve_pname(self, prefix: str, local: Optional[str], line: int, col: int) -> Iri:
        ns = self.prefixes.lookup(prefix)
        if ns is None:
            raise ParseError(line, col, f"undeclared prefix {prefix + ':'!r}")
        try:
            return Iri(ns + (local or ""))
        except RdfError as e:
            raise ParseError(line, col, f"bad IRI: {e}") from e

    # -- grammar ----------------------------------------------------------

    def _directive(self) -> None:
        line, col = self.sc.line, self.sc.col
        self.sc.advance()  # @
        word = self._read_name()
        if word == "prefix":
            self.sc.skip_ws_and_comments()
            prefix = ""
            if self.sc.peek() != ":":
                if not _NAME_START.match(self.sc.peek() or " "):
                    raise self.sc.error("expected prefix label")
                prefix = self._read_name()
            if self.sc.peek() != ":":
                raise self.sc.error("expected ':' in @prefix directive")
            self.sc.advance()
            self.sc.skip_ws_and_comments()
            if self.sc.peek() != "<":
                raise self.sc.error("expected <IRI> in @prefix directive")
            iri = self._read_iriref()
            self.prefixes.declare(prefix, iri.value)
            self._expect(".")
        elif word == "base":
            self.sc.skip_ws_and_comments()
            if self.sc.peek() != "<":
                raise self.sc.error("expected <IRI> in @base directive")
            iri = self._read_iriref()
            self.prefixes.base = iri.value
            self._expect(".")
        else:
            raise ParseError(line, col, f"unknown directive @{word}")

    def _triples(self) -> None:
        self.sc.skip_ws_and_comments()
        bracket_subject = self.sc.peek() == "["
        subject = self._node(allow_literal=False)
        if not isinstance(subject, (Iri, BlankNode)):
            raise self.sc.error("subject must be an IRI or blank node")
        # A '[ ... ]' property list may stand alone as a statement.
        if bracket_subject and self._peek_after_ws() == ".":
            return
        self._predicate_object_list(subject)

    def _predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self._verb()
            while True:
                obj = self._node(allow_literal=True)
                self._add(subject, predicate, obj)
                if self._peek_after_ws() == ",":
                    self.sc.advance()
                    continue
                break
            if self._peek_after_ws() == ";":
                self.sc.advance()
                # Turtle permits a dangling ';' before '.' or ']'.
                if self._peek_after_ws() in (".", "]", ";"):
                    while self._peek_after_ws() == ";":
                        self.sc.advance()
                    return
                continue
            return

    def _verb(self) -> Iri:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        if self.sc.at_end():
            raise self.sc.error("expected predicate, found end of input")
        ch = self.sc.peek()
        if ch == "<":
            return self._read_iriref()
        if _NAME_START.match(ch) or ch == ":":
            kind, pname = self._read_pname_or_keyword()
            if kind == "keyword":
                return RDF.type
            prefix, local = pname  # type: ignore[misc]
            return self._resolve_pname(prefix, local, line, col)
        raise ParseError(line, col, f"expected predicate, found {ch!r}")

    def _node(self, allow_literal: bool) -> Term:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        if self.sc.at_end():
            raise self.sc.error("expected term, found end of input")
        ch = self.sc.peek()
        if ch == "<":
            return self._read_iriref()
        if ch in "\"'":
            if not allow_literal:
                raise ParseError(line, col, "literal not allowed here")
            return self._literal()
        if ch == "_" and self.sc.peek(1) == ":":
            self.sc.advance()
            self.sc.advance()
            if self.sc.at_end() or not (_NAME_CHAR.match(self.sc.peek())):
                raise self.sc.error("expected blank node label")
            return BlankNode(self._read_name())
        if ch == "[":
            self.sc.advance()
            node = self.namer.fresh()
            if self._peek_after_ws() == "]":
                self.sc.advance()
                return node
            self._predicate_object_list(node)
            self._expect("]")
            return node
        if ch == "(":
            self.sc.advance()
            return self._collection()
        if _NAME_START.match(ch) or ch == ":":
            kind, pname = self._read_pname_or_keyword()
            if kind == "keyword":
                raise ParseError(line, col, "'a' is only valid as a predicate")
            prefix, local = pname  # type: ignore[misc]
            return self._resolve_pname(prefix, local, line, col)
        raise ParseError(line, col, f"unexpected token {ch!r}")

    def _collection(self) -> Term:
        items: list[Term] = []
        while True:
            if self._peek_after_ws() == ")":
                self.sc.advance()
                break
            if self.sc.at_end():
                raise self.sc.error("unterminated collection")
            items.append(self._node(allow_literal=True))
        if not items:
            return RDF.nil
        cells = [self.namer.fresh() for _ in items]
        for i, (cell, item) in enumerate(zip(cells, items)):
            self._add(cell, RDF.first, item)
            rest: Term = cells[i + 1] if i + 1 < len(cells) else RDF.nil
            self._add(cell, RDF.rest, rest)
        return cells[0]

    def _literal(self) -> Literal:
        line, col = self.sc.line, self.sc.col
        text = read_quoted_string(self.sc)
        ch = self.sc.peek()
        if ch == "@":
            self.sc.advance()
            tag = ""
            while not self.sc.at_end() and (self.sc.peek().isalnum() or self.sc.peek() == "-"):
                tag += self.sc.advance()
            if not tag:
                raise self.sc.error("empty language tag")
            return Literal(text, RDF_LANGSTRING, tag.lower())
        if ch == "^" and self.sc.peek(1) == "^":
            self.sc.advance()
            self.sc.advance()
            self.sc.skip_ws_and_comments()
            dline, dcol = self.sc.line, self.sc.col
            if self.sc.peek() == "<":
                dtype = self._read_iriref()
            elif _NAME_START.match(self.sc.peek() or " ") or self.sc.peek() == ":":
                kind, pname = self._read_pname_or_keyword()
                if kind == "keyword":
                    raise ParseError(dline, dcol, "expected datatype IRI")
                prefix, local = pname  # type: ignore[misc]
                dtype = self._resolve_pname(prefix, local, dline, dcol)
            else:
                raise self.sc.error("expected datatype IRI after ^^")
            try:
                return Literal(text, dtype)
            except RdfError as e:
                raise ParseError(line, col, str(e)) from e
        return Literal(text)

    def _add(self, s: Term, p: Term, o: Term) -> None:
        try:
            self.builder.insert(Triple(s, p, o))
        except RdfError as e:
            raise self.sc.error(str(e)) from e


def parse(text: str) -> tuple[Graph, PrefixMap]:
    """Parse a Turtle document; raises ParseError with line/column on bad input."""
    return _TurtleParser(text).parse()


def parse_file(path) -> tuple[Graph, PrefixMap]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def _render_term(t: Term, prefixes: PrefixMap) -> str:
    if isinstance(t, Iri):
        compressed = prefixes.compress(t.value)
        if compressed is not None:
            return compressed
        if ">" in t.value:
            raise RdfError(f"IRI not serializable in angle brackets: {t.value!r}")
        return f"<{t.value}>"
    if isinstance(t, BlankNode):
        if not _PN_LOCAL_SAFE.match(t.label):
            raise RdfError(f"blank node label not serializable: {t.label!r}")
        return f"_:{t.label}"
    body = f'"{escape_literal(t.lexical)}"'
    if t.language is not None:
        return f"{body}@{t.language}"
    if t.datatype == XSD_STRING:
        return body
    return f"{body}^^{_render_term(t.datatype, prefixes)}"


def serialize(g: Graph, prefixes: Optional[PrefixMap] = None) -> str:
    """Deterministic Turtle text for a graph: one sorted statement per line.

    Equal graphs serialize to identical bytes; the output re-parses to a
    graph equal to the input (blank-node labels are written explicitly, so
    the round trip preserves them).
    """
    prefixes = prefixes if prefixes is not None else PrefixMap()
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in sorted(prefixes.items())]
    rendered = sorted(
        (
            _render_term(t.subject, prefixes),
            _render_term(t.predicate, prefixes),
            _render_term(t.object, prefixes),
        )
        for t in g
    )
    if lines and rendered:
        lines.append("")
    lines.extend(f"{s} {p} {o} ." for s, p, o in rendered)
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_to_file(g: Graph, path, prefixes: Optional[PrefixMap] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(g, prefixes))
