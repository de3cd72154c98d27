"""SPARQL-subset parser and evaluator for querying the knowledge base.

Supported: PREFIX declarations, SELECT [DISTINCT] with a variable list or
*, WHERE blocks of triple patterns ('.'-separated, ';' predicate lists,
'a' for rdf:type) with interleaved FILTER(...) constraints, ORDER BY
ASC/DESC on one variable, and LIMIT. Filters know =, !=, CONTAINS, REGEX
(flag "i" only), LCASE, and STR. Blank nodes in queries are not
supported; use variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .rdf import (
    RDF,
    RDF_LANGSTRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    RdfError,
    Term,
    Triple,
    term_sort_key,
)
from .turtle import ParseError, PrefixMap, _Scanner, read_quoted_string

__all__ = [
    "Variable",
    "TriplePattern",
    "Query",
    "SolutionTable",
    "parse_query",
    "execute",
]


@dataclass(frozen=True, slots=True)
class Variable:
    name: str


Slot = Union[Term, Variable]


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: Slot
    predicate: Slot
    object: Slot

    def __post_init__(self) -> None:
        if isinstance(self.predicate, (Literal, BlankNode)):
            raise RdfError("pattern predicate must be an IRI or a variable")

    def variables(self) -> set[str]:
        return {
            s.name
            for s in (self.subject, self.predicate, self.object)
            if isinstance(s, Variable)
        }


# --- filter expression tree -------------------------------------------------


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Const:
    value: Literal


@dataclass(frozen=True)
class Lcase:
    arg: "ValueExpr"


@dataclass(frozen=True)
class StrOf:
    arg: "ValueExpr"


ValueExpr = Union[VarRef, Const, Lcase, StrOf]


@dataclass(frozen=True)
class Comparison:
    op: str  # '=' or '!='
    left: ValueExpr
    right: ValueExpr


@dataclass(frozen=True)
class ContainsCall:
    text: ValueExpr
    needle: ValueExpr


@dataclass(frozen=True)
class RegexCall:
    text: ValueExpr
    pattern: ValueExpr
    flags: Optional[ValueExpr] = None


FilterExpr = Union[Comparison, ContainsCall, RegexCall]


@dataclass
class Query:
    prefixes: PrefixMap
    projection: Optional[list[str]]  # None means SELECT *
    distinct: bool
    patterns: list[TriplePattern]
    filters: list[FilterExpr] = field(default_factory=list)
    order_by: Optional[tuple[str, bool]] = None  # (variable, ascending)
    limit: Optional[int] = None

    def pattern_variables(self) -> set[str]:
        out: set[str] = set()
        for p in self.patterns:
            out |= p.variables()
        return out


@dataclass
class SolutionTable:
    """Query result: ordered variable names and one term tuple per row."""

    header: list[str]
    rows: list[tuple[Term, ...]]

    def __len__(self) -> int:
        return len(self.rows)

    def as_dicts(self) -> list[dict[str, Term]]:
        return [dict(zip(self.header, row)) for row in self.rows]


_FUNCTIONS = {"CONTAINS", "REGEX", "LCASE", "STR"}
_KEYWORDS = {
    "SELECT", "DISTINCT", "WHERE", "FILTER", "PREFIX",
    "ORDER", "BY", "ASC", "DESC", "LIMIT",
}
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _QueryParser:
    def __init__(self, text: str) -> None:
        self.sc = _Scanner(text)
        self.prefixes = PrefixMap()
        self.var_uses: list[tuple[str, int, int]] = []

    # -- lexical helpers ----------------------------------------------------

    def _peek_word(self) -> str:
        self.sc.skip_ws_and_comments()
        m = _WORD.match(self.sc.text, self.sc.pos)
        if m is None:
            return ""
        # A following ':' makes it a prefixed name, not a keyword.
        end = m.end()
        if end < len(self.sc.text) and self.sc.text[end] == ":":
            return ""
        return m.group(0)

    def _take_word(self) -> str:
        word = self._peek_word()
        for _ in word:
            self.sc.advance()
        return word

    def _expect_keyword(self, *words: str) -> str:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        got = self._take_word()
        if got.upper() not in words:
            raise ParseError(line, col, f"expected {' or '.join(words)}, found {got or self.sc.peek()!r}")
        return got.upper()

    def _expect_char(self, ch: str) -> None:
        self.sc.skip_ws_and_comments()
        if self.sc.peek() != ch:
            found = "end of input" if self.sc.at_end() else repr(self.sc.peek())
            raise self.sc.error(f"expected {ch!r}, found {found}")
        self.sc.advance()

    def _peek_char(self) -> str:
        self.sc.skip_ws_and_comments()
        return self.sc.peek()

    def _read_variable(self) -> Variable:
        line, col = self.sc.line, self.sc.col
        self.sc.advance()  # ?
        m = _WORD.match(self.sc.text, self.sc.pos)
        if m is None:
            raise ParseError(line, col, "expected variable name after '?'")
        name = m.group(0)
        for _ in name:
            self.sc.advance()
        self.var_uses.append((name, line, col))
        return Variable(name)

    def _read_iri(self) -> Iri:
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
        try:
            return Iri("".join(out))
        except RdfError as e:
            raise ParseError(line, col, f"bad IRI: {e}") from e

    def _read_pname(self) -> Iri:
        line, col = self.sc.line, self.sc.col
        prefix = ""
        m = _WORD.match(self.sc.text, self.sc.pos)
        if m is not None:
            prefix = m.group(0)
            for _ in prefix:
                self.sc.advance()
        if self.sc.peek() != ":":
            raise ParseError(line, col, f"unexpected token {prefix!r}")
        self.sc.advance()
        local = ""
        while not self.sc.at_end() and (
            self.sc.peek().isalnum() or self.sc.peek() in "_-"
        ):
            local += self.sc.advance()
        ns = self.prefixes.lookup(prefix)
        if ns is None:
            raise ParseError(line, col, f"undeclared prefix {prefix + ':'!r}")
        try:
            return Iri(ns + local)
        except RdfError as e:
            raise ParseError(line, col, f"bad IRI: {e}") from e

    def _read_literal(self) -> Literal:
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
            if self.sc.peek() == "<":
                dtype = self._read_iri()
            else:
                dtype = self._read_pname()
            try:
                return Literal(text, dtype)
            except RdfError as e:
                raise ParseError(line, col, str(e)) from e
        return Literal(text)

    # -- grammar --------------------------------------------------------

    def parse(self) -> Query:
        while self._peek_word().upper() == "PREFIX":
            self._take_word()
            self.sc.skip_ws_and_comments()
            label = ""
            m = _WORD.match(self.sc.text, self.sc.pos)
            if m is not None:
                label = m.group(0)
                for _ in label:
                    self.sc.advance()
            self._expect_char(":")
            self.sc.skip_ws_and_comments()
            if self.sc.peek() != "<":
                raise self.sc.error("expected <IRI> in PREFIX declaration")
            self.prefixes.declare(label, self._read_iri().value)

        self._expect_keyword("SELECT")
        distinct = False
        if self._peek_word().upper() == "DISTINCT":
            self._take_word()
            distinct = True

        projection: Optional[list[str]] = None
        proj_uses: list[tuple[str, int, int]] = []
        if self._peek_char() == "*":
            self.sc.advance()
        else:
            projection = []
            while self._peek_char() == "?":
                before = len(self.var_uses)
                var = self._read_variable()
                proj_uses.extend(self.var_uses[before:])
                if var.name in projection:
                    raise ParseError(
                        proj_uses[-1][1], proj_uses[-1][2],
                        f"duplicate projection variable ?{var.name}",
                    )
                projection.append(var.name)
            if not projection:
                raise self.sc.error("expected '*' or at least one ?variable after SELECT")

        self._expect_keyword("WHERE")
        self._expect_char("{")
        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        filter_uses: list[tuple[str, int, int]] = []
        while True:
            ch = self._peek_char()
            if ch == "}":
                self.sc.advance()
                break
            if ch == "":
                raise self.sc.error("unterminated WHERE block")
            if self._peek_word().upper() == "FILTER":
                self._take_word()
                before = len(self.var_uses)
                filters.append(self._filter_expr())
                filter_uses.extend(self.var_uses[before:])
            else:
                patterns.extend(self._triple_block())
            if self._peek_char() == ".":
                self.sc.advance()

        order_by: Optional[tuple[str, bool]] = None
        order_use: Optional[tuple[str, int, int]] = None
        if self._peek_word().upper() == "ORDER":
            self._take_word()
            self._expect_keyword("BY")
            ascending = True
            word = self._peek_word().upper()
            if word in ("ASC", "DESC"):
                self._take_word()
                ascending = word == "ASC"
                self._expect_char("(")
                before = len(self.var_uses)
                var = self._read_variable()
                order_use = self.var_uses[before]
                self._expect_char(")")
            elif self._peek_char() == "?":
                before = len(self.var_uses)
                var = self._read_variable()
                order_use = self.var_uses[before]
            else:
                raise self.sc.error("expected ASC(?v), DESC(?v) or ?v after ORDER BY")
            order_by = (var.name, ascending)

        limit: Optional[int] = None
        if self._peek_word().upper() == "LIMIT":
            self._take_word()
            self.sc.skip_ws_and_comments()
            line, col = self.sc.line, self.sc.col
            digits = ""
            while not self.sc.at_end() and self.sc.peek().isdigit():
                digits += self.sc.advance()
            if not digits:
                raise ParseError(line, col, "expected a non-negative integer after LIMIT")
            limit = int(digits)

        self.sc.skip_ws_and_comments()
        if not self.sc.at_end():
            raise self.sc.error(f"unexpected trailing input {self.sc.peek()!r}")

        query = Query(
            prefixes=self.prefixes,
            projection=projection,
            distinct=distinct,
            patterns=patterns,
            filters=filters,
            order_by=order_by,
            limit=limit,
        )

        bound = query.pattern_variables()
        for name, line, col in proj_uses:
            if name not in bound:
                raise ParseError(line, col, f"projected variable ?{name} is not bound by any pattern")
        for name, line, col in filter_uses:
            if name not in bound:
                raise ParseError(line, col, f"filtered variable ?{name} is not bound by any pattern")
        if order_use is not None and order_use[0] not in bound:
            raise ParseError(order_use[1], order_use[2], f"ordering variable ?{order_use[0]} is not bound by any pattern")
        return query

    def _triple_block(self) -> list[TriplePattern]:
        subject = self._slot(position="subject")
        out: list[TriplePattern] = []
        while True:
            predicate = self._verb()
            obj = self._slot(position="object")
            try:
                out.append(TriplePattern(subject, predicate, obj))
            except RdfError as e:
                raise self.sc.error(str(e)) from e
            if self._peek_char() == ";":
                self.sc.advance()
                if self._peek_char() in (".", "}"):
                    return out
                continue
            return out

    def _verb(self) -> Slot:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        ch = self.sc.peek()
        if ch == "?":
            return self._read_variable()
        if ch == "<":
            return self._read_iri()
        word = self._peek_word()
        if word == "a":
            self._take_word()
            return RDF.type
        if ch == "" or ch in ".;}":
            raise ParseError(line, col, "expected a predicate")
        if word and word.upper() in _KEYWORDS:
            raise ParseError(line, col, f"expected a predicate, found keyword {word}")
        return self._read_pname()

    def _slot(self, position: str) -> Slot:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        ch = self.sc.peek()
        if ch == "?":
            return self._read_variable()
        if ch == "<":
            return self._read_iri()
        if ch in "\"'":
            if position == "subject":
                raise ParseError(line, col, "literal not allowed as subject")
            return self._read_literal()
        if ch == "_" and self.sc.peek(1) == ":":
            raise ParseError(line, col, "blank nodes are not supported in queries; use a variable")
        if ch == "[":
            raise ParseError(line, col, "blank nodes are not supported in queries; use a variable")
        if ch == "" or ch in ".;}":
            raise ParseError(line, col, f"expected a {position} term")
        word = self._peek_word()
        if word and word.upper() in _KEYWORDS:
            raise ParseError(line, col, f"expected a {position} term, found keyword {word}")
        return self._read_pname()

    # -- filter grammar ---------------------------------------------------

    def _filter_expr(self) -> FilterExpr:
        self._expect_char("(")
        expr = self._bool_expr()
        self._expect_char(")")
        return expr

    def _bool_expr(self) -> FilterExpr:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        word = self._peek_word()
        if word.upper() in ("CONTAINS", "REGEX"):
            name = self._take_word().upper()
            self._expect_char("(")
            first = self._value_expr()
            self._expect_char(",")
            second = self._value_expr()
            if name == "CONTAINS":
                self._expect_char(")")
                return ContainsCall(first, second)
            flags: Optional[ValueExpr] = None
            if self._peek_char() == ",":
                self.sc.advance()
                flags = self._value_expr()
            self._expect_char(")")
            return RegexCall(first, second, flags)
        if word and word.upper() not in _FUNCTIONS:
            raise ParseError(line, col, f"unknown function {word}")
        left = self._value_expr()
        self.sc.skip_ws_and_comments()
        if self.sc.peek() == "=":
            self.sc.advance()
            op = "="
        elif self.sc.peek() == "!" and self.sc.peek(1) == "=":
            self.sc.advance()
            self.sc.advance()
            op = "!="
        else:
            raise self.sc.error("expected '=' or '!=' in filter expression")
        right = self._value_expr()
        return Comparison(op, left, right)

    def _value_expr(self) -> ValueExpr:
        self.sc.skip_ws_and_comments()
        line, col = self.sc.line, self.sc.col
        ch = self.sc.peek()
        if ch == "?":
            return VarRef(self._read_variable().name)
        if ch in "\"'":
            return Const(self._read_literal())
        word = self._peek_word()
        if word:
            name = word.upper()
            if name in ("LCASE", "STR"):
                self._take_word()
                self._expect_char("(")
                arg = self._value_expr()
                self._expect_char(")")
                return Lcase(arg) if name == "LCASE" else StrOf(arg)
            raise ParseError(line, col, f"unknown function {word}")
        raise ParseError(line, col, f"expected a value expression, found {ch!r}")


def parse_query(text: str) -> Query:
    """Parse a query; raises ParseError with line/column on bad input."""
    return _QueryParser(text).parse()


# --- evaluation --------------------------------------------------------


class _FilterError(Exception):
    """Filter evaluation fault; the offending row is dropped."""


def _as_string(value: Union[Term, str]) -> str:
    """STR() semantics: IRI text or literal lexical form."""
    if isinstance(value, str):
        return value
    if isinstance(value, Iri):
        return value.value
    if isinstance(value, Literal):
        return value.lexical
    raise _FilterError("blank node has no string form")


def _as_text(value: Union[Term, str]) -> str:
    """String coercion for text functions: literals and plain strings only."""
    if isinstance(value, str):
        return value
    if isinstance(value, Literal):
        return value.lexical
    raise _FilterError(f"not a text value: {value!r}")


def _eval_value(expr: ValueExpr, row: dict[str, Term]) -> Union[Term, str]:
    if isinstance(expr, VarRef):
        return row[expr.name]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Lcase):
        return _as_text(_eval_value(expr.arg, row)).lower()
    if isinstance(expr, StrOf):
        return _as_string(_eval_value(expr.arg, row))
    raise _FilterError(f"unknown value expression {expr!r}")


def _eval_filter(expr: FilterExpr, row: dict[str, Term]) -> bool:
    if isinstance(expr, Comparison):
        left = _eval_value(expr.left, row)
        right = _eval_value(expr.right, row)
        if isinstance(left, str) or isinstance(right, str):
            equal = _as_string(left) == _as_string(right)
        else:
            equal = left == right
        return equal if expr.op == "=" else not equal
    if isinstance(expr, ContainsCall):
        return _as_text(_eval_value(expr.needle, row)) in _as_text(
            _eval_value(expr.text, row)
        )
    if isinstance(expr, RegexCall):
        text = _as_text(_eval_value(expr.text, row))
        pattern = _as_text(_eval_value(expr.pattern, row))
        flags = ""
        if expr.flags is not None:
            flags = _as_text(_eval_value(expr.flags, row))
        if flags not in ("", "i"):
            raise _FilterError(f"unsupported regex flags {flags!r}")
        try:
            return re.search(pattern, text, re.IGNORECASE if flags == "i" else 0) is not None
        except re.error as e:
            raise _FilterError(f"bad regex: {e}") from e
    raise _FilterError(f"unknown filter expression {expr!r}")


def _slot_query(slot: Slot, binding: dict[str, Term]) -> Optional[Term]:
    if isinstance(slot, Variable):
        return binding.get(slot.name)
    return slot


def _bound_slots(p: TriplePattern, binding: dict[str, Term]) -> int:
    return sum(
        1
        for slot in (p.subject, p.predicate, p.object)
        if not isinstance(slot, Variable) or slot.name in binding
    )


def _extend(p: TriplePattern, t: Triple, binding: dict[str, Term]) -> Optional[dict[str, Term]]:
    out = binding
    for slot, value in (
        (p.subject, t.subject),
        (p.predicate, t.predicate),
        (p.object, t.object),
    ):
        if isinstance(slot, Variable):
            bound = out.get(slot.name)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[slot.name] = value
            elif bound != value:
                return None
        elif slot != value:
            return None
    return out


def _solutions(
    g: Graph, patterns: list[TriplePattern], binding: dict[str, Term]
) -> Iterable[dict[str, Term]]:
    if not patterns:
        yield binding
        return
    idx = max(range(len(patterns)), key=lambda i: _bound_slots(patterns[i], binding))
    pattern = patterns[idx]
    rest = patterns[:idx] + patterns[idx + 1:]
    for t in g.match(
        _slot_query(pattern.subject, binding),
        _slot_query(pattern.predicate, binding),
        _slot_query(pattern.object, binding),
    ):
        extended = _extend(pattern, t, binding)
        if extended is not None:
            yield from _solutions(g, rest, extended)


def execute(q: Query, g: Graph) -> SolutionTable:
    """Evaluate a query: BGP join, filters, ORDER BY, projection, DISTINCT, LIMIT."""
    all_vars: list[str] = []
    for p in q.patterns:
        for slot in (p.subject, p.predicate, p.object):
            if isinstance(slot, Variable) and slot.name not in all_vars:
                all_vars.append(slot.name)

    rows: list[dict[str, Term]] = []
    for binding in _solutions(g, list(q.patterns), {}):
        try:
            if all(_eval_filter(f, binding) for f in q.filters):
                rows.append(binding)
        except _FilterError:
            continue

    header = q.projection if q.projection is not None else all_vars
    projected = [tuple(row[name] for name in header) for row in rows]

    if q.order_by is not None:
        var, ascending = q.order_by
        keys = [
            (
                term_sort_key(row[var]),
                tuple(term_sort_key(t) for t in projected[i]),
            )
            for i, row in enumerate(rows)
        ]
        order = sorted(range(len(projected)), key=lambda i: keys[i], reverse=not ascending)
        projected = [projected[i] for i in order]
    else:
        projected.sort(key=lambda r: tuple(term_sort_key(t) for t in r))

    if q.distinct:
        seen: set[tuple[Term, ...]] = set()
        unique: list[tuple[Term, ...]] = []
        for row in projected:
            if row not in seen:
                seen.add(row)
                unique.append(row)
        projected = unique

    if q.limit is not None:
        projected = projected[: q.limit]

    return SolutionTable(header=list(header), rows=projected)
