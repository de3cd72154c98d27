"""RDF data model: terms, triples, and an immutable indexed triple store.

Terms compare lexically — "1"^^xsd:integer and "01"^^xsd:integer are
different literals. No value-space normalization happens anywhere in
this layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union


class RdfError(ValueError):
    """A structurally invalid term or triple."""


def _has_whitespace(text: str) -> bool:
    return any(ch.isspace() for ch in text)


@dataclass(frozen=True, slots=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise RdfError("IRI must be non-empty")
        if _has_whitespace(self.value):
            raise RdfError(f"IRI contains whitespace: {self.value!r}")

    def __repr__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    """An anonymous resource, scoped to a single graph."""

    label: str

    def __post_init__(self) -> None:
        if not self.label:
            raise RdfError("blank node label must be non-empty")
        if _has_whitespace(self.label):
            raise RdfError(f"blank node label contains whitespace: {self.label!r}")

    def __repr__(self) -> str:
        return f"_:{self.label}"


# Forward declarations for datatype IRIs used by Literal validation.
_RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
_RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
_OWL_NS = "http://www.w3.org/2002/07/owl#"
_XSD_NS = "http://www.w3.org/2001/XMLSchema#"

XSD_STRING = Iri(_XSD_NS + "string")
XSD_INTEGER = Iri(_XSD_NS + "integer")
RDF_LANGSTRING = Iri(_RDF_NS + "langString")


@dataclass(frozen=True, slots=True)
class Literal:
    """A data value: lexical form, datatype IRI, optional language tag.

    A language tag is legal only with the language-string datatype, and is
    stored lowercase.
    """

    lexical: str
    datatype: Iri = XSD_STRING
    language: Optional[str] = None

    def __post_init__(self) -> None:
        if self.language is not None:
            if self.datatype != RDF_LANGSTRING:
                raise RdfError("language tag requires the langString datatype")
            if not self.language or self.language != self.language.lower():
                raise RdfError(f"language tag must be non-empty lowercase: {self.language!r}")
            if _has_whitespace(self.language):
                raise RdfError(f"language tag contains whitespace: {self.language!r}")
        elif self.datatype == RDF_LANGSTRING:
            raise RdfError("langString literal requires a language tag")

    def __repr__(self) -> str:
        if self.language is not None:
            return f'"{self.lexical}"@{self.language}'
        if self.datatype == XSD_STRING:
            return f'"{self.lexical}"'
        return f'"{self.lexical}"^^{self.datatype!r}'


Term = Union[Iri, BlankNode, Literal]

# Kind ranks give the total term order used for deterministic output:
# blank < IRI < literal, lexicographic within a kind.
_KIND_RANK = {BlankNode: 0, Iri: 1, Literal: 2}


def term_sort_key(t: Term) -> tuple:
    """Total order over terms; used wherever deterministic output is needed."""
    if isinstance(t, BlankNode):
        return (0, t.label)
    if isinstance(t, Iri):
        return (1, t.value)
    return (2, t.lexical, t.datatype.value, t.language or "")


@dataclass(frozen=True, slots=True)
class Triple:
    """One subject-predicate-object statement."""

    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise RdfError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise RdfError("triple predicate must be an IRI")

    def __repr__(self) -> str:
        return f"({self.subject!r} {self.predicate!r} {self.object!r})"


def triple_sort_key(t: Triple) -> tuple:
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


class GraphBuilder:
    """Mutable triple accumulator; single writer, then freeze() to share.

    Keeps the same lookup indexes as Graph so the reasoner can join
    against partially built data.
    """

    def __init__(self, triples: Iterable[Triple] = ()) -> None:
        self._triples: set[Triple] = set()
        self._by_s: dict[Term, set[Triple]] = {}
        self._by_p: dict[Term, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}
        self._by_sp: dict[tuple[Term, Term], set[Triple]] = {}
        for t in triples:
            self.insert(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def insert(self, t: Triple) -> bool:
        """Add a triple; returns True iff it was not already present."""
        if not isinstance(t, Triple):
            raise RdfError(f"not a triple: {t!r}")
        if t in self._triples:
            return False
        self._triples.add(t)
        self._by_s.setdefault(t.subject, set()).add(t)
        self._by_p.setdefault(t.predicate, set()).add(t)
        self._by_o.setdefault(t.object, set()).add(t)
        self._by_sp.setdefault((t.subject, t.predicate), set()).add(t)
        return True

    def match(
        self,
        s: Optional[Term] = None,
        p: Optional[Term] = None,
        o: Optional[Term] = None,
    ) -> list[Triple]:
        """Triples agreeing with every bound slot; None is a wildcard."""
        return _match(self, s, p, o)

    def freeze(self) -> "Graph":
        """Immutable snapshot; later inserts do not affect it."""
        return Graph(self._triples)


class Graph:
    """An immutable set of triples with exact-term lookup indexes.

    Safe to share across any number of concurrent readers.
    """

    __slots__ = ("_triples", "_by_s", "_by_p", "_by_o", "_by_sp")

    def __init__(self, triples: Iterable[Triple] = ()) -> None:
        self._triples = frozenset(triples)
        self._by_s: dict[Term, set[Triple]] = {}
        self._by_p: dict[Term, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}
        self._by_sp: dict[tuple[Term, Term], set[Triple]] = {}
        for t in self._triples:
            self._by_s.setdefault(t.subject, set()).add(t)
            self._by_p.setdefault(t.predicate, set()).add(t)
            self._by_o.setdefault(t.object, set()).add(t)
            self._by_sp.setdefault((t.subject, t.predicate), set()).add(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    @property
    def statements(self) -> frozenset[Triple]:
        return self._triples

    def match(
        self,
        s: Optional[Term] = None,
        p: Optional[Term] = None,
        o: Optional[Term] = None,
    ) -> list[Triple]:
        """Triples agreeing with every bound slot; None is a wildcard."""
        return _match(self, s, p, o)

    def subjects(self, p: Optional[Term] = None, o: Optional[Term] = None) -> set[Term]:
        return {t.subject for t in self.match(None, p, o)}

    def objects(self, s: Optional[Term] = None, p: Optional[Term] = None) -> set[Term]:
        return {t.object for t in self.match(s, p, None)}

    def terms(self) -> set[Term]:
        """Every term occurring in any slot of any statement."""
        out: set[Term] = set()
        for t in self._triples:
            out.add(t.subject)
            out.add(t.predicate)
            out.add(t.object)
        return out


def _match(store, s, p, o) -> list[Triple]:
    # Pick the most selective index, then filter the remaining slots.
    if s is not None and p is not None:
        candidates = store._by_sp.get((s, p), ())
        if o is None:
            return list(candidates)
        return [t for t in candidates if t.object == o]
    if s is not None:
        candidates = store._by_s.get(s, ())
    elif p is not None:
        candidates = store._by_p.get(p, ())
    elif o is not None:
        candidates = store._by_o.get(o, ())
    else:
        return list(store._triples)
    return [
        t
        for t in candidates
        if (p is None or t.predicate == p) and (o is None or t.object == o)
    ]


class _Namespace:
    """Attribute access mints IRIs under a fixed namespace prefix."""

    def __init__(self, base: str) -> None:
        self._base = base

    def __getattr__(self, local: str) -> Iri:
        return Iri(self._base + local)

    def __getitem__(self, local: str) -> Iri:
        return Iri(self._base + local)

    @property
    def base(self) -> str:
        return self._base


RDF = _Namespace(_RDF_NS)
RDFS = _Namespace(_RDFS_NS)
OWL = _Namespace(_OWL_NS)
XSD = _Namespace(_XSD_NS)

# Application vocabulary for ingested browsing-history pages.
APP_NS = "http://example.org/history#"
APP = _Namespace(APP_NS)


@dataclass(frozen=True)
class Vocabulary:
    """Every IRI the reasoner and the page emitter rely on."""

    type: Iri = RDF.type
    first: Iri = RDF.first
    rest: Iri = RDF.rest
    nil: Iri = RDF.nil
    sub_class_of: Iri = RDFS.subClassOf
    sub_property_of: Iri = RDFS.subPropertyOf
    domain: Iri = RDFS.domain
    range: Iri = RDFS.range
    label: Iri = RDFS.label
    comment: Iri = RDFS.comment
    restriction: Iri = OWL.Restriction
    on_property: Iri = OWL.onProperty
    all_values_from: Iri = OWL.allValuesFrom
    some_values_from: Iri = OWL.someValuesFrom
    disjoint_with: Iri = OWL.disjointWith
    equivalent_class: Iri = OWL.equivalentClass
    functional_property: Iri = OWL.FunctionalProperty
    same_as: Iri = OWL.sameAs
    different_from: Iri = OWL.differentFrom
    all_different: Iri = OWL.AllDifferent
    distinct_members: Iri = OWL.distinctMembers
    web_page: Iri = APP.WebPage
    url: Iri = APP.url
    visit_count: Iri = APP.visitCount
    last_visit: Iri = APP.lastVisit
    keyword: Iri = APP.keyword

    def all_terms(self) -> frozenset[Iri]:
        return frozenset(getattr(self, f) for f in self.__dataclass_fields__)


VOCAB = Vocabulary()
VOCAB_TERMS = VOCAB.all_terms()
