"""Ontology-expanded keyword search over the materialized knowledge base.

Query tokens are matched against class labels and keyword annotations;
matched classes expand to all their descendants, whose instances join
plain text matches as candidates. Candidates are scored by class
membership, token overlap, and log-damped visit count, then ranked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .ingest import tokenize
from .rdf import VOCAB, Graph, Iri, Literal, Term, term_sort_key
from .reasoner import instances, subclasses, superclasses


@dataclass(frozen=True)
class RankingWeights:
    """Score = w_class·class_hit + w_overlap·token_overlap + w_visits·ln(1+visits)."""

    w_class: float = 2.0
    w_overlap: float = 1.0
    w_visits: float = 0.5

    def __post_init__(self) -> None:
        for name in ("w_class", "w_overlap", "w_visits"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


DEFAULT_WEIGHTS = RankingWeights()


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: Optional[str]
    snippet: Optional[str]
    class_iri: Optional[str]
    score: float


def class_terms(g: Graph) -> set[Term]:
    """Terms used as classes: subclass-relation members, keyword holders,
    and rdf:type objects. Page individuals never qualify."""
    out: set[Term] = set()
    for t in g.match(None, VOCAB.sub_class_of, None):
        out.add(t.subject)
        out.add(t.object)
    for t in g.match(None, VOCAB.keyword, None):
        out.add(t.subject)
    for t in g.match(None, VOCAB.type, None):
        out.add(t.object)
    return out


def _label_tokens(
    g: Graph, term: Term, stopwords: Optional[frozenset[str]] = None
) -> set[str]:
    tokens: set[str] = set()
    for t in g.match(term, VOCAB.label, None):
        if isinstance(t.object, Literal):
            tokens.update(tokenize(t.object.lexical, stopwords))
    return tokens


def _keyword_values(g: Graph, term: Term) -> set[str]:
    return {
        t.object.lexical.lower()
        for t in g.match(term, VOCAB.keyword, None)
        if isinstance(t.object, Literal)
    }


def match_classes(
    query_tokens: Iterable[str],
    ontology: Graph,
    stopwords: Optional[frozenset[str]] = None,
) -> set[Term]:
    """Classes whose label tokens or keyword values hit any query token,
    plus every descendant of each hit."""
    tokens = {tok.lower() for tok in query_tokens}
    if not tokens:
        return set()
    matched: set[Term] = set()
    for cls in class_terms(ontology):
        if tokens & _label_tokens(ontology, cls, stopwords) or tokens & _keyword_values(
            ontology, cls
        ):
            matched.add(cls)
    expanded = set(matched)
    for cls in matched:
        expanded |= subclasses(ontology, cls, "all")
    return expanded


def _snippet(comment: Optional[str], limit: int = 200) -> Optional[str]:
    if comment is None or len(comment) <= limit:
        return comment
    cut = comment[:limit]
    head, sep, _ = cut.rpartition(" ")
    return head.rstrip() if sep else cut


def _first_literal(g: Graph, subject: Term, predicate: Term) -> Optional[str]:
    values = sorted(
        (t.object.lexical for t in g.match(subject, predicate, None)
         if isinstance(t.object, Literal)),
    )
    return values[0] if values else None


def _visit_count(g: Graph, subject: Term) -> int:
    best = 0
    for t in g.match(subject, VOCAB.visit_count, None):
        if isinstance(t.object, Literal):
            try:
                best = max(best, int(t.object.lexical))
            except ValueError:
                continue
    return best


def _result_class(g: Graph, subject: Term) -> Optional[str]:
    """Deepest IRI class the page is typed into, ignoring the page root."""
    candidates = [
        t.object
        for t in g.match(subject, VOCAB.type, None)
        if isinstance(t.object, Iri) and t.object != VOCAB.web_page
    ]
    if not candidates:
        return None
    candidates.sort(
        key=lambda c: (-len(superclasses(g, c, "all")), term_sort_key(c))
    )
    return candidates[0].value


def search(
    kb: Graph,
    query_text: str,
    k: int = 10,
    weights: RankingWeights = DEFAULT_WEIGHTS,
    stopwords: Optional[frozenset[str]] = None,
) -> list[SearchResult]:
    """Top-k ranked pages for a keyword query over a materialized graph."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query_tokens = set(tokenize(query_text, stopwords))
    if not query_tokens:
        return []

    matched = match_classes(query_tokens, kb, stopwords)
    class_members: set[Term] = set()
    for cls in matched:
        class_members |= instances(kb, cls, "all")

    candidates: set[Term] = set(class_members)
    for page in instances(kb, VOCAB.web_page, "all"):
        page_tokens = _page_tokens(kb, page, stopwords)
        if page_tokens & query_tokens:
            candidates.add(page)

    results: list[SearchResult] = []
    for cand in candidates:
        if not isinstance(cand, Iri):
            continue
        in_class = 1.0 if cand in class_members else 0.0
        overlap = len(query_tokens & _page_tokens(kb, cand, stopwords)) / len(query_tokens)
        visits = _visit_count(kb, cand)
        score = (
            weights.w_class * in_class
            + weights.w_overlap * overlap
            + weights.w_visits * math.log1p(visits)
        )
        if score <= 0:
            continue
        results.append(
            SearchResult(
                url=cand.value,
                title=_first_literal(kb, cand, VOCAB.label),
                snippet=_snippet(_first_literal(kb, cand, VOCAB.comment)),
                class_iri=_result_class(kb, cand),
                score=score,
            )
        )
    results.sort(key=lambda r: (-r.score, r.url))
    return results[:k]


def _page_tokens(
    g: Graph, page: Term, stopwords: Optional[frozenset[str]]
) -> set[str]:
    tokens: set[str] = set()
    for predicate in (VOCAB.label, VOCAB.comment):
        for t in g.match(page, predicate, None):
            if isinstance(t.object, Literal):
                tokens.update(tokenize(t.object.lexical, stopwords))
    return tokens
