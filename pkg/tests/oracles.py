"""Independent oracles and random-instance generators for the test suite.

Everything here re-derives expected results from first principles (plain
sets, full re-scans, brute-force enumeration) and deliberately avoids the
production engines it is used to check.
"""

from __future__ import annotations

import random
from itertools import product
from typing import Iterable, Optional

from ontosearch.rdf import (
    OWL,
    RDF,
    RDFS,
    XSD_INTEGER,
    BlankNode,
    Graph,
    Iri,
    Literal,
    RdfError,
    Term,
    Triple,
    term_sort_key,
)

SUB = RDFS.subClassOf
SPO = RDFS.subPropertyOf
TYPE = RDF.type


def _try_add(out: set[Triple], s: Term, p: Term, o: Term) -> None:
    try:
        out.add(Triple(s, p, o))
    except RdfError:
        pass


def _naive_list_members(facts: set[Triple], head: Term) -> Optional[list[Term]]:
    members: list[Term] = []
    seen: set[Term] = set()
    node = head
    while node != RDF.nil:
        if node in seen or isinstance(node, Literal):
            return None
        seen.add(node)
        firsts = [t.object for t in facts if t.subject == node and t.predicate == RDF.first]
        rests = [t.object for t in facts if t.subject == node and t.predicate == RDF.rest]
        if len(firsts) != 1 or len(rests) != 1:
            return None
        members.append(firsts[0])
        node = rests[0]
    return members


def naive_step(facts: set[Triple]) -> set[Triple]:
    """One full re-scan applying every rule body to the current facts."""
    out: set[Triple] = set()
    by_p: dict[Term, list[Triple]] = {}
    for t in facts:
        by_p.setdefault(t.predicate, []).append(t)

    for t in by_p.get(OWL.equivalentClass, ()):
        _try_add(out, t.subject, SUB, t.object)
        _try_add(out, t.object, SUB, t.subject)

    subs = [(t.subject, t.object) for t in by_p.get(SUB, ())]
    for a, b in subs:
        for b2, c in subs:
            if b2 == b:
                _try_add(out, a, SUB, c)
    for t in by_p.get(TYPE, ()):
        for b, c in subs:
            if t.object == b:
                _try_add(out, t.subject, TYPE, c)

    spos = [(t.subject, t.object) for t in by_p.get(SPO, ())]
    for p, q in spos:
        for q2, r in spos:
            if q2 == q:
                _try_add(out, p, SPO, r)
    for p, q in spos:
        for t in by_p.get(p, ()):
            _try_add(out, t.subject, q, t.object)

    for t in by_p.get(RDFS.domain, ()):
        for use in by_p.get(t.subject, ()):
            _try_add(out, use.subject, TYPE, t.object)
    for t in by_p.get(RDFS.range, ()):
        for use in by_p.get(t.subject, ()):
            if not isinstance(use.object, Literal):
                _try_add(out, use.object, TYPE, t.object)

    for t in by_p.get(OWL.disjointWith, ()):
        _try_add(out, t.object, OWL.disjointWith, t.subject)
    for t in by_p.get(OWL.differentFrom, ()):
        _try_add(out, t.object, OWL.differentFrom, t.subject)

    restrictions = {t.subject for t in by_p.get(TYPE, ()) if t.object == OWL.Restriction}
    on_prop = [(t.subject, t.object) for t in by_p.get(OWL.onProperty, ())]
    types = by_p.get(TYPE, ())
    for c, r in subs:
        if r not in restrictions:
            continue
        for r2, p in on_prop:
            if r2 != r:
                continue
            for t in by_p.get(OWL.allValuesFrom, ()):
                if t.subject != r:
                    continue
                d = t.object
                for typed in types:
                    if typed.object != c:
                        continue
                    for use in by_p.get(p, ()):
                        if use.subject == typed.subject and not isinstance(use.object, Literal):
                            _try_add(out, use.object, TYPE, d)
    for r2, p in on_prop:
        if r2 not in restrictions:
            continue
        for t in by_p.get(OWL.someValuesFrom, ()):
            if t.subject != r2:
                continue
            d = t.object
            for use in by_p.get(p, ()):
                for typed in types:
                    if typed.subject == use.object and typed.object == d:
                        _try_add(out, use.subject, TYPE, r2)

    alldiff = {t.subject for t in by_p.get(TYPE, ()) if t.object == OWL.AllDifferent}
    for t in by_p.get(OWL.distinctMembers, ()):
        if t.subject not in alldiff:
            continue
        members = _naive_list_members(facts, t.object)
        if members is None:
            continue
        for i, mi in enumerate(members):
            for j, mj in enumerate(members):
                if i != j:
                    _try_add(out, mi, OWL.differentFrom, mj)

    return out


def naive_materialize(g: Iterable[Triple]) -> set[Triple]:
    """Re-scan fixpoint: apply every rule against all facts until no change."""
    facts = set(g)
    while True:
        new = naive_step(facts) - facts
        if not new:
            return facts
        facts |= new


# --- random reasoner instances ----------------------------------------------

_RULE_PREDICATES = [
    TYPE, SUB, SPO, RDFS.domain, RDFS.range,
    OWL.disjointWith, OWL.differentFrom, OWL.equivalentClass, OWL.sameAs,
    OWL.onProperty, OWL.allValuesFrom, OWL.someValuesFrom,
]
_SPECIAL_OBJECTS = [OWL.Restriction, OWL.AllDifferent, OWL.FunctionalProperty]


def random_rule_graph(rng: random.Random, max_triples: int = 200) -> Graph:
    """A graph over a 30-term universe biased toward rule-relevant shapes."""
    iris = [Iri(f"http://t.example/n{i}") for i in range(20)]
    blanks = [BlankNode(f"g{i}") for i in range(5)]
    literals = [
        Literal("one"),
        Literal("2", XSD_INTEGER),
        Literal("deux", Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"), "fr"),
        Literal("01", XSD_INTEGER),
        Literal(""),
    ]
    subjects = iris + blanks
    objects = iris + blanks + literals + _SPECIAL_OBJECTS + [RDF.nil]

    triples: set[Triple] = set()

    def add(s, p, o):
        if len(triples) < max_triples:
            _try_add(triples, s, p, o)

    n = rng.randint(0, max_triples - 40)
    for _ in range(n):
        s = rng.choice(subjects)
        p = rng.choice(_RULE_PREDICATES) if rng.random() < 0.6 else rng.choice(iris[:6])
        o = rng.choice(objects)
        add(s, p, o)

    # Restriction gadget so AVF/SVF have something to chew on.
    if rng.random() < 0.7:
        r = rng.choice(blanks)
        c, d, x, y = (rng.choice(iris) for _ in range(4))
        p = rng.choice(iris[:6])
        add(r, TYPE, OWL.Restriction)
        add(r, OWL.onProperty, p)
        add(r, OWL.allValuesFrom if rng.random() < 0.5 else OWL.someValuesFrom, d)
        add(c, SUB, r)
        add(x, TYPE, c)
        add(x, p, y)
        add(y, TYPE, d)

    # An AllDifferent list, sometimes deliberately malformed.
    if rng.random() < 0.7:
        decl = rng.choice(subjects)
        members = rng.sample(iris, rng.randint(2, 4))
        cells = [BlankNode(f"cell{i}") for i in range(len(members))]
        add(decl, TYPE, OWL.AllDifferent)
        add(decl, OWL.distinctMembers, cells[0])
        for i, (cell, m) in enumerate(zip(cells, members)):
            add(cell, RDF.first, m)
            rest = cells[i + 1] if i + 1 < len(cells) else RDF.nil
            if rng.random() < 0.15:
                continue  # drop rdf:rest: malformed
            if rng.random() < 0.1:
                add(cell, RDF.rest, cells[0])  # cycle: malformed
            else:
                add(cell, RDF.rest, rest)

    return Graph(triples)


# --- brute-force SPARQL BGP oracle -------------------------------------------


def brute_force_bgp(g: Graph, patterns, variables: list[str]) -> set[tuple]:
    """All assignments over g's term universe satisfying every pattern.

    Patterns are (s, p, o) tuples whose slots are Terms or variable-name
    strings; result rows are term tuples ordered like `variables`.
    """
    facts = {(t.subject, t.predicate, t.object) for t in g}
    universe = sorted(g.terms(), key=term_sort_key)
    rows: set[tuple] = set()
    for assignment in product(universe, repeat=len(variables)):
        env = dict(zip(variables, assignment))

        def value(slot):
            return env[slot] if isinstance(slot, str) else slot

        if all((value(s), value(p), value(o)) in facts for s, p, o in patterns):
            rows.add(tuple(env[v] for v in variables))
    return rows


def random_bgp_case(rng: random.Random):
    """(graph, patterns, variables) sized for the brute-force oracle."""
    iris = [Iri(f"http://q.example/s{i}") for i in range(8)]
    preds = [Iri(f"http://q.example/p{i}") for i in range(5)]
    blanks = [BlankNode(f"qb{i}") for i in range(2)]
    literals = [Literal("alpha"), Literal("beta"), Literal("7", XSD_INTEGER)]
    subjects = iris + blanks
    objects = iris + blanks + literals

    triples: set[Triple] = set()
    for _ in range(rng.randint(1, 100)):
        _try_add(triples, rng.choice(subjects), rng.choice(preds), rng.choice(objects))
    g = Graph(triples)

    names = ["a", "b", "c"][: rng.randint(1, 3)]

    # Constant slots avoid blank nodes: queries cannot name them, though
    # variables still bind the ones in the graph.
    def slot(kind: str):
        if rng.random() < 0.5:
            return rng.choice(names)
        if kind == "s":
            return rng.choice(iris)
        if kind == "p":
            return rng.choice(preds)
        return rng.choice(iris + literals)

    patterns = []
    for _ in range(rng.randint(1, 3)):
        patterns.append((slot("s"), slot("p"), slot("o")))
    used = {s for pat in patterns for s in pat if isinstance(s, str)}
    variables = [n for n in names if n in used]
    return g, patterns, variables


# --- blank node canonicalization ---------------------------------------------


def canonical_triples(g: Iterable[Triple]) -> set[Triple]:
    """Relabel blank nodes c0, c1, ... by first occurrence in sorted order."""

    def blind_key(t: Term):
        if isinstance(t, BlankNode):
            return (0, "")
        return term_sort_key(t)

    ordered = sorted(g, key=lambda t: (blind_key(t.subject), blind_key(t.predicate), blind_key(t.object)))
    mapping: dict[Term, BlankNode] = {}

    def rename(t: Term) -> Term:
        if isinstance(t, BlankNode):
            if t not in mapping:
                mapping[t] = BlankNode(f"c{len(mapping)}")
            return mapping[t]
        return t

    return {Triple(rename(t.subject), t.predicate, rename(t.object)) for t in ordered}


# --- fixture classification oracle -------------------------------------------

INC_KEYWORDS = frozenset(
    "iphone ipad macbook ios itunes ipod imac itv iwatch samsung foxconn".split()
)
FRUIT_KEYWORDS = frozenset("fruit nutrition health benefits vitamin diet".split())


def expected_fixture_classes(pages, tokenize, cache_titles) -> dict[str, Optional[str]]:
    """url -> 'inc' | 'fruit' | None re-derived straight from the corpus data."""
    out: dict[str, Optional[str]] = {}
    for url, title, desc, _visits in pages:
        if title is None:
            title = cache_titles[url]
        tokens = set(tokenize(f"{title} {desc or ''}"))
        inc = len(INC_KEYWORDS & tokens)
        fruit = len(FRUIT_KEYWORDS & tokens)
        if inc == fruit == 0:
            out[url] = None
        elif inc > fruit:
            out[url] = "inc"
        elif fruit > inc:
            out[url] = "fruit"
        else:
            out[url] = "tie"
    return out
