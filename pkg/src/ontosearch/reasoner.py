"""Forward-chaining materialization of RDFS/OWL-lite entailments.

The rule catalog covers subclass/subproperty transitivity and
inheritance, domain/range typing, equivalence expansion, symmetric
disjointWith/differentFrom, allValuesFrom / someValuesFrom restriction
propagation, and owl:AllDifferent list expansion. No rule invents new
terms, so materialization always terminates.

Evaluation is semi-naive: only newly derived triples re-trigger rule
bodies, joined against the accumulated store through its indexes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .rdf import (
    VOCAB,
    BlankNode,
    Graph,
    GraphBuilder,
    Iri,
    Literal,
    RdfError,
    Term,
    Triple,
    term_sort_key,
)

logger = logging.getLogger(__name__)


class Rule(Enum):
    """Identifiers of the entailment rules that can be enabled."""

    EQC = "EQC"
    SCO_TRANS = "SCO-TRANS"
    SCO_TYPE = "SCO-TYPE"
    SPO_TRANS = "SPO-TRANS"
    SPO_INH = "SPO-INH"
    DOM = "DOM"
    RNG = "RNG"
    DISJ_SYM = "DISJ-SYM"
    DIFF_SYM = "DIFF-SYM"
    AVF = "AVF"
    SVF = "SVF"
    ALLDIFF_EXPAND = "ALLDIFF-EXPAND"


RuleSet = frozenset[Rule]
ALL_RULES: RuleSet = frozenset(Rule)


class _Var:
    """Pattern variable; identity by name."""

    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return f"?{self.name}"


_Slot = Union[Term, _Var]
_Pattern = tuple[_Slot, _Slot, _Slot]


@dataclass(frozen=True)
class _RuleDef:
    body: tuple[_Pattern, ...]
    head: tuple[_Pattern, ...]
    # Variables that must not bind a literal for the rule to fire.
    non_literal: tuple[str, ...] = ()


def _v(name: str) -> _Var:
    return _Var(name)


_A, _B, _C, _D = _v("A"), _v("B"), _v("C"), _v("D")
_P, _Q, _R2 = _v("p"), _v("q"), _v("r2")
_X, _Y, _RN = _v("x"), _v("y"), _v("rn")

_RULE_DEFS: dict[Rule, _RuleDef] = {
    Rule.EQC: _RuleDef(
        body=((_A, VOCAB.equivalent_class, _B),),
        head=((_A, VOCAB.sub_class_of, _B), (_B, VOCAB.sub_class_of, _A)),
    ),
    Rule.SCO_TRANS: _RuleDef(
        body=((_A, VOCAB.sub_class_of, _B), (_B, VOCAB.sub_class_of, _C)),
        head=((_A, VOCAB.sub_class_of, _C),),
    ),
    Rule.SCO_TYPE: _RuleDef(
        body=((_X, VOCAB.type, _A), (_A, VOCAB.sub_class_of, _B)),
        head=((_X, VOCAB.type, _B),),
    ),
    Rule.SPO_TRANS: _RuleDef(
        body=((_P, VOCAB.sub_property_of, _Q), (_Q, VOCAB.sub_property_of, _R2)),
        head=((_P, VOCAB.sub_property_of, _R2),),
    ),
    Rule.SPO_INH: _RuleDef(
        body=((_X, _P, _Y), (_P, VOCAB.sub_property_of, _Q)),
        head=((_X, _Q, _Y),),
    ),
    Rule.DOM: _RuleDef(
        body=((_P, VOCAB.domain, _C), (_X, _P, _Y)),
        head=((_X, VOCAB.type, _C),),
    ),
    Rule.RNG: _RuleDef(
        body=((_P, VOCAB.range, _C), (_X, _P, _Y)),
        head=((_Y, VOCAB.type, _C),),
        non_literal=("y",),
    ),
    Rule.DISJ_SYM: _RuleDef(
        body=((_A, VOCAB.disjoint_with, _B),),
        head=((_B, VOCAB.disjoint_with, _A),),
    ),
    Rule.DIFF_SYM: _RuleDef(
        body=((_X, VOCAB.different_from, _Y),),
        head=((_Y, VOCAB.different_from, _X),),
    ),
    Rule.AVF: _RuleDef(
        body=(
            (_C, VOCAB.sub_class_of, _RN),
            (_RN, VOCAB.type, VOCAB.restriction),
            (_RN, VOCAB.on_property, _P),
            (_RN, VOCAB.all_values_from, _D),
            (_X, VOCAB.type, _C),
            (_X, _P, _Y),
        ),
        head=((_Y, VOCAB.type, _D),),
        non_literal=("y",),
    ),
    Rule.SVF: _RuleDef(
        body=(
            (_RN, VOCAB.type, VOCAB.restriction),
            (_RN, VOCAB.on_property, _P),
            (_RN, VOCAB.some_values_from, _D),
            (_X, _P, _Y),
            (_Y, VOCAB.type, _D),
        ),
        head=((_X, VOCAB.type, _RN),),
    ),
}

_Binding = dict[str, Term]


def _unify_slot(slot: _Slot, value: Term, binding: _Binding) -> Optional[_Binding]:
    if isinstance(slot, _Var):
        bound = binding.get(slot.name)
        if bound is None:
            out = dict(binding)
            out[slot.name] = value
            return out
        return binding if bound == value else None
    return binding if slot == value else None


def _unify(pattern: _Pattern, t: Triple, binding: _Binding) -> Optional[_Binding]:
    for slot, value in zip(pattern, (t.subject, t.predicate, t.object)):
        binding = _unify_slot(slot, value, binding)
        if binding is None:
            return None
    return binding


def _instantiate(slot: _Slot, binding: _Binding) -> Term:
    return binding[slot.name] if isinstance(slot, _Var) else slot


def _bound_count(pattern: _Pattern, binding: _Binding) -> int:
    return sum(
        1
        for slot in pattern
        if not isinstance(slot, _Var) or slot.name in binding
    )


def _solve(
    store: GraphBuilder,
    patterns: list[_Pattern],
    binding: _Binding,
) -> Iterable[_Binding]:
    """All extensions of `binding` satisfying every remaining pattern."""
    if not patterns:
        yield binding
        return
    # Most-bound pattern first keeps the index lookups selective.
    idx = max(range(len(patterns)), key=lambda i: _bound_count(patterns[i], binding))
    pattern = patterns[idx]
    rest = patterns[:idx] + patterns[idx + 1:]
    query = [
        _instantiate(slot, binding)
        if not isinstance(slot, _Var) or slot.name in binding
        else None
        for slot in pattern
    ]
    for t in store.match(*query):
        extended = _unify(pattern, t, binding)
        if extended is not None:
            yield from _solve(store, rest, extended)


def _conclusions(rule_def: _RuleDef, binding: _Binding) -> list[Triple]:
    if any(isinstance(binding[name], Literal) for name in rule_def.non_literal):
        return []
    out = []
    for head in rule_def.head:
        s, p, o = (_instantiate(slot, binding) for slot in head)
        try:
            out.append(Triple(s, p, o))
        except RdfError:
            # A firing whose conclusion cannot be a triple (literal subject,
            # non-IRI predicate) is dropped; the triple simply cannot exist.
            continue
    return out


def _list_members(store: GraphBuilder, head: Term) -> Optional[list[Term]]:
    """Members of an rdf:List, or None if the list is malformed."""
    members: list[Term] = []
    seen: set[Term] = set()
    node = head
    while node != VOCAB.nil:
        if node in seen:
            return None  # cycle
        seen.add(node)
        firsts = store.match(node, VOCAB.first, None)
        rests = store.match(node, VOCAB.rest, None)
        if len(firsts) != 1 or len(rests) != 1:
            return None
        members.append(firsts[0].object)
        node = rests[0].object
        if isinstance(node, Literal):
            return None
    return members


def _alldiff_conclusions(store: GraphBuilder) -> list[Triple]:
    """Expand every owl:AllDifferent declaration into pairwise differentFrom."""
    out: list[Triple] = []
    for decl in store.match(None, VOCAB.type, VOCAB.all_different):
        for t in store.match(decl.subject, VOCAB.distinct_members, None):
            members = _list_members(store, t.object)
            if members is None:
                logger.warning(
                    "skipping malformed distinct-members list at %r", t.object
                )
                continue
            for i, mi in enumerate(members):
                for j, mj in enumerate(members):
                    if i == j:
                        continue
                    try:
                        out.append(Triple(mi, VOCAB.different_from, mj))
                    except RdfError:
                        continue
    return out


# Predicates whose arrival can change what ALLDIFF-EXPAND derives.
_ALLDIFF_TRIGGERS = {VOCAB.distinct_members, VOCAB.first, VOCAB.rest}


def materialize(g: Graph, rules: frozenset[Rule] = ALL_RULES) -> Graph:
    """Least fixpoint of the enabled rules over g; always a supergraph of g.

    Every term in the output already occurs in the input or in the shared
    vocabulary, so the closure is finite.
    """
    bad = {r for r in rules if not isinstance(r, Rule)}
    if bad:
        raise ValueError(f"unknown rule identifiers: {bad}")
    store = GraphBuilder(g)
    pattern_rules = [(r, _RULE_DEFS[r]) for r in Rule if r in rules and r in _RULE_DEFS]
    alldiff = Rule.ALLDIFF_EXPAND in rules
    agenda = list(store)
    while agenda:
        t = agenda.pop()
        derived: list[Triple] = []
        for _, rule_def in pattern_rules:
            for i, pattern in enumerate(rule_def.body):
                binding = _unify(pattern, t, {})
                if binding is None:
                    continue
                rest = [p for j, p in enumerate(rule_def.body) if j != i]
                for full in _solve(store, rest, binding):
                    derived.extend(_conclusions(rule_def, full))
        if alldiff and (
            t.predicate in _ALLDIFF_TRIGGERS
            or (t.predicate == VOCAB.type and t.object == VOCAB.all_different)
        ):
            derived.extend(_alldiff_conclusions(store))
        for nt in derived:
            if store.insert(nt):
                agenda.append(nt)
    return store.freeze()


class ViolationKind(str, Enum):
    DISJOINTNESS = "disjointness"
    FUNCTIONAL = "functional"
    DIFFERENT_FROM = "differentFrom"


@dataclass(frozen=True)
class Violation:
    """One consistency fault found in a (materialized) graph."""

    kind: ViolationKind
    focus: Term
    participants: tuple[Term, ...]
    detail: str

    def __post_init__(self) -> None:
        arity = {
            ViolationKind.DISJOINTNESS: 2,
            ViolationKind.FUNCTIONAL: 3,
            ViolationKind.DIFFERENT_FROM: 2,
        }[self.kind]
        if len(self.participants) != arity:
            raise ValueError(
                f"{self.kind.value} violation needs {arity} participants, "
                f"got {len(self.participants)}"
            )


def _sorted_pair(a: Term, b: Term) -> tuple[Term, Term]:
    return (a, b) if term_sort_key(a) <= term_sort_key(b) else (b, a)


def check_consistency(g: Graph) -> list[Violation]:
    """Disjointness, functional-property, and differentFrom faults in g.

    The caller is expected to pass an already materialized graph; no rules
    are applied here. Output order is deterministic: sorted by focus, then
    kind, then participants.
    """
    found: dict[tuple, Violation] = {}

    for t in g.match(None, VOCAB.disjoint_with, None):
        a, b = t.subject, t.object
        for typed in g.match(None, VOCAB.type, a):
            x = typed.subject
            if Triple(x, VOCAB.type, b) in g:
                pair = _sorted_pair(a, b)
                key = (ViolationKind.DISJOINTNESS, x, frozenset((a, b)))
                found.setdefault(
                    key,
                    Violation(
                        ViolationKind.DISJOINTNESS,
                        x,
                        pair,
                        f"{x!r} is an instance of disjoint classes "
                        f"{pair[0]!r} and {pair[1]!r}",
                    ),
                )

    for t in g.match(None, VOCAB.type, VOCAB.functional_property):
        p = t.subject
        by_subject: dict[Term, set[Term]] = {}
        for use in g.match(None, p, None):
            by_subject.setdefault(use.subject, set()).add(use.object)
        for x, values in by_subject.items():
            ordered = sorted(values, key=term_sort_key)
            for i, v in enumerate(ordered):
                for w in ordered[i + 1:]:
                    key = (ViolationKind.FUNCTIONAL, x, p, v, w)
                    found.setdefault(
                        key,
                        Violation(
                            ViolationKind.FUNCTIONAL,
                            x,
                            (p, v, w),
                            f"functional property {p!r} has two values on "
                            f"{x!r}: {v!r} and {w!r}",
                        ),
                    )

    for t in g.match(None, VOCAB.different_from, None):
        if t.subject == t.object:
            x = t.subject
            key = (ViolationKind.DIFFERENT_FROM, x)
            found.setdefault(
                key,
                Violation(
                    ViolationKind.DIFFERENT_FROM,
                    x,
                    (x, x),
                    f"{x!r} is declared different from itself",
                ),
            )
    for t in g.match(None, VOCAB.same_as, None):
        x, y = t.subject, t.object
        if x != y and Triple(x, VOCAB.different_from, y) in g:
            key = (ViolationKind.DIFFERENT_FROM, x, y)
            found.setdefault(
                key,
                Violation(
                    ViolationKind.DIFFERENT_FROM,
                    x,
                    (x, y),
                    f"{x!r} is declared both sameAs and differentFrom {y!r}",
                ),
            )

    return sorted(
        found.values(),
        key=lambda v: (
            term_sort_key(v.focus),
            v.kind.value,
            tuple(term_sort_key(p) for p in v.participants),
        ),
    )


def _check_mode(mode: str) -> None:
    if mode not in ("direct", "all"):
        raise ValueError(f"mode must be 'direct' or 'all', got {mode!r}")


def subclasses(g: Graph, c: Term, mode: str = "all") -> set[Term]:
    """Classes below c in the (materialized) subclass relation.

    Self-loops are ignored; 'direct' keeps only subclasses with no other
    strictly intermediate class between them and c.
    """
    _check_mode(mode)
    below = {t.subject for t in g.match(None, VOCAB.sub_class_of, c)} - {c}
    if mode == "all":
        return below
    return {
        x
        for x in below
        if not any(
            z not in (x, c)
            and Triple(x, VOCAB.sub_class_of, z) in g
            for z in below
        )
    }


def superclasses(g: Graph, c: Term, mode: str = "all") -> set[Term]:
    """Mirror of subclasses with the edge direction reversed."""
    _check_mode(mode)
    above = {t.object for t in g.match(c, VOCAB.sub_class_of, None)} - {c}
    if mode == "all":
        return above
    return {
        x
        for x in above
        if not any(
            z not in (x, c)
            and Triple(z, VOCAB.sub_class_of, x) in g
            for z in above
        )
    }


def instances(g: Graph, c: Term, mode: str = "all") -> set[Term]:
    """Individuals typed into c (mode='all'), or typed into c but into none
    of its proper descendants (mode='direct')."""
    _check_mode(mode)
    members = {t.subject for t in g.match(None, VOCAB.type, c)}
    if mode == "all":
        return members
    below = subclasses(g, c, "all")
    return {
        x
        for x in members
        if not any(Triple(x, VOCAB.type, d) in g for d in below)
    }
