"""RDFS schema handling, query reformulation, and data saturation.

The schema fragment covers subclass, subproperty, domain, and range
statements.  Reformulation compiles the schema into a query, turning
one conjunctive query into a union whose plain evaluation returns all
entailed answers.  Saturation materializes the same entailments in the
data instead; the two are dual and must agree, which the test suite
checks by evaluating both sides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import BranchCapExceededError, SchemaError
from .queries import (
    ConjunctiveQuery,
    Const,
    TriplePattern,
    Var,
    Workload,
    canonical_form,
)
from .store import Dictionary, Term, Triple, TripleTable, iri

DEFAULT_BRANCH_CAP = 1024

_RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
_RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"


@dataclass(frozen=True)
class Vocabulary:
    """The five IRIs giving schema statements their meaning.

    Defaults are the W3C names; test fixtures use short local IRIs and
    override these.
    """

    type: str = _RDF_NS + "type"
    subclass: str = _RDFS_NS + "subClassOf"
    subproperty: str = _RDFS_NS + "subPropertyOf"
    domain: str = _RDFS_NS + "domain"
    range: str = _RDFS_NS + "range"

    def reserved(self) -> frozenset[str]:
        return frozenset(
            (self.type, self.subclass, self.subproperty, self.domain, self.range)
        )


@dataclass(frozen=True)
class RDFSchema:
    """Parsed schema statements over dictionary ids.

    type_id is None only for the empty schema, in which case both
    reformulation and saturation degenerate to identities.
    """

    subclass_pairs: tuple[tuple[int, int], ...] = ()
    subproperty_pairs: tuple[tuple[int, int], ...] = ()
    domains: dict[int, int] = field(default_factory=dict)
    ranges: dict[int, int] = field(default_factory=dict)
    type_id: Optional[int] = None
    ignored: int = 0

    def is_empty(self) -> bool:
        return not (
            self.subclass_pairs
            or self.subproperty_pairs
            or self.domains
            or self.ranges
        )


def parse_schema(
    statements: Iterable[tuple[Term, Term, Term]],
    dictionary: Dictionary,
    vocabulary: Vocabulary = Vocabulary(),
) -> RDFSchema:
    """Interpret parsed triples as schema statements.

    Triples whose property is not one of the four schema properties are
    counted in `ignored` rather than rejected, so a mixed file can be
    loaded as a schema.  Statements about the reserved vocabulary
    itself, literal classes or properties, and conflicting domain or
    range declarations raise SchemaError.
    """
    reserved = vocabulary.reserved()
    subclass_pairs: list[tuple[int, int]] = []
    subproperty_pairs: list[tuple[int, int]] = []
    domains: dict[int, int] = {}
    ranges: dict[int, int] = {}
    ignored = 0

    def node_id(term: Term, role: str) -> int:
        if term.kind != "iri":
            raise SchemaError(f"{role} of a schema statement must be an IRI: {term}")
        if term.lexical in reserved:
            raise SchemaError(
                f"schema statement uses reserved vocabulary <{term.lexical}> as {role}"
            )
        return dictionary.intern(term)

    for s, p, o in statements:
        if p.kind != "iri":
            ignored += 1
            continue
        if p.lexical == vocabulary.subclass:
            subclass_pairs.append((node_id(s, "subject"), node_id(o, "object")))
        elif p.lexical == vocabulary.subproperty:
            subproperty_pairs.append((node_id(s, "subject"), node_id(o, "object")))
        elif p.lexical == vocabulary.domain:
            prop = node_id(s, "subject")
            cls = node_id(o, "object")
            if domains.get(prop, cls) != cls:
                raise SchemaError(
                    f"property <{s.lexical}> has conflicting domain declarations"
                )
            domains[prop] = cls
        elif p.lexical == vocabulary.range:
            prop = node_id(s, "subject")
            cls = node_id(o, "object")
            if ranges.get(prop, cls) != cls:
                raise SchemaError(
                    f"property <{s.lexical}> has conflicting range declarations"
                )
            ranges[prop] = cls
        else:
            ignored += 1

    return RDFSchema(
        subclass_pairs=tuple(dict.fromkeys(subclass_pairs)),
        subproperty_pairs=tuple(dict.fromkeys(subproperty_pairs)),
        domains=domains,
        ranges=ranges,
        type_id=dictionary.intern(iri(vocabulary.type)),
        ignored=ignored,
    )


@dataclass(frozen=True)
class SchemaClosure:
    """Reflexive-transitive closures of the subclass/subproperty graphs."""

    class_subs: dict[int, frozenset[int]]
    class_supers: dict[int, frozenset[int]]
    prop_subs: dict[int, frozenset[int]]
    prop_supers: dict[int, frozenset[int]]

    def subclasses_of(self, cls: int) -> frozenset[int]:
        return self.class_subs.get(cls, frozenset((cls,)))

    def superclasses_of(self, cls: int) -> frozenset[int]:
        return self.class_supers.get(cls, frozenset((cls,)))

    def subproperties_of(self, prop: int) -> frozenset[int]:
        return self.prop_subs.get(prop, frozenset((prop,)))

    def superproperties_of(self, prop: int) -> frozenset[int]:
        return self.prop_supers.get(prop, frozenset((prop,)))


def _reachable(edges: dict[int, set[int]], start: int) -> frozenset[int]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in edges.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


def _close(pairs: Sequence[tuple[int, int]]) -> tuple[dict, dict]:
    up: dict[int, set[int]] = {}
    down: dict[int, set[int]] = {}
    nodes: set[int] = set()
    for sub, sup in pairs:
        up.setdefault(sub, set()).add(sup)
        down.setdefault(sup, set()).add(sub)
        nodes.update((sub, sup))
    supers = {n: _reachable(up, n) for n in nodes}
    subs = {n: _reachable(down, n) for n in nodes}
    return subs, supers


def compute_closure(schema: RDFSchema) -> SchemaClosure:
    """Cycles are allowed and collapse into mutual containment."""
    class_subs, class_supers = _close(schema.subclass_pairs)
    prop_subs, prop_supers = _close(schema.subproperty_pairs)
    return SchemaClosure(class_subs, class_supers, prop_subs, prop_supers)


@dataclass(frozen=True)
class UnionQuery:
    """A query compiled against a schema: a union of conjunctive branches.

    Branches share the head and are duplicate-free under canonical
    form; the first branch is always the original query.  The weight is
    carried once for the whole union.
    """

    name: str
    head: tuple[str, ...]
    branches: tuple[ConjunctiveQuery, ...]
    weight: Fraction

    def __post_init__(self):
        assert self.branches, "a union query needs at least one branch"


def _type_atom_expansions(
    atom: TriplePattern, closure: SchemaClosure, schema: RDFSchema
) -> list[tuple]:
    cls = atom.o.tid
    wanted = closure.subclasses_of(cls)
    entries: list[tuple] = [("class", cls)]
    entries.extend(("class", c) for c in sorted(wanted - {cls}))
    dom_props: set[int] = set()
    for prop, declared in schema.domains.items():
        if declared in wanted:
            dom_props.update(closure.subproperties_of(prop))
    entries.extend(("dom", p) for p in sorted(dom_props))
    rng_props: set[int] = set()
    for prop, declared in schema.ranges.items():
        if declared in wanted:
            rng_props.update(closure.subproperties_of(prop))
    entries.extend(("rng", p) for p in sorted(rng_props))
    return entries


def _atom_expansions(
    atom: TriplePattern, closure: SchemaClosure, schema: RDFSchema
) -> list[tuple]:
    prop = atom.p.tid
    if (
        prop == schema.type_id
        and isinstance(atom.o, Const)
        and isinstance(atom.s, Var)
    ):
        return _type_atom_expansions(atom, closure, schema)
    subs = closure.subproperties_of(prop)
    entries: list[tuple] = [("sub", prop)]
    entries.extend(("sub", p) for p in sorted(subs - {prop}))
    return entries


def reformulate_query(
    query: ConjunctiveQuery,
    closure: SchemaClosure,
    schema: RDFSchema,
    cap: int = DEFAULT_BRANCH_CAP,
) -> UnionQuery:
    """Expand each atom by the schema and take the cross product.

    A type atom (x type C) expands to the subclasses of C plus the
    properties whose domain or range entails membership in one of them;
    the domain and range cases bind the other end to a fresh variable
    named _f<n>, numbered per branch.  Any other atom expands to the
    subproperties of its property.  The raw product size is checked
    against cap before enumeration; branches are then deduplicated
    under canonical form, keeping first occurrences.
    """
    if schema.is_empty():
        return UnionQuery(query.name, query.head, (query,), query.weight)

    expansions = [_atom_expansions(atom, closure, schema) for atom in query.body]
    required = 1
    for entry_list in expansions:
        required *= len(entry_list)
    if required > cap:
        raise BranchCapExceededError(required, cap)

    taken_names = set(query.variables())
    branches: list[ConjunctiveQuery] = []
    seen_keys: set[str] = set()
    for combo in itertools.product(*expansions):
        fresh_counter = itertools.count(1)

        def fresh_var() -> Var:
            while True:
                name = f"_f{next(fresh_counter)}"
                if name not in taken_names:
                    return Var(name)

        atoms: list[TriplePattern] = []
        for atom, entry in zip(query.body, combo):
            kind, value = entry
            if kind == "class":
                new_atom = TriplePattern(atom.s, Const(schema.type_id), Const(value))
            elif kind == "dom":
                new_atom = TriplePattern(atom.s, Const(value), fresh_var())
            elif kind == "rng":
                new_atom = TriplePattern(fresh_var(), Const(value), atom.s)
            else:
                new_atom = TriplePattern(atom.s, Const(value), atom.o)
            atoms.append(new_atom)
        body = tuple(dict.fromkeys(atoms))
        key = canonical_form(body, query.head)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        branches.append(
            ConjunctiveQuery(
                name=f"{query.name}#{len(branches) + 1}",
                head=query.head,
                body=body,
                weight=query.weight,
            )
        )
    return UnionQuery(query.name, query.head, tuple(branches), query.weight)


def reformulate_workload(
    workload: Workload,
    closure: SchemaClosure,
    schema: RDFSchema,
    cap: int = DEFAULT_BRANCH_CAP,
) -> tuple[UnionQuery, ...]:
    return tuple(
        reformulate_query(query, closure, schema, cap) for query in workload
    )


def saturate(
    table: TripleTable,
    schema: RDFSchema,
    closure: Optional[SchemaClosure] = None,
) -> TripleTable:
    """Materialize all entailed instance triples in one stratified pass.

    Subproperties are closed over the data first, then domain and range
    statements contribute type triples, then the subclass closure runs
    over all type triples.  For this fragment a single pass in that
    order reaches the fixpoint because no rule produces input for an
    earlier stratum.  Schema triples themselves are never added to the
    data.
    """
    if schema.is_empty() or schema.type_id is None:
        return table
    if closure is None:
        closure = compute_closure(schema)

    present = set(table.triples)
    derived: set[Triple] = set()

    def add(triple: Triple) -> None:
        if triple not in present:
            derived.add(triple)

    type_id = schema.type_id
    closed: list[Triple] = []
    for row in table.triples:
        closed.append(row)
        if row.p == type_id:
            continue
        for sup in closure.superproperties_of(row.p):
            if sup != row.p and sup != type_id:
                extra = Triple(row.s, sup, row.o)
                add(extra)
                closed.append(extra)

    type_facts: list[tuple[int, int]] = []
    for row in dict.fromkeys(closed):
        if row.p == type_id:
            type_facts.append((row.s, row.o))
            continue
        if row.p in schema.domains:
            fact = Triple(row.s, type_id, schema.domains[row.p])
            add(fact)
            type_facts.append((fact.s, fact.o))
        if row.p in schema.ranges:
            fact = Triple(row.o, type_id, schema.ranges[row.p])
            add(fact)
            type_facts.append((fact.s, fact.o))

    for node, cls in dict.fromkeys(type_facts):
        for sup in closure.superclasses_of(cls):
            if sup != cls:
                add(Triple(node, type_id, sup))

    if not derived:
        return table
    return TripleTable(tuple(table.triples) + tuple(sorted(derived)))
