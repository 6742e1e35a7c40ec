"""Schema parsing, closure, reformulation, and the saturation oracle."""

import random

import pytest

from rdftuner.errors import BranchCapExceededError, SchemaError
from rdftuner.queries import (
    Const,
    TriplePattern,
    Var,
    canonical_form,
    parse_sparql,
)
from rdftuner.reasoner import (
    RDFSchema,
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_query,
    saturate,
)
from rdftuner.store import Dictionary, Triple, TripleTable, iri, load_dataset, parse_ntriples

from conftest import SHORT_VOCAB
from generators import make_dataset, make_schema


def test_reference_schema_counts(s1):
    schema, _ = s1
    assert len(schema.subclass_pairs) == 2
    assert len(schema.subproperty_pairs) == 0
    assert len(schema.domains) == 1
    assert len(schema.ranges) == 1
    assert schema.ignored == 0
    assert not schema.is_empty()


def test_schema_ignores_foreign_properties(d1, vocab):
    dictionary, _, _ = d1
    stmts = parse_ntriples("<a> <advisor> <b> .\n<Student> <subClassOf> <Person> .\n")
    schema = parse_schema(stmts, dictionary, vocab)
    assert schema.ignored == 1
    assert len(schema.subclass_pairs) == 1


def test_schema_rejects_conflicting_domain(d1, vocab):
    dictionary, _, _ = d1
    stmts = parse_ntriples(
        "<advisor> <domain> <Student> .\n<advisor> <domain> <Person> .\n"
    )
    with pytest.raises(SchemaError) as err:
        parse_schema(stmts, dictionary, vocab)
    assert "advisor" in str(err.value)


def test_schema_repeated_identical_domain_is_fine(d1, vocab):
    dictionary, _, _ = d1
    stmts = parse_ntriples(
        "<advisor> <domain> <Student> .\n<advisor> <domain> <Student> .\n"
    )
    schema = parse_schema(stmts, dictionary, vocab)
    assert len(schema.domains) == 1


def test_schema_rejects_literals_and_reserved_vocabulary(d1, vocab):
    dictionary, _, _ = d1
    with pytest.raises(SchemaError):
        parse_schema(parse_ntriples('<p> <domain> "Student" .'), dictionary, vocab)
    with pytest.raises(SchemaError):
        parse_schema(parse_ntriples("<type> <subClassOf> <Person> ."), dictionary, vocab)


def test_closure_reference_schema(d1, s1):
    dictionary, _, _ = d1
    schema, closure = s1
    student = dictionary.id_of(iri("Student"))
    professor = dictionary.id_of(iri("Professor"))
    person = dictionary.id_of(iri("Person"))
    assert closure.subclasses_of(person) == {person, student, professor}
    assert closure.superclasses_of(student) == {student, person}
    assert closure.subclasses_of(student) == {student}
    # properties unknown to the schema close reflexively
    assert closure.subproperties_of(12345) == {12345}


def test_closure_chain_and_cycle():
    d = Dictionary()
    vocab = SHORT_VOCAB
    chain = parse_schema(
        parse_ntriples("<A> <subClassOf> <B> .\n<B> <subClassOf> <C> .\n"), d, vocab
    )
    cl = compute_closure(chain)
    a, b, c = d.id_of(iri("A")), d.id_of(iri("B")), d.id_of(iri("C"))
    assert c in cl.superclasses_of(a)
    cyc = parse_schema(
        parse_ntriples("<X> <subClassOf> <Y> .\n<Y> <subClassOf> <X> .\n"), d, vocab
    )
    cl = compute_closure(cyc)
    x, y = d.id_of(iri("X")), d.id_of(iri("Y"))
    assert cl.subclasses_of(x) == {x, y}
    assert cl.subclasses_of(y) == {x, y}


def _branch_bodies(union, dictionary):
    out = []
    for branch in union.branches:
        rendered = []
        for a in branch.body:
            def name(t):
                if isinstance(t, Var):
                    return f"?{t.name}"
                return dictionary.term_of(t.tid).lexical
            rendered.append((name(a.s), name(a.p), name(a.o)))
        out.append(tuple(rendered))
    return out


def test_person_query_expands_to_five_branches(d1, s1):
    dictionary, _, _ = d1
    schema, closure = s1
    q = parse_sparql("SELECT ?x WHERE { ?x <type> <Person> }", dictionary, name="qp")
    union = reformulate_query(q, closure, schema)
    bodies = _branch_bodies(union, dictionary)
    assert bodies[0] == (("?x", "type", "Person"),)  # identity branch first
    assert set(bodies) == {
        (("?x", "type", "Person"),),
        (("?x", "type", "Student"),),
        (("?x", "type", "Professor"),),
        (("?x", "advisor", "?_f1"),),
        (("?_f1", "advisor", "?x"),),
    }
    assert [b.name for b in union.branches] == [f"qp#{i}" for i in range(1, 6)]
    assert union.head == ("x",)
    assert union.weight == q.weight


def test_join_query_expands_via_range(d1, s1, w1):
    dictionary, _, _ = d1
    schema, closure = s1
    union = reformulate_query(w1.by_name("q1"), closure, schema)
    bodies = _branch_bodies(union, dictionary)
    assert len(bodies) == 2
    assert bodies[0] == (("?x", "advisor", "?y"), ("?y", "type", "Professor"))
    assert bodies[1] == (("?x", "advisor", "?y"), ("?_f1", "advisor", "?y"))


def test_empty_schema_reformulation_is_identity(d1, w1):
    union = reformulate_query(w1.by_name("q1"), None, RDFSchema())
    assert len(union.branches) == 1
    assert union.branches[0].body == w1.by_name("q1").body


def test_subproperty_expansion_covers_domain_branches():
    d = Dictionary()
    schema = parse_schema(
        parse_ntriples(
            "<headOf> <subPropertyOf> <worksFor> .\n<worksFor> <domain> <Emp> .\n"
        ),
        d,
        SHORT_VOCAB,
    )
    closure = compute_closure(schema)
    q = parse_sparql("SELECT ?x WHERE { ?x <type> <Emp> }", d, name="q")
    union = reformulate_query(q, closure, schema)
    rendered = _branch_bodies(union, d)
    assert (("?x", "worksFor", "?_f1"),) in rendered
    assert (("?x", "headOf", "?_f1"),) in rendered
    qa = parse_sparql("SELECT ?x ?y WHERE { ?x <worksFor> ?y }", d, name="qa")
    union = reformulate_query(qa, closure, schema)
    rendered = _branch_bodies(union, d)
    assert rendered == [(("?x", "worksFor", "?y"),), (("?x", "headOf", "?y"),)]


def test_fresh_variables_skip_taken_names(d1, s1):
    dictionary, _, _ = d1
    schema, closure = s1
    q = parse_sparql("SELECT ?_f1 WHERE { ?_f1 <type> <Person> }", dictionary, name="q")
    union = reformulate_query(q, closure, schema)
    for branch in union.branches:
        names = [v for a in branch.body for v in a.variables()]
        assert "_f1" in names  # the head variable survives everywhere
        for a in branch.body:
            if isinstance(a.p, Const) and dictionary.term_of(a.p.tid).lexical == "advisor":
                other = {n for n in a.variables() if n != "_f1"}
                assert other and other != {"_f1"}


def test_branch_cap_reports_required_count(d1, s1):
    dictionary, _, _ = d1
    schema, closure = s1
    q = parse_sparql(
        "SELECT ?x WHERE { ?x <type> <Person> . ?x <type> <Student> . ?x <type> <Professor> }",
        dictionary,
        name="big",
    )
    with pytest.raises(BranchCapExceededError) as err:
        reformulate_query(q, closure, schema, cap=5)
    assert err.value.required == 20  # 5 x 2 x 2 raw product
    assert err.value.cap == 5


def test_branches_are_deduplicated_under_canonical_form():
    d = Dictionary()
    schema = parse_schema(
        parse_ntriples("<p> <subPropertyOf> <q> .\n<q> <subPropertyOf> <p> .\n"),
        d,
        SHORT_VOCAB,
    )
    closure = compute_closure(schema)
    q = parse_sparql("SELECT ?x WHERE { ?x <p> ?y . ?y <q> ?z }", d, name="q")
    union = reformulate_query(q, closure, schema)
    keys = {canonical_form(b.body, b.head) for b in union.branches}
    assert len(keys) == len(union.branches)
    assert len(union.branches) == 4  # 2x2 raw product, no collisions here


def test_saturate_reference_fixture_adds_exactly_four(d1, s1):
    dictionary, table, _ = d1
    schema, closure = s1
    sat = saturate(table, schema, closure)
    assert len(sat) == 10
    assert sat.triples[:6] == table.triples  # original order preserved up front
    ids = {t.lexical: i for i, t in ((i, dictionary.term_of(i)) for i in range(1, len(dictionary) + 1))}
    added = set(sat.triples[6:])
    expect = {
        Triple(ids["a"], ids["type"], ids["Person"]),
        Triple(ids["b"], ids["type"], ids["Person"]),
        Triple(ids["c"], ids["type"], ids["Student"]),
        Triple(ids["c"], ids["type"], ids["Person"]),
    }
    assert added == expect


def test_saturate_single_triple_derives_both_typings(d1, s1, vocab):
    dictionary, _, _ = d1
    schema, closure = s1
    _, table, _ = load_dataset(parse_ntriples("<a> <advisor> <b> ."), dictionary)
    sat = saturate(table, schema, closure)
    ids = {dictionary.term_of(i).lexical: i for i in range(1, len(dictionary) + 1)}
    derived = set(sat.triples) - set(table.triples)
    assert derived == {
        Triple(ids["a"], ids["type"], ids["Student"]),
        Triple(ids["b"], ids["type"], ids["Professor"]),
        Triple(ids["a"], ids["type"], ids["Person"]),
        Triple(ids["b"], ids["type"], ids["Person"]),
    }


def test_saturate_empty_schema_is_identity(d1):
    _, table, _ = d1
    assert saturate(table, RDFSchema()) is table


def test_saturate_is_idempotent_on_random_instances():
    rng = random.Random(7)
    for _ in range(25):
        d = Dictionary()
        data = parse_ntriples(make_dataset(rng, 120))
        schema = parse_schema(parse_ntriples(make_schema(rng)), d, SHORT_VOCAB)
        closure = compute_closure(schema)
        _, table, _ = load_dataset(data, d)
        once = saturate(table, schema, closure)
        twice = saturate(once, schema, closure)
        assert set(twice.triples) == set(once.triples)
        assert set(table.triples) <= set(once.triples)
