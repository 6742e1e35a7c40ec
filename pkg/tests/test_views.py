"""States, rewriting plans, and the three state transitions."""

import pytest

from rdftuner.errors import (
    EmptyWorkloadError,
    InvalidSiteError,
    MissingViewError,
    NotApplicableError,
    NotIsomorphicError,
    PropertyCutDisabledError,
)
from rdftuner.queries import parse_body
from rdftuner.reasoner import RDFSchema, reformulate_workload
from rdftuner.views import (
    Join,
    Project,
    Scan,
    Select,
    State,
    TransitionDescriptor,
    UnionPlan,
    apply_transition,
    enumerate_transitions,
    export_state,
    initial_state,
    join_cut,
    make_view,
    plan_from_doc,
    plan_to_doc,
    plan_view_ids,
    selection_cut,
    state_from_doc,
    state_signature,
    view_fusion,
)


@pytest.fixture
def plain_state(w1):
    """Initial state of the reference workload without any schema."""
    return initial_state(reformulate_workload(w1, None, RDFSchema()))


def body_terms(view):
    return [(a.s, a.p, a.o) for a in view.body]


def pattern_of(text, dictionary):
    return parse_body(text, dictionary)


# --- initial state -------------------------------------------------------


def test_initial_state_without_schema(plain_state, d1):
    dictionary, _, _ = d1
    assert [v.id for v in plain_state.views] == ["v_q1", "v_q2"]
    v_q1 = plain_state.view_by_id("v_q1")
    assert v_q1.body == pattern_of(
        "{ ?x <advisor> ?y . ?y <type> <Professor> . }", dictionary
    )
    assert v_q1.head == ("x", "y")
    v_q2 = plain_state.view_by_id("v_q2")
    assert v_q2.body == pattern_of("{ ?x <advisor> <b> . }", dictionary)
    assert v_q2.head == ("x",)
    # Single-branch queries collapse to a bare projected scan.
    assert plain_state.rewritings["q1"] == Project(Scan("v_q1", ("x", "y")), ("x", "y"))
    assert plain_state.rewritings["q2"] == Project(Scan("v_q2", ("x",)), ("x",))


def test_initial_state_with_schema_keeps_one_view_per_branch(s0, d1):
    dictionary, _, _ = d1
    assert [v.id for v in s0.views] == ["v_q1_1", "v_q1_2", "v_q2"]
    # Branch 2 of q1 comes from expanding the Professor typing through
    # the advisor range declaration.
    v12 = s0.view_by_id("v_q1_2")
    assert v12.body == pattern_of(
        "{ ?x <advisor> ?y . ?_f1 <advisor> ?y . }", dictionary
    )
    assert v12.head == ("x", "_f1", "y")
    plan = s0.rewritings["q1"]
    assert isinstance(plan, UnionPlan)
    assert plan.children == (
        Project(Scan("v_q1_1", ("x", "y")), ("x", "y")),
        Project(Scan("v_q1_2", ("x", "_f1", "y")), ("x", "y")),
    )
    assert s0.rewritings["q2"] == Project(Scan("v_q2", ("x",)), ("x",))


def test_initial_state_shares_isomorphic_branch_bodies(d1, w1, s1):
    # Both q1 branches of the reference reformulation are distinct, but a
    # workload whose queries have equal bodies up to renaming must share
    # one view, each scan renaming its columns positionally.
    from fractions import Fraction

    from rdftuner.queries import Workload, parse_sparql

    dictionary, _, _ = d1
    qa = parse_sparql(
        "SELECT ?x ?y WHERE { ?x <advisor> ?y . }", dictionary, name="qa"
    )
    qb = parse_sparql(
        "SELECT ?u ?w WHERE { ?u <advisor> ?w . }", dictionary, name="qb"
    )
    state = initial_state(
        reformulate_workload(Workload((qa, qb)), None, RDFSchema())
    )
    assert [v.id for v in state.views] == ["v_qa"]
    assert state.rewritings["qa"] == Project(Scan("v_qa", ("x", "y")), ("x", "y"))
    assert state.rewritings["qb"] == Project(Scan("v_qa", ("u", "w")), ("u", "w"))


def test_initial_state_rejects_empty_workload():
    with pytest.raises(EmptyWorkloadError):
        initial_state(())


def test_view_lookup_reports_missing_ids(plain_state):
    with pytest.raises(MissingViewError) as err:
        plain_state.view_by_id("nope")
    assert err.value.code == "missing-view"


# --- selection cut -------------------------------------------------------


def test_selection_cut_relaxes_constant_site(plain_state, d1):
    dictionary, _, _ = d1
    cut = selection_cut(plain_state, "v_q1", 1, "o")
    assert [v.id for v in cut.views] == ["v_q2", "v_q1_c1o"]
    relaxed = cut.view_by_id("v_q1_c1o")
    assert relaxed.body == pattern_of(
        "{ ?y <type> ?f . ?x <advisor> ?y . }", dictionary
    )
    assert relaxed.head == ("f", "y", "x")
    # The scan is compensated by a selection on the fresh column and a
    # projection back onto the original columns; 6 is the Professor id.
    assert cut.rewritings["q1"] == Project(
        Project(
            Select(Scan("v_q1_c1o", ("f", "y", "x")), "f", 6),
            ("x", "y"),
        ),
        ("x", "y"),
    )
    assert cut.rewritings["q2"] == plain_state.rewritings["q2"]


def test_selection_cut_reuses_isomorphic_existing_view(d1):
    dictionary, _, _ = d1
    vg = make_view("vg", pattern_of("{ ?x <advisor> ?y . }", dictionary))
    vq2 = make_view("vq2", pattern_of("{ ?x <advisor> <b> . }", dictionary))
    state = State(
        views=(vg, vq2),
        rewritings={
            "qa": Project(Scan("vg", ("x", "y")), ("x",)),
            "qb": Project(Scan("vq2", ("x",)), ("x",)),
        },
    )
    cut = selection_cut(state, "vq2", 0, "o")
    # Relaxing the constant makes vq2 isomorphic to vg, so no new view
    # appears; 5 is the id of the dropped constant b.
    assert [v.id for v in cut.views] == ["vg"]
    assert cut.rewritings["qb"] == Project(
        Project(Select(Scan("vg", ("x", "f")), "f", 5), ("x",)), ("x",)
    )


def test_selection_cut_fresh_variable_avoids_collision(d1):
    dictionary, _, _ = d1
    vf = make_view("vf", pattern_of("{ ?f <advisor> <b> . }", dictionary))
    state = State(views=(vf,), rewritings={"q": Project(Scan("vf", ("f",)), ("f",))})
    cut = selection_cut(state, "vf", 0, "o")
    relaxed = cut.view_by_id("vf_c0o")
    assert relaxed.body == pattern_of("{ ?f <advisor> ?f2 . }", dictionary)
    assert cut.rewritings["q"] == Project(
        Project(Select(Scan("vf_c0o", ("f", "f2")), "f2", 5), ("f",)), ("f",)
    )


@pytest.mark.parametrize(
    "view_id, atom, position",
    [
        ("nope", 0, "o"),  # unknown view
        ("v_q1", 7, "o"),  # atom index out of range
        ("v_q1", 0, "x"),  # not one of s, p, o
        ("v_q1", 0, "s"),  # the site holds a variable
    ],
)
def test_selection_cut_rejects_invalid_sites(plain_state, view_id, atom, position):
    with pytest.raises(InvalidSiteError):
        selection_cut(plain_state, view_id, atom, position)


def test_property_cuts_are_opt_in(plain_state, d1):
    dictionary, _, _ = d1
    with pytest.raises(PropertyCutDisabledError):
        selection_cut(plain_state, "v_q2", 0, "p")
    cut = selection_cut(plain_state, "v_q2", 0, "p", allow_property_cuts=True)
    relaxed = cut.view_by_id("v_q2_c0p")
    assert relaxed.body == pattern_of("{ ?x ?f <b> . }", dictionary)
    # 4 is the advisor id the selection must restore.
    assert cut.rewritings["q2"] == Project(
        Project(Select(Scan("v_q2_c0p", ("x", "f")), "f", 4), ("x",)), ("x",)
    )


# --- join cut ------------------------------------------------------------


def test_join_cut_splits_at_join_variable(plain_state, d1):
    dictionary, _, _ = d1
    cut = join_cut(plain_state, "v_q1", "y")
    assert [v.id for v in cut.views] == ["v_q2", "v_q1a", "v_q1b"]
    part_a = cut.view_by_id("v_q1a")
    part_b = cut.view_by_id("v_q1b")
    # Each component renames the cut variable with its own suffix.
    assert part_a.body == pattern_of("{ ?x <advisor> ?y_1 . }", dictionary)
    assert part_a.head == ("x", "y_1")
    assert part_b.body == pattern_of("{ ?y_2 <type> <Professor> . }", dictionary)
    assert part_b.head == ("y_2",)
    assert cut.rewritings["q1"] == Project(
        Project(
            Join(
                Scan("v_q1a", ("x", "y")),
                Scan("v_q1b", ("y_2",)),
                (("y", "y_2"),),
            ),
            ("x", "y"),
        ),
        ("x", "y"),
    )


def test_join_cut_requires_a_variable_joining_two_atoms(plain_state):
    with pytest.raises(NotApplicableError):
        join_cut(plain_state, "v_q1", "x")  # occurs in a single atom


def test_join_cut_requires_the_cut_to_disconnect(d1):
    dictionary, _, _ = d1
    triangle = make_view(
        "vt",
        pattern_of(
            "{ ?x <advisor> ?y . ?y <advisor> ?z . ?x <name> ?z . }", dictionary
        ),
    )
    state = State(
        views=(triangle,),
        rewritings={"q": Project(Scan("vt", triangle.head), ("x",))},
    )
    with pytest.raises(NotApplicableError):
        join_cut(state, "vt", "y")


def test_join_cut_shifts_suffixes_past_taken_names(d1):
    dictionary, _, _ = d1
    view = make_view(
        "v3",
        pattern_of(
            "{ ?x <advisor> ?y . ?y <type> <Professor> . ?x <name> ?y_1 . }",
            dictionary,
        ),
    )
    state = State(
        views=(view,), rewritings={"q": Project(Scan("v3", view.head), ("x",))}
    )
    cut = join_cut(state, "v3", "y")
    part_a = cut.view_by_id("v3a")
    part_b = cut.view_by_id("v3b")
    # y_1 is taken by the body, so the component renames skip to y_3, y_4.
    assert part_a.body == pattern_of(
        "{ ?x <advisor> ?y_3 . ?x <name> ?y_1 . }", dictionary
    )
    assert part_b.body == pattern_of("{ ?y_4 <type> <Professor> . }", dictionary)
    join = cut.rewritings["q"].child.child
    assert join.on == (("y", "y_4"),)


# --- view fusion ---------------------------------------------------------


def fusion_pair(dictionary):
    va = make_view("va", parse_body("{ ?x <advisor> ?y . }", dictionary))
    vb = make_view("vb", parse_body("{ ?u <advisor> ?w . }", dictionary))
    return State(
        views=(va, vb),
        rewritings={
            "qa": Project(Scan("va", ("x", "y")), ("x", "y")),
            "qb": Project(Scan("vb", ("u", "w")), ("u", "w")),
        },
    )


def test_view_fusion_redirects_scans(d1):
    dictionary, _, _ = d1
    state = fusion_pair(dictionary)
    fused = view_fusion(state, "va", "vb")
    assert [v.id for v in fused.views] == ["va"]
    # The redirected scan keeps its column list: canonical heads line up.
    assert fused.rewritings["qa"] == state.rewritings["qa"]
    assert fused.rewritings["qb"] == Project(Scan("va", ("u", "w")), ("u", "w"))


def test_view_fusion_rejects_self_and_non_isomorphic(d1, plain_state):
    dictionary, _, _ = d1
    state = fusion_pair(dictionary)
    with pytest.raises(NotIsomorphicError):
        view_fusion(state, "va", "va")
    with pytest.raises(NotIsomorphicError):
        view_fusion(plain_state, "v_q1", "v_q2")


# --- enumeration and dispatch --------------------------------------------


def test_enumerate_transitions_lists_each_valid_site(plain_state):
    docs = [d.to_doc() for d in enumerate_transitions(plain_state)]
    assert docs == [
        {"kind": "selection-cut", "view": "v_q1", "atom": 1, "position": "o"},
        {"kind": "selection-cut", "view": "v_q2", "atom": 0, "position": "o"},
        {"kind": "join-cut", "view": "v_q1", "variable": "y"},
    ]


def test_enumerate_transitions_includes_property_sites_when_enabled(plain_state):
    docs = [
        d.to_doc()
        for d in enumerate_transitions(plain_state, allow_property_cuts=True)
    ]
    assert docs == [
        {"kind": "selection-cut", "view": "v_q1", "atom": 0, "position": "p"},
        {"kind": "selection-cut", "view": "v_q1", "atom": 1, "position": "o"},
        {"kind": "selection-cut", "view": "v_q1", "atom": 1, "position": "p"},
        {"kind": "selection-cut", "view": "v_q2", "atom": 0, "position": "o"},
        {"kind": "selection-cut", "view": "v_q2", "atom": 0, "position": "p"},
        {"kind": "join-cut", "view": "v_q1", "variable": "y"},
    ]


def test_enumerate_transitions_reports_fusions_for_isomorphic_pairs(d1):
    dictionary, _, _ = d1
    docs = [d.to_doc() for d in enumerate_transitions(fusion_pair(dictionary))]
    assert docs == [{"kind": "view-fusion", "view": "va", "other": "vb"}]


def test_fully_relaxed_state_has_no_transitions(d1, w1):
    from rdftuner.queries import Workload

    dictionary, _, _ = d1
    state = initial_state(
        reformulate_workload(Workload((w1.by_name("q2"),)), None, RDFSchema())
    )
    (only,) = enumerate_transitions(state)
    relaxed = apply_transition(state, only)
    assert [v.id for v in relaxed.views] == ["v_q2_c0o"]
    assert enumerate_transitions(relaxed) == []


def test_apply_transition_rejects_unknown_kinds(plain_state):
    with pytest.raises(ValueError):
        apply_transition(
            plain_state, TransitionDescriptor(kind="teleport", view_id="v_q1")
        )


def test_cut_order_does_not_change_the_signature(plain_state):
    sc_first = selection_cut(plain_state, "v_q1", 1, "o")
    both_a = join_cut(sc_first, "v_q1_c1o", "y")
    jc_first = join_cut(plain_state, "v_q1", "y")
    both_b = selection_cut(jc_first, "v_q1b", 0, "o")
    assert sorted(v.id for v in both_a.views) != sorted(v.id for v in both_b.views)
    assert state_signature(both_a) == state_signature(both_b)


def test_signature_ignores_ids_and_rewritings(d1, plain_state):
    dictionary, _, _ = d1
    renamed = State(
        views=tuple(
            make_view(f"other_{i}", v.body) for i, v in enumerate(plain_state.views)
        ),
        rewritings={},
    )
    assert state_signature(renamed) == state_signature(plain_state)


def test_states_never_hold_orphan_or_dangling_views(s0):
    frontier = [s0]
    seen = set()
    for _ in range(2):
        produced = []
        for state in frontier:
            ids = {v.id for v in state.views}
            assert state.referenced_ids() == ids
            for descriptor in enumerate_transitions(state):
                child = apply_transition(state, descriptor)
                signature = state_signature(child)
                if signature not in seen:
                    seen.add(signature)
                    produced.append(child)
        frontier = produced
    assert seen  # the sweep actually explored something


# --- serialization -------------------------------------------------------


def test_plan_docs_round_trip(plain_state):
    cut = join_cut(plain_state, "v_q1", "y")
    for plan in cut.rewritings.values():
        assert plan_from_doc(plan_to_doc(plan)) == plan


def test_state_export_round_trips_through_docs(s0, d1):
    dictionary, _, _ = d1
    exported = export_state(s0, dictionary)
    rebuilt = state_from_doc(exported, dictionary)
    assert state_signature(rebuilt) == state_signature(s0)
    assert [v.id for v in rebuilt.views] == [v.id for v in s0.views]
    assert rebuilt.rewritings == s0.rewritings


def test_exported_views_use_readable_terms(s0, d1):
    dictionary, _, _ = d1
    exported = export_state(s0, dictionary)
    entry = next(v for v in exported["views"] if v["name"] == "v_q2")
    assert entry["body"] == "{ ?x <advisor> <b> . }"
    assert entry["head"] == ["x"]


def test_plan_view_ids_collects_every_scan(s0):
    assert plan_view_ids(s0.rewritings["q1"]) == {"v_q1_1", "v_q1_2"}
    assert plan_view_ids(s0.rewritings["q2"]) == {"v_q2"}
