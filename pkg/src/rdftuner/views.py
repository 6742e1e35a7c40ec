"""Search states: candidate view sets plus rewritings for each query.

A state pairs a set of full-head views with one rewriting plan per
workload query.  Three transitions produce new states: selection cut
(replace a constant by a fresh variable, compensated by a selection),
join cut (split a view at a join variable, compensated by a join), and
view fusion (merge two views identical up to renaming).  Every
transition patches all affected rewritings so that each state answers
the whole workload from its own views only.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union as TUnion

from .errors import (
    EmptyWorkloadError,
    InvalidSiteError,
    MissingViewError,
    NotApplicableError,
    NotIsomorphicError,
    PropertyCutDisabledError,
)
from .queries import (
    Const,
    TriplePattern,
    Var,
    canonize,
    format_body,
    parse_body,
    pattern_vars,
)
from .reasoner import UnionQuery
from .store import Dictionary

_POSITIONS = ("s", "p", "o")


@dataclass(frozen=True)
class View:
    """A materialization candidate: a connected body with a full head.

    The body is stored in canonical atom order and the head lists all
    body variables in canonical variable order, so sites and column
    positions are stable and renaming-invariant.  key is the canonical
    form; two views are isomorphic exactly when their keys match.
    """

    id: str
    body: tuple[TriplePattern, ...]
    head: tuple[str, ...]
    key: str


def make_view(view_id: str, body: Sequence[TriplePattern]) -> View:
    canon = canonize(tuple(body), None)
    return View(id=view_id, body=canon.atoms, head=canon.var_order, key=canon.key)


@dataclass(frozen=True)
class Scan:
    """Read a view, renaming its head columns positionally.

    columns[i] is the plan-local name for head position i; this is the
    one place plans rename, which keeps Project a pure column filter.
    """

    view_id: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class Select:
    child: "Plan"
    column: str
    value: int


@dataclass(frozen=True)
class Join:
    left: "Plan"
    right: "Plan"
    on: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Project:
    child: "Plan"
    columns: tuple[str, ...]


@dataclass(frozen=True)
class UnionPlan:
    children: tuple["Plan", ...]


Plan = TUnion[Scan, Select, Join, Project, UnionPlan]


def plan_columns(plan: Plan) -> tuple[str, ...]:
    if isinstance(plan, Scan):
        return plan.columns
    if isinstance(plan, Select):
        return plan_columns(plan.child)
    if isinstance(plan, Join):
        return plan_columns(plan.left) + plan_columns(plan.right)
    if isinstance(plan, Project):
        return plan.columns
    return plan_columns(plan.children[0])


def plan_view_ids(plan: Plan) -> set[str]:
    if isinstance(plan, Scan):
        return {plan.view_id}
    if isinstance(plan, Select):
        return plan_view_ids(plan.child)
    if isinstance(plan, Join):
        return plan_view_ids(plan.left) | plan_view_ids(plan.right)
    if isinstance(plan, Project):
        return plan_view_ids(plan.child)
    ids: set[str] = set()
    for child in plan.children:
        ids |= plan_view_ids(child)
    return ids


def plan_to_doc(plan: Plan) -> dict:
    if isinstance(plan, Scan):
        return {"op": "scan", "view": plan.view_id, "columns": list(plan.columns)}
    if isinstance(plan, Select):
        return {
            "op": "select",
            "column": plan.column,
            "value": plan.value,
            "child": plan_to_doc(plan.child),
        }
    if isinstance(plan, Join):
        return {
            "op": "join",
            "on": [list(pair) for pair in plan.on],
            "left": plan_to_doc(plan.left),
            "right": plan_to_doc(plan.right),
        }
    if isinstance(plan, Project):
        return {
            "op": "project",
            "columns": list(plan.columns),
            "child": plan_to_doc(plan.child),
        }
    return {"op": "union", "children": [plan_to_doc(c) for c in plan.children]}


def plan_from_doc(doc: dict) -> Plan:
    op = doc["op"]
    if op == "scan":
        return Scan(doc["view"], tuple(doc["columns"]))
    if op == "select":
        return Select(plan_from_doc(doc["child"]), doc["column"], doc["value"])
    if op == "join":
        return Join(
            plan_from_doc(doc["left"]),
            plan_from_doc(doc["right"]),
            tuple((l, r) for l, r in doc["on"]),
        )
    if op == "project":
        return Project(plan_from_doc(doc["child"]), tuple(doc["columns"]))
    if op == "union":
        return UnionPlan(tuple(plan_from_doc(c) for c in doc["children"]))
    raise ValueError(f"unknown plan op {op!r}")


@dataclass(frozen=True)
class State:
    """An immutable pair of views and per-query rewriting plans."""

    views: tuple[View, ...]
    rewritings: dict[str, Plan]

    def view_by_id(self, view_id: str) -> View:
        for view in self.views:
            if view.id == view_id:
                return view
        raise MissingViewError(view_id)

    def referenced_ids(self) -> set[str]:
        ids: set[str] = set()
        for plan in self.rewritings.values():
            ids |= plan_view_ids(plan)
        return ids


@dataclass(frozen=True)
class TransitionDescriptor:
    """Addresses one transition application in a source state."""

    kind: str
    view_id: str
    atom_index: Optional[int] = None
    position: Optional[str] = None
    variable: Optional[str] = None
    other_view_id: Optional[str] = None

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind, "view": self.view_id}
        if self.kind == "selection-cut":
            doc["atom"] = self.atom_index
            doc["position"] = self.position
        elif self.kind == "join-cut":
            doc["variable"] = self.variable
        elif self.kind == "view-fusion":
            doc["other"] = self.other_view_id
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "TransitionDescriptor":
        return TransitionDescriptor(
            kind=doc["kind"],
            view_id=doc["view"],
            atom_index=doc.get("atom"),
            position=doc.get("position"),
            variable=doc.get("variable"),
            other_view_id=doc.get("other"),
        )


def state_signature(state: State) -> str:
    """Equal exactly when the view sets match under per-view canonical
    form; ids and rewritings are excluded from state identity."""
    material = "\n".join(sorted(view.key for view in state.views))
    return hashlib.sha256(material.encode()).hexdigest()


# --- initial state -------------------------------------------------------

def _branch_scan_columns(branch_body: Sequence[TriplePattern]) -> tuple[str, ...]:
    # The branch's own variables in canonical order line up positionally
    # with the head of any view sharing the branch's canonical key.
    return canonize(tuple(branch_body), None).var_order


def initial_state(unions: Sequence[UnionQuery]) -> State:
    """Materialize exactly the reformulated workload.

    One view per distinct branch body (deduplicated across queries
    under canonical form); each query is rewritten as the union of
    projected scans of its branch views, collapsing single-branch
    unions to the bare projection.
    """
    if not unions:
        raise EmptyWorkloadError("cannot build a state for an empty workload")
    views: list[View] = []
    by_key: dict[str, View] = {}
    rewritings: dict[str, Plan] = {}
    for union in unions:
        children: list[Plan] = []
        for index, branch in enumerate(union.branches, start=1):
            columns = _branch_scan_columns(branch.body)
            canon = canonize(branch.body, None)
            view = by_key.get(canon.key)
            if view is None:
                if len(union.branches) == 1:
                    view_id = f"v_{union.name}"
                else:
                    view_id = f"v_{union.name}_{index}"
                view = View(
                    id=view_id, body=canon.atoms, head=canon.var_order, key=canon.key
                )
                by_key[canon.key] = view
                views.append(view)
            children.append(Project(Scan(view.id, columns), union.head))
        if len(children) == 1:
            rewritings[union.name] = children[0]
        else:
            rewritings[union.name] = UnionPlan(tuple(children))
    return State(views=tuple(views), rewritings=rewritings)


# --- rewriting surgery ---------------------------------------------------

def _replace_scans(plan: Plan, view_id: str, rebuild) -> Plan:
    if isinstance(plan, Scan):
        if plan.view_id == view_id:
            return rebuild(plan)
        return plan
    if isinstance(plan, Select):
        return Select(_replace_scans(plan.child, view_id, rebuild), plan.column, plan.value)
    if isinstance(plan, Join):
        return Join(
            _replace_scans(plan.left, view_id, rebuild),
            _replace_scans(plan.right, view_id, rebuild),
            plan.on,
        )
    if isinstance(plan, Project):
        return Project(_replace_scans(plan.child, view_id, rebuild), plan.columns)
    return UnionPlan(
        tuple(_replace_scans(c, view_id, rebuild) for c in plan.children)
    )


def _patch_state(
    state: State, removed: View, added: Sequence[View], rebuild
) -> State:
    """Replace scans of `removed`, dropping it and adding the views in
    `added` that survive key dedup against the remaining views."""
    keep = [v for v in state.views if v.id != removed.id]
    existing = {v.key: v for v in keep}
    appended: list[View] = []
    resolved: dict[str, View] = {}
    for view in added:
        target = existing.get(view.key)
        if target is None:
            existing[view.key] = view
            appended.append(view)
            target = view
        resolved[view.id] = target
    rewritings = {
        name: _replace_scans(plan, removed.id, lambda scan: rebuild(scan, resolved))
        for name, plan in state.rewritings.items()
    }
    new_state = State(views=tuple(keep + appended), rewritings=rewritings)
    referenced = new_state.referenced_ids()
    final_views = tuple(v for v in new_state.views if v.id in referenced)
    return State(views=final_views, rewritings=rewritings)


def _fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    index = 2
    while f"{base}{index}" in taken:
        index += 1
    return f"{base}{index}"


# --- selection cut -------------------------------------------------------

def selection_cut(
    state: State,
    view_id: str,
    atom_index: int,
    position: str,
    allow_property_cuts: bool = False,
) -> State:
    """Replace one constant occurrence with a fresh head variable.

    Every scan of the cut view becomes a projected selection over the
    relaxed view, restoring the original columns; the relaxed view is
    reused when it is isomorphic to an existing one.
    """
    view = None
    for candidate in state.views:
        if candidate.id == view_id:
            view = candidate
    if view is None:
        raise InvalidSiteError(f"no view named {view_id!r} in this state")
    if not 0 <= atom_index < len(view.body):
        raise InvalidSiteError(f"atom index {atom_index} out of range for {view_id}")
    if position not in _POSITIONS:
        raise InvalidSiteError(f"position must be one of s, p, o, not {position!r}")
    if position == "p" and not allow_property_cuts:
        raise PropertyCutDisabledError(
            "property-position cuts are disabled; enable allow_property_cuts"
        )
    atom = view.body[atom_index]
    term = getattr(atom, position)
    if not isinstance(term, Const):
        raise InvalidSiteError(
            f"site ({view_id}, {atom_index}, {position}) holds a variable, not a constant"
        )

    fresh = _fresh_name("f", pattern_vars(view.body))
    patched_atom = atom._replace(**{position: Var(fresh)})
    new_body = tuple(
        patched_atom if i == atom_index else a for i, a in enumerate(view.body)
    )
    relaxed = make_view(f"{view_id}_c{atom_index}{position}", new_body)
    constant = term.tid

    def rebuild(scan: Scan, resolved: dict[str, View]) -> Plan:
        target = resolved[relaxed.id]
        local = dict(zip(view.head, scan.columns))
        fresh_col = _fresh_name("f", scan.columns)
        columns = tuple(
            fresh_col if name == fresh else local[name] for name in relaxed.head
        )
        return Project(
            Select(Scan(target.id, columns), fresh_col, constant), scan.columns
        )

    return _patch_state(state, view, [relaxed], rebuild)


# --- join cut ------------------------------------------------------------

def _components_without(
    body: Sequence[TriplePattern], variable: str
) -> list[list[int]]:
    """Connected components of the atom graph after deleting the edges
    labeled by `variable`, each as a list of atom indices in body order."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(len(body))}
    for i in range(len(body)):
        vars_i = set(body[i].variables()) - {variable}
        for j in range(i + 1, len(body)):
            if vars_i & (set(body[j].variables()) - {variable}):
                adjacency[i].add(j)
                adjacency[j].add(i)
    components: list[list[int]] = []
    unseen = set(range(len(body)))
    while unseen:
        start = min(unseen)
        group = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt in unseen and nxt not in group:
                    group.add(nxt)
                    frontier.append(nxt)
        unseen -= group
        components.append(sorted(group))
    return components


def _suffix_names(base: str, count: int, forbidden: set[str]) -> list[str]:
    # base_1..base_count, shifting the start while any name collides.
    offset = 0
    while True:
        names = [f"{base}_{offset + i}" for i in range(1, count + 1)]
        if not any(name in forbidden for name in names):
            return names
        offset += count


def join_cut(state: State, view_id: str, variable: str) -> State:
    """Split a view at a join variable into its connected components.

    The variable must occur in at least two atoms and deleting it must
    disconnect the body.  Component i renames it to <var>_i; scans are
    replaced by a left-deep join chain projected back onto the original
    columns, with the first component keeping the original column name.
    """
    view = state.view_by_id(view_id)
    holding = [i for i, atom in enumerate(view.body) if variable in atom.variables()]
    if len(holding) < 2:
        raise NotApplicableError(
            f"variable {variable!r} does not join two atoms of {view_id}"
        )
    components = _components_without(view.body, variable)
    if len(components) < 2:
        raise NotApplicableError(
            f"cutting {variable!r} leaves the body of {view_id} connected"
        )

    other_vars = set(pattern_vars(view.body)) - {variable}
    renames = _suffix_names(variable, len(components), other_vars)
    letters = [
        chr(ord("a") + i) if i < 26 else f"_p{i + 1}" for i in range(len(components))
    ]
    parts: list[View] = []
    for index, atom_ids in enumerate(components):
        renamed = renames[index]

        def rename(term):
            if isinstance(term, Var) and term.name == variable:
                return Var(renamed)
            return term

        atoms = tuple(
            TriplePattern(rename(a.s), rename(a.p), rename(a.o))
            for a in (view.body[i] for i in atom_ids)
        )
        parts.append(make_view(f"{view_id}{letters[index]}", atoms))

    def rebuild(scan: Scan, resolved: dict[str, View]) -> Plan:
        local = dict(zip(view.head, scan.columns))
        cut_col = local[variable]
        join_cols = [cut_col] + _suffix_names(
            cut_col, len(parts), set(scan.columns) | {cut_col}
        )[1:]
        chain: Optional[Plan] = None
        for index, part in enumerate(parts):
            target = resolved[part.id]
            mapping = dict(local)
            mapping[renames[index]] = join_cols[index]
            columns = tuple(mapping[name] for name in part.head)
            leaf: Plan = Scan(target.id, columns)
            if chain is None:
                chain = leaf
            else:
                chain = Join(chain, leaf, ((join_cols[0], join_cols[index]),))
        return Project(chain, scan.columns)

    return _patch_state(state, view, parts, rebuild)


# --- view fusion ---------------------------------------------------------

def view_fusion(state: State, keep_id: str, drop_id: str) -> State:
    """Merge two isomorphic views, redirecting scans of the dropped one.

    Canonical head orders line up positionally for equal keys, so a
    redirected scan keeps its column list unchanged.
    """
    if keep_id == drop_id:
        raise NotIsomorphicError("cannot fuse a view with itself")
    keep = state.view_by_id(keep_id)
    drop = state.view_by_id(drop_id)
    if keep.key != drop.key:
        raise NotIsomorphicError(f"{keep_id} and {drop_id} are not isomorphic")

    def rebuild(scan: Scan, resolved: dict[str, View]) -> Plan:
        return Scan(keep.id, scan.columns)

    return _patch_state(state, drop, [], rebuild)


# --- enumeration and dispatch --------------------------------------------

def enumerate_transitions(
    state: State, allow_property_cuts: bool = False
) -> list[TransitionDescriptor]:
    """All valid transitions, selection cuts first, then join cuts,
    then fusions, each block in a fixed order."""
    descriptors: list[TransitionDescriptor] = []
    ordered = sorted(state.views, key=lambda v: v.id)
    positions = ("s", "o", "p") if allow_property_cuts else ("s", "o")
    for view in ordered:
        for atom_index, atom in enumerate(view.body):
            for position in positions:
                if isinstance(getattr(atom, position), Const):
                    descriptors.append(
                        TransitionDescriptor(
                            kind="selection-cut",
                            view_id=view.id,
                            atom_index=atom_index,
                            position=position,
                        )
                    )
    for view in ordered:
        for variable in view.head:
            holding = sum(1 for a in view.body if variable in a.variables())
            if holding < 2:
                continue
            if len(_components_without(view.body, variable)) < 2:
                continue
            descriptors.append(
                TransitionDescriptor(
                    kind="join-cut", view_id=view.id, variable=variable
                )
            )
    for i, first in enumerate(ordered):
        for second in ordered[i + 1:]:
            if first.key == second.key:
                descriptors.append(
                    TransitionDescriptor(
                        kind="view-fusion",
                        view_id=first.id,
                        other_view_id=second.id,
                    )
                )
    return descriptors


def apply_transition(
    state: State,
    descriptor: TransitionDescriptor,
    allow_property_cuts: bool = False,
) -> State:
    if descriptor.kind == "selection-cut":
        return selection_cut(
            state,
            descriptor.view_id,
            descriptor.atom_index,
            descriptor.position,
            allow_property_cuts,
        )
    if descriptor.kind == "join-cut":
        return join_cut(state, descriptor.view_id, descriptor.variable)
    if descriptor.kind == "view-fusion":
        return view_fusion(state, descriptor.view_id, descriptor.other_view_id)
    raise ValueError(f"unknown transition kind {descriptor.kind!r}")


def export_state(state: State, dictionary: Dictionary) -> dict:
    views = [
        {
            "name": view.id,
            "body": format_body(view.body, dictionary),
            "head": list(view.head),
        }
        for view in state.views
    ]
    rewritings = {
        name: {"plan": plan_to_doc(plan)} for name, plan in state.rewritings.items()
    }
    return {"views": views, "rewritings": rewritings}


def state_from_doc(doc: dict, dictionary: Dictionary) -> State:
    """Rebuild a state from its export; the inverse of export_state
    given the same dictionary contents."""
    views = tuple(
        make_view(entry["name"], parse_body(entry["body"], dictionary))
        for entry in doc["views"]
    )
    rewritings = {
        name: plan_from_doc(entry["plan"])
        for name, entry in doc["rewritings"].items()
    }
    return State(views=views, rewritings=rewritings)
