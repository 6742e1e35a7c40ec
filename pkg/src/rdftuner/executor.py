"""Evaluation over the triple table and over materialized views.

evaluate_cq is the baseline engine (and the oracle target): it binds
atoms one at a time against the store indexes, smallest candidate set
first.  evaluate_plan interprets rewriting plans over materialized
view relations.  Everything uses set semantics over id tuples; results
only become lexical terms in answer_query.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import MissingViewError, UnknownQueryError
from .queries import Const, TriplePattern, Var, format_constant
from .reasoner import UnionQuery
from .store import Dictionary, TripleTable
from .views import (
    Join,
    Plan,
    Project,
    Scan,
    Select,
    State,
    UnionPlan,
)


@dataclass(frozen=True)
class Relation:
    """Named columns over a set of id tuples."""

    columns: tuple[str, ...]
    rows: frozenset[tuple[int, ...]]

    def __post_init__(self):
        for row in self.rows:
            assert len(row) == len(self.columns), "row width mismatch"

    def __len__(self) -> int:
        return len(self.rows)


def _resolve(term, binding: dict[str, int]) -> Optional[int]:
    if isinstance(term, Const):
        return term.tid
    return binding.get(term.name)


def _candidate_count(atom: TriplePattern, table: TripleTable) -> int:
    return len(
        table.match(
            atom.s.tid if isinstance(atom.s, Const) else None,
            atom.p.tid if isinstance(atom.p, Const) else None,
            atom.o.tid if isinstance(atom.o, Const) else None,
        )
    )


def evaluate_cq(
    body: Sequence[TriplePattern],
    head: Sequence[str],
    table: TripleTable,
) -> Relation:
    """All head bindings whose extension matches every atom."""
    order = sorted(body, key=lambda atom: _candidate_count(atom, table))
    bindings: list[dict[str, int]] = [{}]
    for atom in order:
        next_bindings: list[dict[str, int]] = []
        for binding in bindings:
            pattern = (
                _resolve(atom.s, binding),
                _resolve(atom.p, binding),
                _resolve(atom.o, binding),
            )
            extensions: set[tuple] = set()
            for row in table.match(*pattern):
                tentative: dict[str, int] = {}
                ok = True
                for term, value in zip(atom, row):
                    if not isinstance(term, Var) or term.name in binding:
                        continue
                    if tentative.setdefault(term.name, value) != value:
                        ok = False
                        break
                if ok:
                    extensions.add(tuple(sorted(tentative.items())))
            for extension in extensions:
                merged = dict(binding)
                merged.update(extension)
                next_bindings.append(merged)
        bindings = next_bindings
        if not bindings:
            break
    rows = frozenset(tuple(b[name] for name in head) for b in bindings)
    return Relation(columns=tuple(head), rows=rows)


def evaluate_union(union: UnionQuery, table: TripleTable) -> Relation:
    rows: set[tuple[int, ...]] = set()
    for branch in union.branches:
        rows |= evaluate_cq(branch.body, union.head, table).rows
    return Relation(columns=tuple(union.head), rows=frozenset(rows))


def materialize_state(state: State, table: TripleTable) -> dict[str, Relation]:
    return {
        view.id: evaluate_cq(view.body, view.head, table) for view in state.views
    }


def evaluate_plan(plan: Plan, mats: dict[str, Relation]) -> Relation:
    if isinstance(plan, Scan):
        stored = mats.get(plan.view_id)
        if stored is None:
            raise MissingViewError(plan.view_id)
        return Relation(columns=plan.columns, rows=stored.rows)
    if isinstance(plan, Select):
        child = evaluate_plan(plan.child, mats)
        index = child.columns.index(plan.column)
        rows = frozenset(r for r in child.rows if r[index] == plan.value)
        return Relation(columns=child.columns, rows=rows)
    if isinstance(plan, Join):
        left = evaluate_plan(plan.left, mats)
        right = evaluate_plan(plan.right, mats)
        left_keys = [left.columns.index(l) for l, _ in plan.on]
        right_keys = [right.columns.index(r) for _, r in plan.on]
        buckets: dict[tuple, list[tuple]] = {}
        for row in right.rows:
            buckets.setdefault(tuple(row[i] for i in right_keys), []).append(row)
        rows: set[tuple[int, ...]] = set()
        for row in left.rows:
            for match in buckets.get(tuple(row[i] for i in left_keys), ()):
                rows.add(row + match)
        return Relation(columns=left.columns + right.columns, rows=frozenset(rows))
    if isinstance(plan, Project):
        child = evaluate_plan(plan.child, mats)
        indexes = [child.columns.index(c) for c in plan.columns]
        rows = frozenset(tuple(r[i] for i in indexes) for r in child.rows)
        return Relation(columns=plan.columns, rows=rows)
    if isinstance(plan, UnionPlan):
        children = [evaluate_plan(c, mats) for c in plan.children]
        columns = children[0].columns
        rows: set[tuple[int, ...]] = set()
        for child in children:
            rows |= child.rows
        return Relation(columns=columns, rows=frozenset(rows))
    raise MissingViewError(f"cannot evaluate unknown plan node {plan!r}")


def answer_query(
    qname: str,
    state: State,
    mats: dict[str, Relation],
    dictionary: Dictionary,
) -> tuple[tuple[str, ...], list[tuple[str, ...]], float]:
    """Evaluate a query's rewriting and decode the result.

    Returns (columns, sorted formatted rows, elapsed seconds).
    """
    plan = state.rewritings.get(qname)
    if plan is None:
        raise UnknownQueryError(qname)
    started = time.perf_counter()
    relation = evaluate_plan(plan, mats)
    elapsed = time.perf_counter() - started
    rows = decode_rows(relation.rows, dictionary)
    return relation.columns, rows, elapsed


def decode_rows(
    rows: Iterable[tuple[int, ...]], dictionary: Dictionary
) -> list[tuple[str, ...]]:
    decoded = [
        tuple(format_constant(dictionary.term_of(value)) for value in row)
        for row in rows
    ]
    return sorted(decoded)


# --- SQL export ----------------------------------------------------------

def _view_sql(view) -> str:
    aliases = [f"t{i}" for i in range(len(view.body))]
    first_seen: dict[str, str] = {}
    conditions: list[str] = []
    for alias, atom in zip(aliases, view.body):
        for position in ("s", "p", "o"):
            term = getattr(atom, position)
            if isinstance(term, Const):
                conditions.append(f"{alias}.{position} = {term.tid}")
            else:
                place = f"{alias}.{position}"
                if term.name in first_seen:
                    conditions.append(f"{first_seen[term.name]} = {place}")
                else:
                    first_seen[term.name] = place
    select_list = ", ".join(f"{first_seen[name]} AS {name}" for name in view.head)
    from_list = ", ".join(f"tt {alias}" for alias in aliases)
    statement = f"CREATE TABLE {view.id} AS SELECT {select_list} FROM {from_list}"
    if conditions:
        statement += " WHERE " + " AND ".join(conditions)
    return statement + ";"


def export_views_sql(state: State) -> str:
    """One single-line CREATE TABLE statement per view, over tt(s,p,o).

    Aliases follow the canonical atom order; constants and repeated
    variables become equality conditions against encoded ids.
    """
    return "".join(_view_sql(view) + "\n" for view in state.views)
