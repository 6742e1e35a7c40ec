"""Cardinality estimation and the three-component state quality score.

All arithmetic is exact over rationals.  The estimator assumes
independence between atoms and uniformity within a property: an atom
contributes its expected match count, and every join variable is
charged one distinct-count divisor per occurrence except the cheapest
one.  Charging all but the smallest-divisor occurrence makes the
estimate independent of atom order, which in turn makes join plans
built by the transitions compose exactly to the uncut estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import MissingViewError
from .queries import Const, TriplePattern, Var
from .store import DataStatistics
from .views import (
    Join,
    Plan,
    Project,
    Scan,
    Select,
    State,
    UnionPlan,
    View,
)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class QualityWeights:
    """Weights for evaluation cost, maintenance cost, and space."""

    w_eval: Fraction = ONE
    w_maint: Fraction = ONE
    w_space: Fraction = ONE

    def __post_init__(self):
        if self.w_eval < 0 or self.w_maint < 0 or self.w_space < 0:
            raise ValueError("quality weights must be nonnegative")
        if self.w_eval == 0 and self.w_maint == 0 and self.w_space == 0:
            raise ValueError("quality weights cannot all be zero")


@dataclass(frozen=True)
class CostReport:
    eval_total: Fraction
    maint_total: Fraction
    space_total: Fraction
    total: Fraction
    per_view: dict[str, Fraction]
    per_query: dict[str, Fraction]

    def to_doc(self) -> dict:
        return {
            "eval": str(self.eval_total),
            "maintenance": str(self.maint_total),
            "space": str(self.space_total),
            "total": str(self.total),
            "per_view": {k: str(v) for k, v in self.per_view.items()},
            "per_query": {k: str(v) for k, v in self.per_query.items()},
        }


def _property_id(atom: TriplePattern) -> Optional[int]:
    return atom.p.tid if isinstance(atom.p, Const) else None


def _occurrence_d(stats: DataStatistics, atom: TriplePattern, position: str) -> Fraction:
    prop = _property_id(atom)
    if position == "s":
        return Fraction(stats.d_subjects(prop))
    if position == "o":
        return Fraction(stats.d_objects(prop))
    return Fraction(stats.d_properties())


def _atom_base(stats: DataStatistics, atom: TriplePattern) -> Fraction:
    prop = _property_id(atom)
    base = Fraction(stats.count(prop))
    if isinstance(atom.s, Const):
        base /= Fraction(stats.d_subjects(prop))
    if isinstance(atom.o, Const):
        base /= Fraction(stats.d_objects(prop))
    return base


def _variable_occurrences(
    body: Sequence[TriplePattern],
) -> dict[str, list[tuple[TriplePattern, str]]]:
    occurrences: dict[str, list[tuple[TriplePattern, str]]] = {}
    for atom in body:
        for position in ("s", "p", "o"):
            term = getattr(atom, position)
            if isinstance(term, Var):
                occurrences.setdefault(term.name, []).append((atom, position))
    return occurrences


def _join_factor(stats: DataStatistics, body: Sequence[TriplePattern]) -> Fraction:
    factor = ONE
    for occs in _variable_occurrences(body).values():
        if len(occs) < 2:
            continue
        divisors = [_occurrence_d(stats, atom, pos) for atom, pos in occs]
        for d in divisors:
            factor /= d
        factor *= min(divisors)
    return factor


def estimate_cardinality(
    body: Sequence[TriplePattern], stats: DataStatistics
) -> Fraction:
    """Expected result size of a body under independence assumptions."""
    result = _join_factor(stats, body)
    for atom in body:
        result *= _atom_base(stats, atom)
    return result


def view_cardinality(view: View, stats: DataStatistics) -> Fraction:
    return estimate_cardinality(view.body, stats)


def maintenance_cost(view: View, stats: DataStatistics) -> Fraction:
    """Cost of refreshing a view after one matching insertion.

    Per atom, the estimate of the delta body where that atom's base is
    replaced by 1 (the inserted triple) with all other factors kept.
    """
    bases = [_atom_base(stats, atom) for atom in view.body]
    join = _join_factor(stats, view.body)
    total = ZERO
    for index in range(len(view.body)):
        delta = join
        for other, base in enumerate(bases):
            if other != index:
                delta *= base
        total += delta
    return total


def _column_divisors(view: View, stats: DataStatistics) -> dict[str, Fraction]:
    # d of a head variable = the smallest distinct-count over its
    # occurrences, matching the occurrence the estimator leaves free.
    occurrences = _variable_occurrences(view.body)
    return {
        name: min(_occurrence_d(stats, atom, pos) for atom, pos in occurrences[name])
        for name in view.head
    }


def plan_cost(
    plan: Plan, stats: DataStatistics, state: State
) -> tuple[Fraction, Fraction]:
    """Evaluation cost and output cardinality of a rewriting plan.

    Scans cost the view size; selections are free on top of their
    child.  A join tree is costed as a whole region: the sum of its
    leaf costs plus one output-size charge per join step, with every
    selection sitting above the tree pushed onto its leaf first.
    Because the output size folds the same way under any association
    (see _join_factor) and the leaf sum is order-free, the cost of a
    state never depends on which transition order built its plans —
    two paths to the same view set score identically.

    Output size tracks a per-column distinct-count map: selections
    divide by the column's count and pin it to 1, join predicates
    divide by the larger of the two paired counts and keep the
    smaller.
    """
    cost, outcard, _ = _plan_cost(plan, stats, state)
    return cost, outcard


def _wraps_join(plan: Plan) -> bool:
    node = plan
    while isinstance(node, (Select, Project)):
        node = node.child
    return isinstance(node, Join)


def _region_parts(
    plan: Plan,
) -> tuple[list[Plan], list[tuple[str, str]], list[str]]:
    """Flatten a join tree (with interleaved Select/Project wrappers)
    into its scan-chain leaves, join predicates, and the columns of
    selections applied above any join node."""
    if isinstance(plan, Join):
        lleaves, lpreds, lselects = _region_parts(plan.left)
        rleaves, rpreds, rselects = _region_parts(plan.right)
        return (
            lleaves + rleaves,
            lpreds + rpreds + list(plan.on),
            lselects + rselects,
        )
    if isinstance(plan, (Select, Project)) and _wraps_join(plan):
        leaves, preds, selects = _region_parts(plan.child)
        if isinstance(plan, Select):
            selects = selects + [plan.column]
        return leaves, preds, selects
    return [plan], [], []


def _region_cost(
    plan: Plan, stats: DataStatistics, state: State
) -> tuple[Fraction, Fraction, dict[str, Fraction]]:
    leaves, predicates, select_columns = _region_parts(plan)
    leaf_total = ZERO
    outcard = ONE
    merged: dict[str, Fraction] = {}
    for leaf in leaves:
        cost, card, dmap = _plan_cost(leaf, stats, state)
        leaf_total += cost
        outcard *= card
        merged.update(dmap)
    for column in select_columns:
        outcard /= merged.get(column, ONE)
        merged[column] = ONE
    for lcol, rcol in predicates:
        dl = merged.get(lcol, ONE)
        dr = merged.get(rcol, ONE)
        outcard /= max(dl, dr)
        merged[lcol] = merged[rcol] = min(dl, dr)
    cost = leaf_total + (len(leaves) - 1) * outcard
    node = plan
    while isinstance(node, (Select, Project)):
        if isinstance(node, Project):
            merged = {c: merged.get(c, ONE) for c in node.columns}
            break
        node = node.child
    return cost, outcard, merged


def _plan_cost(
    plan: Plan, stats: DataStatistics, state: State
) -> tuple[Fraction, Fraction, dict[str, Fraction]]:
    if isinstance(plan, (Join, Select, Project)) and _wraps_join(plan):
        return _region_cost(plan, stats, state)
    if isinstance(plan, Scan):
        view = state.view_by_id(plan.view_id)
        card = estimate_cardinality(view.body, stats)
        divisors = _column_divisors(view, stats)
        dmap = {
            col: divisors[var] for col, var in zip(plan.columns, view.head)
        }
        return card, card, dmap
    if isinstance(plan, Select):
        cost, outcard, dmap = _plan_cost(plan.child, stats, state)
        d = dmap.get(plan.column, ONE)
        new_map = dict(dmap)
        new_map[plan.column] = ONE
        return cost, outcard / d, new_map
    if isinstance(plan, Project):
        cost, outcard, dmap = _plan_cost(plan.child, stats, state)
        return cost, outcard, {c: dmap.get(c, ONE) for c in plan.columns}
    if isinstance(plan, UnionPlan):
        total_cost = ZERO
        total_card = ZERO
        sums: dict[str, Fraction] = {}
        for child in plan.children:
            cost, outcard, dmap = _plan_cost(child, stats, state)
            total_cost += cost
            total_card += outcard
            for col, d in dmap.items():
                sums[col] = sums.get(col, ZERO) + d
        return total_cost, total_card, sums
    raise MissingViewError(f"cannot cost unknown plan node {plan!r}")


def state_quality(
    state: State,
    stats: DataStatistics,
    weights: QualityWeights,
    query_weights: Optional[dict[str, Fraction]] = None,
) -> CostReport:
    """Score a state: weighted evaluation plus maintenance plus space."""
    query_weights = query_weights or {}
    per_query: dict[str, Fraction] = {}
    eval_total = ZERO
    for name, plan in state.rewritings.items():
        cost, _ = plan_cost(plan, stats, state)
        per_query[name] = cost
        eval_total += query_weights.get(name, ONE) * cost

    per_view: dict[str, Fraction] = {}
    maint_total = ZERO
    space_total = ZERO
    for view in state.views:
        size = estimate_cardinality(view.body, stats) * len(view.head)
        per_view[view.id] = size
        space_total += size
        maint_total += maintenance_cost(view, stats)

    total = (
        weights.w_eval * eval_total
        + weights.w_maint * maint_total
        + weights.w_space * space_total
    )
    return CostReport(
        eval_total=eval_total,
        maint_total=maint_total,
        space_total=space_total,
        total=total,
        per_view=per_view,
        per_query=per_query,
    )
