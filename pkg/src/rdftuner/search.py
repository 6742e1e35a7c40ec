"""State-space navigation over view configurations.

Two exhaustive strategies (breadth-first and depth-first over distinct
state signatures) guarantee the optimum within the explored space; two
greedy strategies hill-climb to a local optimum, with the stratified
variant preferring fusions, then selection cuts, then join cuts.  A
space budget marks oversized states as pruned: they are never expanded
and never returned as best.  All strategies are fully deterministic,
with ties broken by state signature.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .cost import CostReport, QualityWeights, state_quality
from .queries import Const, Var
from .reasoner import DEFAULT_BRANCH_CAP
from .store import DataStatistics
from .views import (
    State,
    TransitionDescriptor,
    apply_transition,
    enumerate_transitions,
    state_signature,
)

STRATEGIES = ("exhaustive-bfs", "exhaustive-dfs", "greedy", "stratified-greedy")
_STRATA = ("view-fusion", "selection-cut", "join-cut")


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "exhaustive-bfs"
    weights: QualityWeights = field(default_factory=QualityWeights)
    space_budget: Optional[Fraction] = None
    max_states: int = 10000
    timeout: float = 300.0
    allow_property_cuts: bool = False
    branch_cap: int = DEFAULT_BRANCH_CAP
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; pick one of {', '.join(STRATEGIES)}"
            )
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.space_budget is not None and self.space_budget < 0:
            raise ValueError("space_budget must be nonnegative")


@dataclass(frozen=True)
class TraceNode:
    sig: str
    parent: Optional[str]
    transition: Optional[TransitionDescriptor]
    cost: CostReport
    order: int

    def to_doc(self) -> dict:
        return {
            "sig": self.sig,
            "parent": self.parent,
            "transition": self.transition.to_doc() if self.transition else None,
            "cost": self.cost.to_doc(),
            "order": self.order,
        }


@dataclass
class SearchTrace:
    nodes: list[TraceNode] = field(default_factory=list)
    pruned_by_budget: int = 0
    pruned_by_memo: int = 0
    stop_condition_hits: int = 0

    @property
    def explored(self) -> int:
        return len(self.nodes)

    def to_doc(self) -> dict:
        return {
            "nodes": [node.to_doc() for node in self.nodes],
            "counters": {
                "explored": self.explored,
                "pruned-by-budget": self.pruned_by_budget,
                "pruned-by-memo": self.pruned_by_memo,
                "stop-condition-hits": self.stop_condition_hits,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"))


@dataclass
class SearchResult:
    best: Optional[State]
    best_cost: Optional[CostReport]
    trace: SearchTrace
    terminated_by: str

    @property
    def outcome(self) -> str:
        return "ok" if self.best is not None else "no-feasible-state"


def is_terminal(state: State, allow_property_cuts: bool = False) -> bool:
    """A state the search does not expand further.

    Either no transition applies at all, or every view is a fully
    relaxed single atom (variable, constant property, variable) — the
    frontier where further cuts could only rebuild the triple table.
    An isomorphic view pair always leaves fusion applicable.
    """
    keys = [view.key for view in state.views]
    if len(set(keys)) < len(keys):
        return False
    if all(
        len(view.body) == 1
        and isinstance(view.body[0].s, Var)
        and isinstance(view.body[0].p, Const)
        and isinstance(view.body[0].o, Var)
        for view in state.views
    ):
        return True
    return not enumerate_transitions(state, allow_property_cuts)


ProgressFn = Callable[[dict], None]


class _Run:
    """Shared bookkeeping for one search invocation."""

    def __init__(
        self,
        stats: DataStatistics,
        config: SearchConfig,
        query_weights: Optional[dict[str, Fraction]],
        progress: Optional[ProgressFn],
    ):
        self.stats = stats
        self.config = config
        self.query_weights = query_weights
        self.progress = progress
        self.trace = SearchTrace()
        self.seen: set[str] = set()
        self.best: Optional[tuple[Fraction, str, State, CostReport]] = None
        self.deadline = time.monotonic() + config.timeout
        self.terminated: Optional[str] = None

    def timed_out(self) -> bool:
        if time.monotonic() > self.deadline:
            self.terminated = "timeout"
            return True
        return False

    def score(self, state: State) -> CostReport:
        return state_quality(state, self.stats, self.config.weights, self.query_weights)

    def over_budget(self, cost: CostReport) -> bool:
        budget = self.config.space_budget
        return budget is not None and cost.space_total > budget

    def record(
        self,
        state: State,
        sig: str,
        cost: CostReport,
        parent: Optional[str],
        transition: Optional[TransitionDescriptor],
    ) -> TraceNode:
        node = TraceNode(
            sig=sig, parent=parent, transition=transition, cost=cost,
            order=len(self.trace.nodes),
        )
        self.trace.nodes.append(node)
        if not self.over_budget(cost):
            entry = (cost.total, sig, state, cost)
            if self.best is None or entry[:2] < self.best[:2]:
                self.best = entry
        if self.progress is not None:
            self.progress(
                {
                    "order": node.order,
                    "sig": sig,
                    "parent": parent,
                    "transition": transition.to_doc() if transition else None,
                    "total": str(cost.total),
                    "space": str(cost.space_total),
                    "best_sig": self.best[1] if self.best else None,
                    "best_total": str(self.best[0]) if self.best else None,
                    "explored": self.trace.explored,
                }
            )
        return node

    def at_capacity(self) -> bool:
        if self.trace.explored >= self.config.max_states:
            self.terminated = "max-states"
            return True
        return False


def _expand(
    run: _Run, state: State, sig: str, descriptors: list[TransitionDescriptor]
) -> list[tuple[State, str, CostReport]]:
    """Score the unseen, within-budget children of one state; returns
    the ones recorded before hitting a limit."""
    recorded: list[tuple[State, str, CostReport]] = []
    for descriptor in descriptors:
        child = apply_transition(state, descriptor, run.config.allow_property_cuts)
        child_sig = state_signature(child)
        if child_sig in run.seen:
            run.trace.pruned_by_memo += 1
            continue
        run.seen.add(child_sig)
        cost = run.score(child)
        if run.over_budget(cost):
            run.trace.pruned_by_budget += 1
            continue
        if run.at_capacity():
            break
        run.record(child, child_sig, cost, sig, descriptor)
        recorded.append((child, child_sig, cost))
    return recorded


def _stratified(
    descriptors: list[TransitionDescriptor],
) -> list[TransitionDescriptor]:
    for kind in _STRATA:
        block = [d for d in descriptors if d.kind == kind]
        if block:
            return block
    return []


def run_search(
    initial: State,
    stats: DataStatistics,
    config: SearchConfig,
    query_weights: Optional[dict[str, Fraction]] = None,
    progress: Optional[ProgressFn] = None,
) -> SearchResult:
    """Explore from the initial state and return the best scored state.

    The initial state is always recorded first and always expanded,
    but when it exceeds the space budget it is counted as pruned and
    cannot be the result; if nothing within budget is ever recorded
    the result carries no best state (a no-feasible-state outcome).
    """
    run = _Run(stats, config, query_weights, progress)
    sig0 = state_signature(initial)
    cost0 = run.score(initial)
    run.seen.add(sig0)
    run.record(initial, sig0, cost0, None, None)
    if run.over_budget(cost0):
        run.trace.pruned_by_budget += 1

    if config.strategy in ("exhaustive-bfs", "exhaustive-dfs"):
        _exhaustive(run, initial, sig0)
    else:
        _greedy(run, initial, sig0, cost0)

    terminated = run.terminated or "exhausted"
    if run.best is None:
        return SearchResult(None, None, run.trace, terminated)
    _, _, best_state, best_cost = run.best
    return SearchResult(best_state, best_cost, run.trace, terminated)


def _exhaustive(run: _Run, initial: State, sig0: str) -> None:
    frontier: deque[tuple[State, str]] = deque([(initial, sig0)])
    bfs = run.config.strategy == "exhaustive-bfs"
    while frontier:
        if run.timed_out() or run.terminated == "max-states":
            return
        state, sig = frontier.popleft() if bfs else frontier.pop()
        if is_terminal(state, run.config.allow_property_cuts):
            run.trace.stop_condition_hits += 1
            continue
        descriptors = enumerate_transitions(state, run.config.allow_property_cuts)
        children = _expand(run, state, sig, descriptors)
        if bfs:
            frontier.extend((c, s) for c, s, _ in children)
        else:
            frontier.extend((c, s) for c, s, _ in reversed(children))
        if run.terminated == "max-states":
            return


def _greedy(run: _Run, initial: State, sig0: str, cost0: CostReport) -> None:
    stratified = run.config.strategy == "stratified-greedy"
    current, current_sig, current_cost = initial, sig0, cost0
    while True:
        if run.timed_out() or run.terminated == "max-states":
            return
        if is_terminal(current, run.config.allow_property_cuts):
            run.trace.stop_condition_hits += 1
            return
        descriptors = enumerate_transitions(current, run.config.allow_property_cuts)
        if stratified:
            descriptors = _stratified(descriptors)
        children = _expand(run, current, current_sig, descriptors)
        if not children:
            return
        step = min(children, key=lambda item: (item[2].total, item[1]))
        if step[2].total >= current_cost.total:
            return
        current, current_sig, current_cost = step
