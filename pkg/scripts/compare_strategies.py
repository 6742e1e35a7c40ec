#!/usr/bin/env python3
"""Compare the four search strategies across quality-weight settings.

For each weighting of (evaluation, maintenance, space) the script runs
every strategy on the fixture workload and reports how many states it
explored, the best total it found, and how far that lies above the
exhaustive optimum.  The exhaustive strategies always agree; the table
shows what the pruning heuristics trade away in exchange for visiting
fewer states.
"""

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rdftuner.cost import QualityWeights
from rdftuner.queries import load_workload
from rdftuner.reasoner import (
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_workload,
)
from rdftuner.search import STRATEGIES, SearchConfig, run_search
from rdftuner.store import load_dataset, parse_ntriples
from rdftuner.views import initial_state

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
SHORT_VOCAB = Vocabulary(
    type="type",
    subclass="subClassOf",
    subproperty="subPropertyOf",
    domain="domain",
    range="range",
)

WEIGHT_GRID = [
    (1, 1, 1),
    (1, 0, 0),
    (0, 1, 1),
    (1, 5, 5),
    (5, 1, 1),
    (1, 10, 1),
    (1, 1, 10),
]


def load_fixture_search(fixtures: Path):
    dictionary, table, stats = load_dataset(
        parse_ntriples((fixtures / "D1.nt").read_text())
    )
    schema = parse_schema(
        parse_ntriples((fixtures / "S1.nt").read_text()), dictionary, SHORT_VOCAB
    )
    workload = load_workload((fixtures / "workload.json").read_text(), dictionary)
    unions = reformulate_workload(workload, compute_closure(schema), schema)
    return initial_state(unions), stats, workload.weights()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", type=Path, default=FIXTURES)
    args = parser.parse_args()

    start, stats, query_weights = load_fixture_search(args.fixtures)

    header = f"{'weights':>12}  {'strategy':<18} {'explored':>8} {'best total':>12} {'vs optimum':>11} {'ms':>7}"
    print(header)
    print("-" * len(header))
    for w_eval, w_maint, w_space in WEIGHT_GRID:
        weights = QualityWeights(Fraction(w_eval), Fraction(w_maint), Fraction(w_space))
        optimum = None
        for strategy in STRATEGIES:
            config = SearchConfig(strategy=strategy, weights=weights)
            t0 = time.perf_counter()
            result = run_search(start, stats, config, query_weights)
            elapsed = (time.perf_counter() - t0) * 1000
            total = result.best_cost.total
            if strategy == "exhaustive-bfs":
                optimum = total
            gap = "optimal" if total == optimum else f"+{total - optimum}"
            label = f"({w_eval},{w_maint},{w_space})"
            print(
                f"{label:>12}  {strategy:<18} {result.trace.explored:>8} "
                f"{str(total):>12} {gap:>11} {elapsed:>7.1f}"
            )
        print()


if __name__ == "__main__":
    main()
