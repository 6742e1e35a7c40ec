#!/usr/bin/env python3
"""Walk the bundled fixtures through the whole tuning pipeline.

Loads the small advisor dataset, its schema, and the two-query
workload; reformulates the workload; searches for the best view
configuration; then materializes it and answers every query both from
the raw triple table and from the chosen views, checking they agree.
"""

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rdftuner.cost import QualityWeights
from rdftuner.executor import (
    answer_query,
    decode_rows,
    evaluate_union,
    export_views_sql,
    materialize_state,
)
from rdftuner.queries import format_body, load_workload
from rdftuner.reasoner import (
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_workload,
)
from rdftuner.search import SearchConfig, run_search
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


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--strategy",
        default="exhaustive-bfs",
        choices=["exhaustive-bfs", "exhaustive-dfs", "greedy", "stratified-greedy"],
    )
    parser.add_argument("--w-eval", type=Fraction, default=Fraction(1))
    parser.add_argument("--w-maint", type=Fraction, default=Fraction(1))
    parser.add_argument("--w-space", type=Fraction, default=Fraction(1))
    parser.add_argument("--budget", type=Fraction, default=None)
    parser.add_argument("--fixtures", type=Path, default=FIXTURES)
    return parser.parse_args()


def main():
    args = parse_args()

    dictionary, table, stats = load_dataset(
        parse_ntriples((args.fixtures / "D1.nt").read_text())
    )
    print(f"dataset: {len(table)} triples, {stats.d_properties()} properties")

    schema = parse_schema(
        parse_ntriples((args.fixtures / "S1.nt").read_text()),
        dictionary,
        SHORT_VOCAB,
    )
    closure = compute_closure(schema)
    workload = load_workload((args.fixtures / "workload.json").read_text(), dictionary)
    unions = reformulate_workload(workload, closure, schema)
    for union in unions:
        print(f"query {union.name}: {len(union.branches)} reformulated branch(es)")

    config = SearchConfig(
        strategy=args.strategy,
        weights=QualityWeights(args.w_eval, args.w_maint, args.w_space),
        space_budget=args.budget,
    )
    start = initial_state(unions)
    result = run_search(start, stats, config, workload.weights())
    counters = result.trace.to_doc()["counters"]
    print(f"\nsearch ({args.strategy}): {result.outcome}, counters {json.dumps(counters)}")
    if result.best is None:
        print("no state fits the budget; nothing to materialize")
        return

    print(f"best total {result.best_cost.total} "
          f"(eval {result.best_cost.eval_total}, "
          f"maintenance {result.best_cost.maint_total}, "
          f"space {result.best_cost.space_total})")
    print("chosen views:")
    for view in result.best.views:
        print(f"  {view.id}: {format_body(view.body, dictionary)}")

    mats = materialize_state(result.best, table)
    print("\nmaterialized sizes:", {vid: len(rel.rows) for vid, rel in mats.items()})
    for union in unions:
        t0 = time.perf_counter()
        baseline = evaluate_union(union, table)
        baseline_s = time.perf_counter() - t0
        columns, rows, views_s = answer_query(union.name, result.best, mats, dictionary)
        assert sorted(decode_rows(baseline.rows, dictionary)) == rows
        print(f"\n{union.name} {columns}: {rows}")
        print(f"  baseline {baseline_s * 1000:.3f} ms, via views {views_s * 1000:.3f} ms")

    print("\nSQL export of the chosen configuration:")
    print(export_views_sql(result.best), end="")


if __name__ == "__main__":
    main()
