/** Turn a finished search result into the results-panel rows.
 *
 * The panel lists each chosen view with its definition, estimated
 * rows, storage size, and the workload queries whose rewriting plans
 * scan it; the state-level cost summary sits alongside.  Everything
 * here is derived from the result document alone.
 */

import type { CostDoc, PlanDoc, SearchResultDoc } from "./api.js";
import { divideFractionText } from "./fraction.js";

/** Every view id scanned anywhere in a plan, deduplicated in order. */
export function scanViewIds(plan: PlanDoc): string[] {
  const found: string[] = [];
  const walk = (node: PlanDoc): void => {
    if (node.op === "scan") {
      if (node.view !== undefined && !found.includes(node.view)) {
        found.push(node.view);
      }
      return;
    }
    if (node.child) walk(node.child);
    if (node.left) walk(node.left);
    if (node.right) walk(node.right);
    for (const child of node.children ?? []) walk(child);
  };
  walk(plan);
  return found;
}

export interface ViewSummary {
  name: string;
  body: string;
  head: string[];
  estimatedRows: string;
  space: string;
  usedBy: string[];
}

export interface BestSummary {
  views: ViewSummary[];
  cost: CostDoc;
}

/** Summarize the best state, or null when the search found none. */
export function summarizeBest(result: SearchResultDoc): BestSummary | null {
  if (!result.best || !result.best_cost) {
    return null;
  }
  const usedBy = new Map<string, string[]>();
  for (const [query, rewriting] of Object.entries(result.best.rewritings)) {
    for (const viewId of scanViewIds(rewriting.plan)) {
      const queries = usedBy.get(viewId) ?? [];
      queries.push(query);
      usedBy.set(viewId, queries);
    }
  }
  const views = result.best.views.map((view) => {
    const space = result.best_cost!.per_view[view.name] ?? "0";
    return {
      name: view.name,
      body: view.body,
      head: view.head,
      estimatedRows: divideFractionText(space, String(view.head.length)),
      space,
      usedBy: (usedBy.get(view.name) ?? []).sort(),
    };
  });
  return { views, cost: result.best_cost };
}
