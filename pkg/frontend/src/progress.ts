/** Reduce search progress events into the chart's view model.
 *
 * The service appends one event per explored state to a cursor-paged
 * log.  The view model mirrors that log: one node per event for the
 * search-tree listing, and a best-total series that is, by
 * construction, the running minimum of the received totals (compared
 * exactly as fractions, not floats).
 *
 * Events must arrive in expansion order: each event's `order` is the
 * next node index and each parent signature must already be known.
 * Anything else raises OutOfOrderEvent, and the poller responds by
 * discarding the model and re-reading from cursor 0 — re-reducing the
 * full log always reproduces the same model, so a re-sync never
 * changes what a completed run renders.
 */

import type { ProgressEventDoc } from "./api.js";
import { minFractionText } from "./fraction.js";

export interface ProgressNode {
  order: number;
  sig: string;
  parent: string | null;
  kind: string | null;
  total: string;
  space: string;
}

export interface ProgressViewModel {
  nodes: ProgressNode[];
  bestSeries: string[];
  explored: number;
}

export class OutOfOrderEvent extends Error {
  constructor(message: string) {
    super(message);
    this.name = "OutOfOrderEvent";
  }
}

export function emptyProgress(): ProgressViewModel {
  return { nodes: [], bestSeries: [], explored: 0 };
}

/** Fold a batch of events into a new view model (the input model is
 * not mutated). */
export function renderSearchProgress(
  model: ProgressViewModel,
  events: ProgressEventDoc[],
): ProgressViewModel {
  if (events.length === 0) {
    return model;
  }
  const nodes = model.nodes.slice();
  const bestSeries = model.bestSeries.slice();
  const seen = new Set(nodes.map((node) => node.sig));
  let explored = model.explored;

  for (const event of events) {
    if (event.order !== nodes.length) {
      throw new OutOfOrderEvent(
        `expected event ${nodes.length}, received ${event.order}`,
      );
    }
    if (event.parent !== null && !seen.has(event.parent)) {
      throw new OutOfOrderEvent(
        `event ${event.order} references unseen parent ${event.parent}`,
      );
    }
    nodes.push({
      order: event.order,
      sig: event.sig,
      parent: event.parent,
      kind: event.transition ? event.transition.kind : null,
      total: event.total,
      space: event.space,
    });
    seen.add(event.sig);
    const previous = bestSeries[bestSeries.length - 1];
    bestSeries.push(
      previous === undefined ? event.total : minFractionText(previous, event.total),
    );
    explored = event.explored;
  }
  return { nodes, bestSeries, explored };
}
