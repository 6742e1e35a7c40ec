import { describe, expect, it } from "vitest";

import type { PlanDoc, SearchResultDoc } from "../src/api.js";
import { seriesToPolylinePoints } from "../src/chart.js";
import { scanViewIds, summarizeBest } from "../src/views.js";

const NESTED_PLAN: PlanDoc = {
  op: "project",
  columns: ["x"],
  child: {
    op: "join",
    on: [["y", "y_2"]],
    left: { op: "scan", view: "v_a", columns: ["x", "y"] },
    right: {
      op: "select",
      column: "p",
      value: 4,
      child: { op: "scan", view: "v_b", columns: ["y_2", "p"] },
    },
  },
};

describe("scanViewIds", () => {
  it("collects every scanned view once, in plan order", () => {
    expect(scanViewIds(NESTED_PLAN)).toEqual(["v_a", "v_b"]);
  });

  it("walks union branches", () => {
    const union: PlanDoc = {
      op: "union",
      children: [
        { op: "scan", view: "v_a", columns: ["x"] },
        { op: "scan", view: "v_a", columns: ["x"] },
        { op: "scan", view: "v_c", columns: ["x"] },
      ],
    };
    expect(scanViewIds(union)).toEqual(["v_a", "v_c"]);
  });
});

function resultDoc(): SearchResultDoc {
  return {
    outcome: "ok",
    terminated_by: "exhausted",
    counters: { explored: 16 },
    best: {
      views: [
        { name: "v_a", body: "?x <advisor> ?y", head: ["x", "y"] },
        { name: "v_b", body: "?y_2 <type> ?p", head: ["y_2", "p"] },
      ],
      rewritings: {
        q1: { plan: NESTED_PLAN },
        q2: { plan: { op: "scan", view: "v_a", columns: ["x", "y"] } },
      },
    },
    best_cost: {
      eval: "13",
      maintenance: "5/2",
      space: "6",
      total: "43/2",
      per_view: { v_a: "4", v_b: "3" },
      per_query: { q1: "5", q2: "1" },
    },
  };
}

describe("summarizeBest", () => {
  it("lists each view with size, estimated rows, and its users", () => {
    const summary = summarizeBest(resultDoc());
    expect(summary).not.toBeNull();
    expect(summary!.views).toHaveLength(2);
    const [va, vb] = summary!.views;
    expect(va).toMatchObject({
      name: "v_a",
      space: "4",
      estimatedRows: "2",
      usedBy: ["q1", "q2"],
    });
    expect(vb).toMatchObject({
      name: "v_b",
      space: "3",
      estimatedRows: "3/2",
      usedBy: ["q1"],
    });
    expect(summary!.cost.total).toBe("43/2");
  });

  it("returns null when the search found no feasible state", () => {
    const infeasible: SearchResultDoc = {
      outcome: "no-feasible-state",
      best: null,
      best_cost: null,
    };
    expect(summarizeBest(infeasible)).toBeNull();
  });
});

describe("seriesToPolylinePoints", () => {
  const box = { width: 100, height: 60, padding: 10 };

  it("spaces points evenly and scales totals into the box", () => {
    const points = seriesToPolylinePoints(["10", "8", "8"], box);
    expect(points).toBe("10,10 50,50 90,50");
  });

  it("draws a constant series at mid-height", () => {
    expect(seriesToPolylinePoints(["5", "5"], box)).toBe("10,30 90,30");
  });

  it("puts a single point at the left edge and handles emptiness", () => {
    expect(seriesToPolylinePoints(["7"], box)).toBe("10,30");
    expect(seriesToPolylinePoints([], box)).toBe("");
  });
});
