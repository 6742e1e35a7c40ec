/** Full wizard pass against a live service on the reference
 * fixtures: every step from dataset upload to the query console runs
 * over HTTP, the progress chart's best series is checked to be the
 * running minimum of the received totals, and the console's
 * both-mode answers must agree between the baseline and the
 * materialized views. */

import { ChildProcess, spawn } from "node:child_process";
import { once } from "node:events";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { compareFractions, parseFraction } from "../src/fraction.js";
import { runWizard, WizardOutcome } from "../src/wizard.js";

const FIXTURES = join(fileURLToPath(new URL(".", import.meta.url)), "..", "..", "fixtures");

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForHealth(client: ApiClient, server: ChildProcess): Promise<void> {
  for (let attempt = 0; attempt < 200; attempt += 1) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early with code ${server.exitCode}`);
    }
    try {
      await client.health();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }
  throw new Error("service never became healthy");
}

describe("wizard end-to-end against a live service", () => {
  let server: ChildProcess;
  let dataDir: string;
  let client: ApiClient;
  let outcome: WizardOutcome;

  beforeAll(async () => {
    dataDir = mkdtempSync(join(tmpdir(), "rdftuner-e2e-"));
    const port = await freePort();
    server = spawn(
      "python3",
      ["-m", "rdftuner", "serve", "--host", "127.0.0.1", "--port", String(port), "-d", dataDir],
      { stdio: ["ignore", "ignore", "pipe"] },
    );
    const stderr: Buffer[] = [];
    server.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk));
    client = new ApiClient(`http://127.0.0.1:${port}`);
    try {
      await waitForHealth(client, server);
    } catch (error) {
      throw new Error(`${error}\n${Buffer.concat(stderr).toString()}`);
    }

    outcome = await runWizard(
      client,
      {
        dataset: readFileSync(join(FIXTURES, "D1.nt"), "utf8"),
        workload: readFileSync(join(FIXTURES, "workload.json"), "utf8"),
        schema: {
          text: readFileSync(join(FIXTURES, "S1.nt"), "utf8"),
          vocabulary: {
            type: "type",
            subclass: "subClassOf",
            subproperty: "subPropertyOf",
            domain: "domain",
            range: "range",
          },
        },
        form: { mode: "optimal", evalWeight: 1, maintenanceWeight: 1, spaceWeight: 1 },
        queryNames: ["q1", "q2"],
      },
      { pollDelayMs: 25 },
    );
  }, 90_000);

  afterAll(async () => {
    if (server && server.exitCode === null) {
      server.kill("SIGTERM");
      await Promise.race([
        once(server, "exit"),
        new Promise((resolve) => setTimeout(resolve, 5000)),
      ]);
      if (server.exitCode === null) {
        server.kill("SIGKILL");
      }
    }
    rmSync(dataDir, { recursive: true, force: true });
  });

  it("completes every wizard step", () => {
    expect(outcome.state.step).toBe("console");
    expect(outcome.datasetSummary.triples).toBe(6);
    expect(outcome.workloadSummary.queries.map((q) => q.name)).toEqual(["q1", "q2"]);
    expect(outcome.schemaSummary).toEqual({
      subclass: 2,
      subproperty: 0,
      domain: 1,
      range: 1,
      ignored: 0,
    });
    expect(outcome.job).toBe("job-1");
  });

  it("finds the exhaustive optimum for the reference workload", () => {
    expect(outcome.result.outcome).toBe("ok");
    expect(outcome.result.terminated_by).toBe("exhausted");
    expect(outcome.result.counters?.explored).toBe(16);
    expect(outcome.result.best_cost?.total).toBe("43/2");
    expect(outcome.best).not.toBeNull();
    expect(outcome.best!.views.map((view) => view.name).sort()).toEqual([
      "v_q1_1",
      "v_q2_c0o",
    ]);
    for (const view of outcome.best!.views) {
      expect(view.usedBy.length).toBeGreaterThan(0);
    }
  });

  it("renders the best series as the running minimum of the totals", () => {
    const { nodes, bestSeries, explored } = outcome.state.progress;
    expect(nodes.length).toBe(16);
    expect(explored).toBe(16);
    expect(bestSeries.length).toBe(nodes.length);

    let runningMin = nodes[0].total;
    nodes.forEach((node, index) => {
      if (compareFractions(parseFraction(node.total), parseFraction(runningMin)) < 0) {
        runningMin = node.total;
      }
      expect(bestSeries[index]).toBe(runningMin);
    });
    expect(bestSeries[bestSeries.length - 1]).toBe("43/2");
    expect(bestSeries[bestSeries.length - 1]).toBe(outcome.result.best_cost?.total);
  });

  it("lists every parent before its children in the progress nodes", () => {
    const seen = new Set<string>();
    for (const node of outcome.state.progress.nodes) {
      if (node.parent !== null) {
        expect(seen.has(node.parent)).toBe(true);
      }
      seen.add(node.sig);
    }
  });

  it("materializes the chosen views with their estimated sizes", () => {
    expect(outcome.materialized).not.toBeNull();
    const names = Object.keys(outcome.materialized!.views).sort();
    expect(names).toEqual(["v_q1_1", "v_q2_c0o"]);
    for (const size of Object.values(outcome.materialized!.views)) {
      expect(size).toBeGreaterThan(0);
    }
  });

  it("answers both console queries identically from views and baseline", () => {
    for (const name of ["q1", "q2"]) {
      const answer = outcome.answers[name];
      expect(answer.mode).toBe("both");
      expect(answer.match).toBe(true);
      expect(typeof answer.timings.baseline).toBe("number");
      expect(typeof answer.timings.views).toBe("number");
      expect(answer.rows.length).toBeGreaterThan(0);
    }
    expect(outcome.answers.q1.columns).toEqual(["x", "y"]);
    expect(outcome.answers.q1.rows).toEqual([
      ["<a>", "<b>"],
      ["<c>", "<b>"],
    ]);
    expect(outcome.answers.q2.rows).toEqual([["<a>"], ["<c>"]]);
  });

  it("exports a SQL script for the materialized configuration", () => {
    expect(outcome.sql).toContain("CREATE TABLE");
    expect(outcome.sql).toContain("FROM tt");
  });

  it("re-reads the full progress log identically from cursor 0", async () => {
    const sid = outcome.state.sessionId!;
    const replay = await client.progress(sid, outcome.job, 0);
    expect(replay.done).toBe(true);
    expect(replay.events.length).toBe(16);
    expect(replay.events.map((event) => event.sig)).toEqual(
      outcome.state.progress.nodes.map((node) => node.sig),
    );
  });
});
