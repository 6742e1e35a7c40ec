/** Browser wiring: connect the wizard's pure pieces to the page.
 *
 * Interactive counterpart of runWizard: the same client calls, made
 * one step at a time as the user clicks through.  The service
 * address defaults to the page origin and can be overridden with
 * ?api=http://host:port for development against a separately started
 * server.
 */

import { ApiClient, QueryResponse, SearchResultDoc, WorkloadSummary } from "./api.js";
import { seriesToPolylinePoints } from "./chart.js";
import { buildSearchRequest, FormValidationError, SearchFormValues, SearchMode } from "./config.js";
import { emptyProgress, OutOfOrderEvent, ProgressViewModel, renderSearchProgress } from "./progress.js";
import { summarizeBest } from "./views.js";
import { canGoBack, previousStep, WizardStep, WIZARD_STEPS } from "./wizard.js";

const EXAMPLE_DATASET = `<a> <type> <Student> .
<a> <advisor> <b> .
<a> <name> "alice" .
<b> <type> <Professor> .
<b> <name> "bob" .
<c> <advisor> <b> .
`;

const EXAMPLE_WORKLOAD = `[
  {
    "name": "q1",
    "weight": 1,
    "sparql": "SELECT ?x ?y WHERE { ?x <advisor> ?y . ?y <type> <Professor> . }"
  },
  {
    "name": "q2",
    "weight": 2,
    "sparql": "SELECT ?x WHERE { ?x <advisor> <b> . }"
  }
]
`;

const EXAMPLE_SCHEMA = `<Student> <subClassOf> <Person> .
<Professor> <subClassOf> <Person> .
<advisor> <domain> <Student> .
<advisor> <range> <Professor> .
`;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

const client = new ApiClient(apiBase());

let step: WizardStep = "dataset";
let sessionId: string | null = null;
let job: string | null = null;
let cursor = 0;
let progress: ProgressViewModel = emptyProgress();
let result: SearchResultDoc | null = null;
let workloadSummary: WorkloadSummary | null = null;
let polling = false;

const statusLine = element<HTMLDivElement>("status");

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.className = isError ? "status error" : "status";
}

function describeError(error: unknown): string {
  if (error instanceof FormValidationError) {
    return `${error.code}: ${error.message}`;
  }
  if (error instanceof Error) {
    return error.message;
  }
  return String(error);
}

function show(next: WizardStep): void {
  step = next;
  for (const name of WIZARD_STEPS) {
    const panel = document.getElementById(`panel-${name}`);
    if (panel) {
      (panel as HTMLElement).hidden = name !== step;
    }
  }
  const nav = element<HTMLElement>("step-nav");
  nav.innerHTML = "";
  WIZARD_STEPS.forEach((name, index) => {
    const badge = document.createElement("span");
    badge.textContent = `${index + 1} ${name}`;
    if (name === step) {
      badge.className = "active";
    }
    nav.appendChild(badge);
  });
}

function goBack(): void {
  if (canGoBack(step)) {
    show(previousStep(step));
  }
}

async function ensureSession(): Promise<string> {
  if (sessionId === null) {
    sessionId = await client.createSession();
  }
  return sessionId;
}

function readForm(): SearchFormValues {
  const mode = (
    document.querySelector<HTMLInputElement>("input[name=mode]:checked")?.value ?? "optimal"
  ) as SearchMode;
  const form: SearchFormValues = {
    mode,
    evalWeight: Number(element<HTMLInputElement>("w-eval").value),
    maintenanceWeight: Number(element<HTMLInputElement>("w-maint").value),
    spaceWeight: Number(element<HTMLInputElement>("w-space").value),
    maxStates: Number(element<HTMLInputElement>("max-states").value),
    timeoutSeconds: Number(element<HTMLInputElement>("timeout").value),
  };
  const budget = element<HTMLInputElement>("budget").value.trim();
  if (budget !== "") {
    form.spaceBudget = budget;
  }
  return form;
}

function renderProgressPanel(): void {
  element<SVGPolylineElement & HTMLElement>("chart-line").setAttribute(
    "points",
    seriesToPolylinePoints(progress.bestSeries, { width: 800, height: 220, padding: 12 }),
  );
  const latestBest = progress.bestSeries[progress.bestSeries.length - 1];
  element<HTMLDivElement>("search-counters").textContent =
    `explored ${progress.explored} states — best total ${latestBest ?? "n/a"}`;
  const tbody = element<HTMLTableSectionElement>("node-list");
  tbody.innerHTML = "";
  for (const node of progress.nodes) {
    const row = document.createElement("tr");
    const kind = node.kind ?? "initial";
    row.innerHTML =
      `<td>${node.order}</td><td>${kind}</td>` +
      `<td class="mono">${node.total}</td><td class="mono">${node.space}</td>`;
    tbody.appendChild(row);
  }
}

function renderResultsPanel(): void {
  if (!result) {
    return;
  }
  const summary = summarizeBest(result);
  const costLine = element<HTMLDivElement>("result-cost");
  if (!summary) {
    costLine.textContent =
      `outcome: ${result.outcome}` + (result.message ? ` — ${result.message}` : "");
    element<HTMLTableSectionElement>("view-list").innerHTML = "";
    return;
  }
  const cost = summary.cost;
  costLine.textContent =
    `total ${cost.total} = evaluation ${cost.eval} + maintenance ${cost.maintenance}` +
    ` + space ${cost.space} (${result.terminated_by})`;
  const tbody = element<HTMLTableSectionElement>("view-list");
  tbody.innerHTML = "";
  for (const view of summary.views) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td class="mono">${view.name}</td><td class="mono">${view.body}</td>` +
      `<td>${view.estimatedRows}</td><td>${view.space}</td>` +
      `<td>${view.usedBy.join(", ")}</td>`;
    tbody.appendChild(row);
  }
}

async function pollProgress(): Promise<void> {
  if (polling || sessionId === null || job === null) {
    return;
  }
  polling = true;
  try {
    for (;;) {
      const page = await client.progress(sessionId, job, cursor);
      try {
        progress = renderSearchProgress(progress, page.events);
        cursor = page.cursor;
      } catch (error) {
        if (!(error instanceof OutOfOrderEvent)) {
          throw error;
        }
        progress = emptyProgress();
        cursor = 0;
        continue;
      }
      renderProgressPanel();
      if (page.done) {
        break;
      }
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
    result = await client.result(sessionId, job);
    renderResultsPanel();
    show("results");
    setStatus(`search ${job} finished: ${result.outcome}`);
  } finally {
    polling = false;
  }
}

function populateQueryNames(): void {
  const select = element<HTMLSelectElement>("query-name");
  select.innerHTML = "";
  for (const query of workloadSummary?.queries ?? []) {
    const option = document.createElement("option");
    option.value = query.name;
    option.textContent = `${query.name} (weight ${query.weight})`;
    select.appendChild(option);
  }
}

function renderAnswer(answer: QueryResponse): void {
  const baseline = answer.timings.baseline?.toFixed(6) ?? "n/a";
  const views = answer.timings.views?.toFixed(6) ?? "n/a";
  const verdict = answer.match
    ? '<span class="match-yes">rows match</span>'
    : '<span class="match-no">rows differ</span>';
  element<HTMLDivElement>("query-timings").innerHTML =
    `baseline ${baseline}s — views ${views}s — ${verdict}`;
  element<HTMLTableRowElement>("query-columns").innerHTML = answer.columns
    .map((column) => `<th>?${column}</th>`)
    .join("");
  const tbody = element<HTMLTableSectionElement>("query-rows");
  tbody.innerHTML = "";
  for (const row of answer.rows) {
    const tr = document.createElement("tr");
    tr.innerHTML = row.map((value) => `<td class="mono">${value}</td>`).join("");
    tbody.appendChild(tr);
  }
}

function wire(): void {
  element<HTMLTextAreaElement>("dataset-input").value = EXAMPLE_DATASET;
  element<HTMLTextAreaElement>("workload-input").value = EXAMPLE_WORKLOAD;
  element<HTMLTextAreaElement>("schema-input").value = EXAMPLE_SCHEMA;
  element<HTMLInputElement>("vocab-type").value = "type";
  element<HTMLInputElement>("vocab-subclass").value = "subClassOf";
  element<HTMLInputElement>("vocab-subproperty").value = "subPropertyOf";
  element<HTMLInputElement>("vocab-domain").value = "domain";
  element<HTMLInputElement>("vocab-range").value = "range";

  element<HTMLButtonElement>("dataset-next").onclick = async () => {
    try {
      const sid = await ensureSession();
      const summary = await client.putDataset(
        sid,
        element<HTMLTextAreaElement>("dataset-input").value,
      );
      element<HTMLSpanElement>("dataset-summary").textContent =
        `${summary.triples} triples, ${summary.terms} terms, ${summary.properties} properties`;
      setStatus(`session ${sid}`);
      show("workload");
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("workload-next").onclick = async () => {
    try {
      workloadSummary = await client.putWorkload(
        sessionId!,
        element<HTMLTextAreaElement>("workload-input").value,
      );
      element<HTMLSpanElement>("workload-summary").textContent =
        workloadSummary.queries.map((q) => `${q.name}×${q.weight}`).join(", ");
      populateQueryNames();
      show("schema");
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("schema-next").onclick = async () => {
    try {
      const text = element<HTMLTextAreaElement>("schema-input").value.trim();
      if (text !== "") {
        const summary = await client.putSchema(sessionId!, text, {
          type: element<HTMLInputElement>("vocab-type").value || undefined,
          subclass: element<HTMLInputElement>("vocab-subclass").value || undefined,
          subproperty: element<HTMLInputElement>("vocab-subproperty").value || undefined,
          domain: element<HTMLInputElement>("vocab-domain").value || undefined,
          range: element<HTMLInputElement>("vocab-range").value || undefined,
        });
        element<HTMLSpanElement>("schema-summary").textContent =
          `${summary.subclass} subclass, ${summary.subproperty} subproperty, ` +
          `${summary.domain} domain, ${summary.range} range statements`;
      }
      show("configure");
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("configure-run").onclick = async () => {
    try {
      const request = buildSearchRequest(readForm());
      progress = emptyProgress();
      cursor = 0;
      result = null;
      job = await client.startSearch(sessionId!, request);
      setStatus(`started ${job} (${request.strategy})`);
      show("searching");
      renderProgressPanel();
      void pollProgress().catch((error) => setStatus(describeError(error), true));
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("results-next").onclick = async () => {
    try {
      const materialized = await client.materialize(sessionId!, job ?? undefined);
      const sizes = Object.entries(materialized.views)
        .map(([name, rows]) => `${name}: ${rows} rows`)
        .join(", ");
      element<HTMLSpanElement>("materialize-summary").textContent = sizes;
      show("console");
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("query-run").onclick = async () => {
    try {
      const name = element<HTMLSelectElement>("query-name").value;
      renderAnswer(await client.query(sessionId!, name, "both"));
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("sql-show").onclick = async () => {
    try {
      const sql = element<HTMLPreElement>("sql-output");
      sql.textContent = await client.exportSql(sessionId!);
      sql.hidden = false;
    } catch (error) {
      setStatus(describeError(error), true);
    }
  };

  element<HTMLButtonElement>("workload-back").onclick = goBack;
  element<HTMLButtonElement>("schema-back").onclick = goBack;
  element<HTMLButtonElement>("configure-back").onclick = goBack;
  element<HTMLButtonElement>("results-back").onclick = goBack;
  element<HTMLButtonElement>("console-back").onclick = goBack;

  show("dataset");
}

wire();
