/** The wizard itself: step order, back-navigation rules, and the
 * scripted end-to-end driver.
 *
 * Steps run dataset → workload → schema → configure → searching →
 * results → console.  Back-navigation is allowed everywhere except
 * out of `searching` (a running job cannot be abandoned from the
 * wizard) and, going back from the results, the searching step is
 * skipped so the user lands on configure to re-tune and re-run.
 *
 * runWizard drives one complete pass over the HTTP client: create a
 * session, upload the three inputs, start a search, poll its
 * progress with one in-flight request at a time, then materialize
 * the winner, answer the chosen queries in both modes, and export
 * the SQL script.  It issues exactly those API calls in that order.
 */

import type {
  DatasetSummary,
  MaterializeSummary,
  QueryResponse,
  SchemaSummary,
  SchemaVocabulary,
  SearchResultDoc,
  TuningApi,
  WorkloadSummary,
} from "./api.js";
import { buildSearchRequest, SearchFormValues } from "./config.js";
import {
  emptyProgress,
  OutOfOrderEvent,
  ProgressViewModel,
  renderSearchProgress,
} from "./progress.js";
import { BestSummary, summarizeBest } from "./views.js";

export const WIZARD_STEPS = [
  "dataset",
  "workload",
  "schema",
  "configure",
  "searching",
  "results",
  "console",
] as const;

export type WizardStep = (typeof WIZARD_STEPS)[number];

export interface WizardState {
  step: WizardStep;
  sessionId: string | null;
  form: SearchFormValues;
  cursor: number;
  progress: ProgressViewModel;
  job: string | null;
  best: BestSummary | null;
}

export function initialWizard(form: SearchFormValues): WizardState {
  return {
    step: "dataset",
    sessionId: null,
    form,
    cursor: 0,
    progress: emptyProgress(),
    job: null,
    best: null,
  };
}

export function nextStep(step: WizardStep): WizardStep {
  const index = WIZARD_STEPS.indexOf(step);
  if (index < 0 || index === WIZARD_STEPS.length - 1) {
    throw new Error(`no step after ${step}`);
  }
  return WIZARD_STEPS[index + 1];
}

export function canGoBack(step: WizardStep): boolean {
  return step !== "dataset" && step !== "searching";
}

export function previousStep(step: WizardStep): WizardStep {
  if (!canGoBack(step)) {
    throw new Error(`cannot navigate back from ${step}`);
  }
  const index = WIZARD_STEPS.indexOf(step);
  const before = WIZARD_STEPS[index - 1];
  return before === "searching" ? "configure" : before;
}

export interface WizardInputs {
  sessionId?: string;
  dataset: string;
  workload: string;
  schema?: { text: string; vocabulary?: SchemaVocabulary };
  form: SearchFormValues;
  queryNames: string[];
}

export interface WizardHooks {
  onState?: (state: WizardState) => void;
  pollDelayMs?: number;
}

export interface WizardOutcome {
  state: WizardState;
  datasetSummary: DatasetSummary;
  workloadSummary: WorkloadSummary;
  schemaSummary: SchemaSummary | null;
  job: string;
  result: SearchResultDoc;
  best: BestSummary | null;
  materialized: MaterializeSummary | null;
  answers: Record<string, QueryResponse>;
  sql: string;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** One scripted pass through every wizard step. */
export async function runWizard(
  client: TuningApi,
  inputs: WizardInputs,
  hooks: WizardHooks = {},
): Promise<WizardOutcome> {
  const pollDelay = hooks.pollDelayMs ?? 150;
  let state = initialWizard(inputs.form);
  const emit = (changes: Partial<WizardState>): void => {
    state = { ...state, ...changes };
    hooks.onState?.(state);
  };

  const sessionId = await client.createSession(inputs.sessionId);
  emit({ sessionId });

  const datasetSummary = await client.putDataset(sessionId, inputs.dataset);
  emit({ step: nextStep(state.step) });

  const workloadSummary = await client.putWorkload(sessionId, inputs.workload);
  emit({ step: nextStep(state.step) });

  let schemaSummary: SchemaSummary | null = null;
  if (inputs.schema) {
    schemaSummary = await client.putSchema(
      sessionId,
      inputs.schema.text,
      inputs.schema.vocabulary,
    );
  }
  emit({ step: nextStep(state.step) });

  const request = buildSearchRequest(inputs.form);
  const job = await client.startSearch(sessionId, request);
  emit({ step: nextStep(state.step), job });

  for (;;) {
    const page = await client.progress(sessionId, job, state.cursor);
    try {
      const progress = renderSearchProgress(state.progress, page.events);
      emit({ progress, cursor: page.cursor });
    } catch (error) {
      if (!(error instanceof OutOfOrderEvent)) {
        throw error;
      }
      emit({ progress: emptyProgress(), cursor: 0 });
      continue;
    }
    if (page.done) {
      break;
    }
    if (pollDelay > 0) {
      await sleep(pollDelay);
    }
  }
  const result = await client.result(sessionId, job);

  const best = summarizeBest(result);
  emit({ step: nextStep(state.step), best });

  let materialized: MaterializeSummary | null = null;
  const answers: Record<string, QueryResponse> = {};
  if (best !== null) {
    materialized = await client.materialize(sessionId, job);
  }
  emit({ step: nextStep(state.step) });
  if (materialized !== null) {
    for (const name of inputs.queryNames) {
      answers[name] = await client.query(sessionId, name, "both");
    }
  }
  const sql = await client.exportSql(sessionId);

  return {
    state,
    datasetSummary,
    workloadSummary,
    schemaSummary,
    job,
    result,
    best,
    materialized,
    answers,
    sql,
  };
}
