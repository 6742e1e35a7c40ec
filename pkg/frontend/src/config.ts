/** Search-configuration form: validation and request building.
 *
 * The configure step offers two search modes — "quick" runs the
 * stratified greedy strategy, "optimal" the exhaustive breadth-first
 * one — plus three weight sliders that map one-to-one onto the
 * evaluation / maintenance / space weights, an optional space budget,
 * and the state/time limits.  Validation happens client-side with the
 * same error code the server would use, so a rejected form never
 * leaves the browser.
 */

import { parseFraction } from "./fraction.js";
import type { SearchRequestDoc } from "./api.js";

export type SearchMode = "quick" | "optimal";

export interface SearchFormValues {
  mode: SearchMode;
  evalWeight: number | string;
  maintenanceWeight: number | string;
  spaceWeight: number | string;
  spaceBudget?: number | string | null;
  maxStates?: number;
  timeoutSeconds?: number;
}

export const MODE_STRATEGIES: Record<SearchMode, string> = {
  quick: "stratified-greedy",
  optimal: "exhaustive-bfs",
};

export class FormValidationError extends Error {
  constructor(
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "FormValidationError";
  }
}

function invalid(message: string): FormValidationError {
  return new FormValidationError("invalid-config", message);
}

/** Sign of a weight or budget value: numbers directly, fraction
 * strings exactly. */
function valueSign(label: string, value: number | string): -1 | 0 | 1 {
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw invalid(`${label} must be a finite number`);
    }
    return value < 0 ? -1 : value > 0 ? 1 : 0;
  }
  try {
    const { num } = parseFraction(value);
    return num < 0n ? -1 : num > 0n ? 1 : 0;
  } catch {
    throw invalid(`${label} is not a number or fraction: ${JSON.stringify(value)}`);
  }
}

/** Validate form values and build the search request document. */
export function buildSearchRequest(form: SearchFormValues): SearchRequestDoc {
  const weights = [
    ["evaluation weight", form.evalWeight],
    ["maintenance weight", form.maintenanceWeight],
    ["space weight", form.spaceWeight],
  ] as const;
  let allZero = true;
  for (const [label, value] of weights) {
    const sign = valueSign(label, value);
    if (sign < 0) {
      throw invalid(`${label} must be nonnegative`);
    }
    if (sign !== 0) {
      allZero = false;
    }
  }
  if (allZero) {
    throw invalid("weights cannot all be zero");
  }

  const request: SearchRequestDoc = {
    strategy: MODE_STRATEGIES[form.mode],
    weights: {
      eval: form.evalWeight,
      maintenance: form.maintenanceWeight,
      space: form.spaceWeight,
    },
  };

  if (form.spaceBudget !== undefined && form.spaceBudget !== null && form.spaceBudget !== "") {
    if (valueSign("space budget", form.spaceBudget) < 0) {
      throw invalid("space budget must be nonnegative");
    }
    request.space_budget = form.spaceBudget;
  }
  if (form.maxStates !== undefined) {
    if (!Number.isInteger(form.maxStates) || form.maxStates <= 0) {
      throw invalid("state limit must be a positive integer");
    }
    request.max_states = form.maxStates;
  }
  if (form.timeoutSeconds !== undefined) {
    if (!Number.isFinite(form.timeoutSeconds) || form.timeoutSeconds <= 0) {
      throw invalid("timeout must be positive");
    }
    request.timeout = form.timeoutSeconds;
  }
  return request;
}
