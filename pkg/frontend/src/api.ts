/** Typed client for the tuning service's HTTP API.
 *
 * One method per endpoint, nothing else: the wizard never talks to
 * the server except through this class.  The fetch function is
 * injectable so tests can record or script the traffic.
 */

export interface DatasetSummary {
  triples: number;
  terms: number;
  properties: number;
  parsed: number;
}

export interface SchemaSummary {
  subclass: number;
  subproperty: number;
  domain: number;
  range: number;
  ignored: number;
}

export interface WorkloadQuerySummary {
  name: string;
  weight: string;
  atoms: number;
  head: string[];
}

export interface WorkloadSummary {
  queries: WorkloadQuerySummary[];
}

export interface SchemaVocabulary {
  type?: string;
  subclass?: string;
  subproperty?: string;
  domain?: string;
  range?: string;
}

export interface SearchRequestDoc {
  strategy: string;
  weights: { eval: number | string; maintenance: number | string; space: number | string };
  space_budget?: number | string | null;
  max_states?: number;
  timeout?: number;
  allow_property_cuts?: boolean;
  branch_cap?: number;
  seed?: number;
}

export interface TransitionDoc {
  kind: string;
  view: string;
  atom?: number;
  position?: string;
  variable?: string;
  other?: string;
}

export interface ProgressEventDoc {
  order: number;
  sig: string;
  parent: string | null;
  transition: TransitionDoc | null;
  total: string;
  space: string;
  best_sig: string | null;
  best_total: string | null;
  explored: number;
}

export interface PlanDoc {
  op: "scan" | "select" | "join" | "project" | "union";
  view?: string;
  columns?: string[];
  column?: string;
  value?: number;
  on?: [string, string][];
  left?: PlanDoc;
  right?: PlanDoc;
  child?: PlanDoc;
  children?: PlanDoc[];
}

export interface ViewDoc {
  name: string;
  body: string;
  head: string[];
}

export interface StateDoc {
  views: ViewDoc[];
  rewritings: Record<string, { plan: PlanDoc }>;
}

export interface CostDoc {
  eval: string;
  maintenance: string;
  space: string;
  total: string;
  per_view: Record<string, string>;
  per_query: Record<string, string>;
}

export interface SearchResultDoc {
  outcome: string;
  terminated_by?: string;
  counters?: Record<string, number>;
  best: StateDoc | null;
  best_cost: CostDoc | null;
  error?: string;
  message?: string;
}

export interface ProgressPage {
  events: ProgressEventDoc[];
  cursor: number;
  done: boolean;
  result: SearchResultDoc | null;
}

export interface MaterializeSummary {
  job: string;
  views: Record<string, number>;
}

export interface QueryResponse {
  name: string;
  mode: string;
  columns: string[];
  rows: string[][];
  timings: { baseline?: number; views?: number };
  match?: boolean;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = `http-${response.status}`;
  let message = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    code = body.error ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(response.status, code, message);
}

async function unwrapText(response: Response): Promise<string> {
  if (response.ok) {
    return response.text();
  }
  return unwrap<string>(response);
}

/** The operations the wizard needs; ApiClient is the HTTP
 * implementation, tests substitute scripted ones. */
export interface TuningApi {
  createSession(id?: string): Promise<string>;
  putDataset(sid: string, ntriples: string): Promise<DatasetSummary>;
  putSchema(
    sid: string,
    ntriples: string,
    vocabulary?: SchemaVocabulary,
  ): Promise<SchemaSummary>;
  putWorkload(sid: string, workloadJson: string): Promise<WorkloadSummary>;
  startSearch(sid: string, config: SearchRequestDoc): Promise<string>;
  progress(sid: string, job: string, cursor: number): Promise<ProgressPage>;
  result(sid: string, job: string): Promise<SearchResultDoc>;
  materialize(sid: string, job?: string): Promise<MaterializeSummary>;
  query(
    sid: string,
    name: string,
    mode?: "views" | "baseline" | "both",
  ): Promise<QueryResponse>;
  exportSql(sid: string): Promise<string>;
}

export class ApiClient implements TuningApi {
  private readonly fetchFn: FetchFn;

  constructor(
    public readonly baseUrl: string,
    fetchFn?: FetchFn,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<{ service: string; version: string }> {
    return unwrap(await this.fetchFn(this.url("/health")));
  }

  async createSession(id?: string): Promise<string> {
    const body = (await unwrap<{ session: string }>(
      await this.fetchFn(this.url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(id ? { id } : {}),
      }),
    )) as { session: string };
    return body.session;
  }

  async putDataset(sid: string, ntriples: string): Promise<DatasetSummary> {
    return unwrap(
      await this.fetchFn(this.url(`/sessions/${sid}/dataset`), {
        method: "POST",
        headers: { "content-type": "text/plain" },
        body: ntriples,
      }),
    );
  }

  async putSchema(
    sid: string,
    ntriples: string,
    vocabulary?: SchemaVocabulary,
  ): Promise<SchemaSummary> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(vocabulary ?? {})) {
      if (value) params.set(key, value);
    }
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return unwrap(
      await this.fetchFn(this.url(`/sessions/${sid}/schema${suffix}`), {
        method: "POST",
        headers: { "content-type": "text/plain" },
        body: ntriples,
      }),
    );
  }

  async putWorkload(sid: string, workloadJson: string): Promise<WorkloadSummary> {
    return unwrap(
      await this.fetchFn(this.url(`/sessions/${sid}/workload`), {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: workloadJson,
      }),
    );
  }

  async startSearch(sid: string, config: SearchRequestDoc): Promise<string> {
    const body = await unwrap<{ job: string }>(
      await this.fetchFn(this.url(`/sessions/${sid}/search`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(config),
      }),
    );
    return body.job;
  }

  async progress(sid: string, job: string, cursor: number): Promise<ProgressPage> {
    return unwrap(
      await this.fetchFn(
        this.url(`/sessions/${sid}/search/${job}/progress?cursor=${cursor}`),
      ),
    );
  }

  async result(sid: string, job: string): Promise<SearchResultDoc> {
    return unwrap(await this.fetchFn(this.url(`/sessions/${sid}/search/${job}/result`)));
  }

  async materialize(sid: string, job?: string): Promise<MaterializeSummary> {
    return unwrap(
      await this.fetchFn(this.url(`/sessions/${sid}/materialize`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(job ? { job } : {}),
      }),
    );
  }

  async query(
    sid: string,
    name: string,
    mode: "views" | "baseline" | "both" = "both",
  ): Promise<QueryResponse> {
    return unwrap(
      await this.fetchFn(this.url(`/sessions/${sid}/query`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ name, mode }),
      }),
    );
  }

  async exportSql(sid: string): Promise<string> {
    return unwrapText(await this.fetchFn(this.url(`/sessions/${sid}/export/sql`)));
  }
}
