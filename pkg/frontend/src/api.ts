/** Typed client for the knowledge-base JSON API (same-origin paths). */

export interface Statement {
  p: string;
  o: string;
  o_kind: "entity" | "literal";
}

export interface EntityPage {
  label: string;
  iri_local: string;
  statements: Statement[];
  incoming_count: number;
  bfsLayer?: string;
  bfsParents?: string[];
}

export interface Suggestion {
  label: string;
  iri_local: string;
}

export interface SearchResponse {
  total: number;
  results: Suggestion[];
}

export interface QueryTerm {
  type: string;
  value: string;
  datatype?: string;
}

export interface QueryResponse {
  head: { vars: string[] };
  results: { bindings: Record<string, QueryTerm>[] };
  elapsed_ms: number;
}

export interface QueryErrorBody {
  error: string;
  type?: "syntax" | "unsupported";
  line?: number;
  col?: number;
  timeout_seconds?: number;
  elapsed_ms?: number;
  suggestions?: Suggestion[];
}

export interface CompareRunInfo {
  name: string;
  models: string[];
  entities: string[];
}

export interface DiffRow {
  predicate: string;
  object_a: string | null;
  o_kind_a: string | null;
  verdict_a: string | null;
  object_b: string | null;
  o_kind_b: string | null;
  verdict_b: string | null;
}

export interface DiffView {
  entity: string;
  model_a: string;
  model_b: string;
  totals: Record<string, Record<string, number>>;
  rows: DiffRow[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: QueryErrorBody,
  ) {
    super(body.error ?? `HTTP ${status}`);
  }
}

const SAFE = /[A-Za-z0-9.~-]/;

/** Mirror of the backend's URL-safe label encoding (space -> "_", "_" -> %5F). */
export function encodeEntityIri(label: string): string {
  let out = "";
  for (const ch of label) {
    if (ch === " ") {
      out += "_";
    } else if (SAFE.test(ch) && ch.length === 1 && ch.charCodeAt(0) < 128) {
      out += ch;
    } else {
      for (const byte of new TextEncoder().encode(ch)) {
        out += "%" + byte.toString(16).toUpperCase().padStart(2, "0");
      }
    }
  }
  return out;
}

export const endpoints = {
  search: (q: string, limit = 20) =>
    `/search?q=${encodeURIComponent(q)}&limit=${limit}`,
  entity: (iriLocal: string) => `/entity/${iriLocal}`,
  query: () => `/query`,
  compareRuns: () => `/compare/runs`,
  compareDiff: (run: string, a: string, b: string, entityIri: string) =>
    `/compare/${encodeURIComponent(run)}/${encodeURIComponent(a)}/${encodeURIComponent(b)}/${entityIri}`,
};

async function asJson<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body as QueryErrorBody);
  }
  return body as T;
}

export function searchEntities(q: string, limit = 20): Promise<SearchResponse> {
  return fetch(endpoints.search(q, limit)).then((r) => asJson<SearchResponse>(r));
}

export function getEntity(iriLocal: string): Promise<EntityPage> {
  return fetch(endpoints.entity(iriLocal)).then((r) => asJson<EntityPage>(r));
}

export function runQuery(text: string): Promise<QueryResponse> {
  return fetch(endpoints.query(), {
    method: "POST",
    headers: { "Content-Type": "application/sparql-query" },
    body: text,
  }).then((r) => asJson<QueryResponse>(r));
}

export function getCompareRuns(): Promise<{ runs: CompareRunInfo[] }> {
  return fetch(endpoints.compareRuns()).then((r) => asJson<{ runs: CompareRunInfo[] }>(r));
}

export function getCompareDiff(
  run: string,
  modelA: string,
  modelB: string,
  entityLabel: string,
): Promise<DiffView> {
  return fetch(endpoints.compareDiff(run, modelA, modelB, encodeEntityIri(entityLabel))).then(
    (r) => asJson<DiffView>(r),
  );
}
