/**
 * Typed client for the search service. The JSON schema of /search and
 * /classes is the only contract with the backend; responses that do not
 * match it are rejected before anything reaches the DOM.
 */

export interface SearchResult {
  url: string;
  title: string | null;
  snippet: string | null;
  class: string | null;
  score: number;
}

export interface SearchResponse {
  query: string;
  count: number;
  results: SearchResult[];
}

export interface ApiError {
  code: string;
  message?: string;
}

export type Prefixes = Record<string, string>;

export interface ClassNode {
  iri: string;
  label: string | null;
  instances: number;
  children: ClassNode[];
}

export interface ClassesResponse {
  classes: ClassNode[];
  prefixes: Prefixes;
}

export type Fetcher = (url: string) => Promise<Response>;

/** The service answered with a machine-readable error code. */
export class RequestFailed extends Error {
  constructor(public readonly code: string, message?: string) {
    super(message ?? code);
    this.name = "RequestFailed";
  }
}

/** The service answered 200 but the payload failed schema validation. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export function searchUrl(q: string, k: number): string {
  return `/search?q=${encodeURIComponent(q)}&k=${encodeURIComponent(String(k))}`;
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function optionalString(x: unknown): boolean {
  return x === null || typeof x === "string";
}

export function isSearchResult(x: unknown): x is SearchResult {
  return (
    isRecord(x) &&
    typeof x.url === "string" &&
    optionalString(x.title) &&
    optionalString(x.snippet) &&
    optionalString(x.class) &&
    typeof x.score === "number" &&
    Number.isFinite(x.score)
  );
}

export function isSearchResponse(x: unknown): x is SearchResponse {
  return (
    isRecord(x) &&
    typeof x.query === "string" &&
    typeof x.count === "number" &&
    Array.isArray(x.results) &&
    x.results.length === x.count &&
    x.results.every(isSearchResult)
  );
}

export function isApiError(x: unknown): x is ApiError {
  return isRecord(x) && typeof x.code === "string";
}

function isClassesResponse(x: unknown): x is ClassesResponse {
  if (!isRecord(x) || !isRecord(x.prefixes) || !Array.isArray(x.classes)) {
    return false;
  }
  return Object.values(x.prefixes).every((v) => typeof v === "string");
}

async function bodyOf(resp: Response): Promise<unknown> {
  try {
    return await resp.json();
  } catch {
    return null;
  }
}

export async function fetchSearch(
  q: string,
  k: number,
  fetcher: Fetcher,
): Promise<SearchResponse> {
  const resp = await fetcher(searchUrl(q, k));
  const body = await bodyOf(resp);
  if (!resp.ok) {
    throw new RequestFailed(
      isApiError(body) ? body.code : `http_${resp.status}`,
      isApiError(body) ? body.message : undefined,
    );
  }
  if (!isSearchResponse(body)) {
    throw new SchemaError("search response did not match the documented schema");
  }
  return body;
}

/** Prefix map for badge compression; missing or broken /classes is non-fatal. */
export async function fetchPrefixes(fetcher: Fetcher): Promise<Prefixes> {
  try {
    const resp = await fetcher("/classes");
    const body = await bodyOf(resp);
    if (resp.ok && isClassesResponse(body)) {
      return body.prefixes;
    }
  } catch {
    // fall through: badges simply show full IRIs
  }
  return {};
}
