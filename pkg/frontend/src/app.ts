/**
 * Page wiring: the query form drives /search; overlapping requests
 * resolve latest-wins through a monotonically increasing sequence
 * number, so a stale response can never overwrite a newer one.
 */

import {
  Fetcher,
  Prefixes,
  RequestFailed,
  fetchPrefixes,
  fetchSearch,
} from "./api.js";
import { renderError, renderLoading, renderResults } from "./render.js";

export interface AppController {
  /** Issue a search; resolves after the DOM reflects the outcome. */
  submit(query: string, k?: number): Promise<void>;
  readonly prefixesLoaded: Promise<void>;
}

export const DEFAULT_K = 10;

export function initApp(doc: Document, fetcher?: Fetcher): AppController {
  const form = doc.querySelector<HTMLFormElement>("#search-form");
  const input = doc.querySelector<HTMLInputElement>("#q");
  const kInput = doc.querySelector<HTMLInputElement>("#k");
  const status = doc.querySelector<HTMLElement>("#status");
  const list = doc.querySelector<HTMLElement>("#results");
  if (!form || !input || !status || !list) {
    throw new Error("search page is missing its form, status, or results elements");
  }
  const doFetch: Fetcher =
    fetcher ?? ((url) => doc.defaultView!.fetch(url));

  let prefixes: Prefixes = {};
  const prefixesLoaded = fetchPrefixes(doFetch).then((p) => {
    prefixes = p;
  });

  let seq = 0;

  async function submit(query: string, k: number = DEFAULT_K): Promise<void> {
    const mySeq = ++seq;
    renderLoading(list!, status!, query);
    try {
      const response = await fetchSearch(query, k, doFetch);
      if (mySeq !== seq) {
        return; // a newer query already resolved or is in flight
      }
      renderResults(list!, status!, response, prefixes);
    } catch (err) {
      if (mySeq !== seq) {
        return;
      }
      const code =
        err instanceof RequestFailed
          ? err.code
          : err instanceof Error && err.name === "SchemaError"
            ? "bad_response"
            : "network_error";
      renderError(list!, status!, code, () => void submit(query, k));
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = input.value.trim();
    if (!query) {
      return;
    }
    const k = kInput && kInput.value ? Number(kInput.value) : DEFAULT_K;
    void submit(query, Number.isFinite(k) && k >= 1 ? k : DEFAULT_K);
  });

  return { submit, prefixesLoaded };
}
