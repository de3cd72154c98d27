/**
 * DOM rendering for search results. Pure functions of the last response:
 * the same payload always produces the same DOM structure, and every
 * state swap is atomic (rows are built off-document, then replaced in
 * one step, so nothing is ever partially rendered).
 */

import type { Prefixes, SearchResponse } from "./api.js";

/** Longest-namespace prefix compression; unknown namespaces stay full IRIs. */
export function compressIri(iri: string, prefixes: Prefixes): string {
  let best: { label: string; ns: string } | null = null;
  for (const [label, ns] of Object.entries(prefixes)) {
    if (iri.startsWith(ns) && (best === null || ns.length > best.ns.length)) {
      best = { label, ns };
    }
  }
  if (best === null) {
    return iri;
  }
  return `${best.label}:${iri.slice(best.ns.length)}`;
}

function resultRow(
  doc: Document,
  result: SearchResponse["results"][number],
  prefixes: Prefixes,
): HTMLLIElement {
  const li = doc.createElement("li");
  li.className = "result";

  const head = doc.createElement("div");
  head.className = "result-head";

  const link = doc.createElement("a");
  link.className = "result-title";
  link.href = result.url;
  link.target = "_blank";
  link.rel = "noopener";
  link.textContent = result.title ?? result.url;
  head.appendChild(link);

  if (result.class !== null) {
    const badge = doc.createElement("span");
    badge.className = "badge";
    badge.textContent = compressIri(result.class, prefixes);
    head.appendChild(badge);
  }

  const score = doc.createElement("span");
  score.className = "score";
  score.textContent = result.score.toFixed(2);
  head.appendChild(score);

  li.appendChild(head);

  const url = doc.createElement("div");
  url.className = "result-url";
  url.textContent = result.url;
  li.appendChild(url);

  if (result.snippet !== null && result.snippet !== "") {
    const snippet = doc.createElement("p");
    snippet.className = "snippet";
    snippet.textContent = result.snippet;
    li.appendChild(snippet);
  }
  return li;
}

export function renderResults(
  list: HTMLElement,
  status: HTMLElement,
  response: SearchResponse,
  prefixes: Prefixes,
): void {
  const doc = list.ownerDocument;
  status.textContent = "";
  status.className = "status";
  if (response.results.length === 0) {
    const empty = doc.createElement("li");
    empty.className = "no-matches";
    empty.textContent = `No matches for "${response.query}".`;
    list.replaceChildren(empty);
    return;
  }
  list.replaceChildren(...response.results.map((r) => resultRow(doc, r, prefixes)));
}

export function renderLoading(list: HTMLElement, status: HTMLElement, query: string): void {
  status.className = "status loading";
  status.textContent = `Searching for "${query}"…`;
}

export function renderError(
  list: HTMLElement,
  status: HTMLElement,
  code: string,
  onRetry?: () => void,
): void {
  const doc = list.ownerDocument;
  list.replaceChildren();
  status.className = "status error";
  status.textContent = "";
  const banner = doc.createElement("span");
  banner.className = "error-code";
  banner.textContent = `Search failed: ${code}`;
  status.appendChild(banner);
  if (onRetry) {
    const retry = doc.createElement("button");
    retry.type = "button";
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", onRetry);
    status.appendChild(retry);
  }
}
