/** Pure HTML-string renderers; the DOM glue in app.ts just assigns innerHTML.
 *
 * Hits render strictly in response order with their scores, never re-sorted
 * or re-scored client-side. Dates and sources stay visible everywhere so a
 * reader can weigh how much era and outlet should color their judgment.
 */

import { ArticleRecord, SearchHit, SearchResponse } from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function formatScore(score: number): string {
  return score.toFixed(3);
}

export function renderHitCard(hit: SearchHit, rank: number): string {
  const headline = hit.headline ? escapeHtml(hit.headline) : "(no headline)";
  const meta = `${escapeHtml(hit.source ?? "?")} · ${escapeHtml(hit.date ?? "?")}`;
  const snippet = hit.snippet ? escapeHtml(hit.snippet) : "";
  return `
    <article class="hit-card" data-hit-id="${escapeHtml(hit.id)}">
      <header>
        <span class="rank">#${rank}</span>
        <span class="score">${formatScore(hit.score)}</span>
      </header>
      <h3>${headline}</h3>
      <p class="meta">${meta}</p>
      <p class="snippet">${snippet}</p>
      <button class="open-pair" data-hit-id="${escapeHtml(hit.id)}">read side by side</button>
    </article>`;
}

export function renderResults(response: SearchResponse): string {
  if (response.hits.length === 0) {
    return `<p class="empty">no articles in range</p>`;
  }
  const cards = response.hits
    .map((hit, i) => renderHitCard(hit, i + 1))
    .join("\n");
  return `
    <p class="timing">${response.hits.length} result(s) in ${response.timing_ms} ms</p>
    <div class="hit-list">${cards}</div>`;
}

export function renderPair(
  queryText: string,
  maskedQuery: string,
  showMasked: boolean,
  hit: SearchHit,
  article: ArticleRecord,
): string {
  const left = showMasked ? maskedQuery : queryText;
  const leftLabel = showMasked ? "your query (masked)" : "your query";
  const headline = article.headline ? escapeHtml(article.headline) : "(no headline)";
  return `
    <div class="pair-view">
      <div class="pane pane-left">
        <h2>${leftLabel}</h2>
        <p class="meta">modern query</p>
        <pre class="body">${escapeHtml(left)}</pre>
        <button id="toggle-mask">${showMasked ? "show original" : "show masked query"}</button>
      </div>
      <div class="pane pane-right">
        <h2>${headline}</h2>
        <p class="meta">${escapeHtml(article.source)} · ${escapeHtml(article.date)}
          · score ${formatScore(hit.score)}</p>
        <pre class="body">${escapeHtml(article.text)}</pre>
      </div>
    </div>
    <button id="back-to-results">back to results</button>`;
}

export function renderError(message: string, retryable: boolean): string {
  const retry = retryable ? `<button id="retry-search">retry</button>` : "";
  return `<div class="banner error">${escapeHtml(message)} ${retry}</div>`;
}

export function renderStale(message: string): string {
  return `<div class="banner stale">${escapeHtml(message)}
    <button id="rerun-search">search again</button></div>`;
}

export function renderLoading(): string {
  return `<p class="loading">searching…</p>`;
}
