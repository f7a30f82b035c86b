/** All client-side state and transitions, kept free of DOM so it is testable.
 *
 * The whole UI is reconstructible from (form state, last response): a pair
 * view is just a pointer into the last response plus the fetched article,
 * and "back" re-renders the kept response without another query.
 */

import { NetworkError, ServiceError, ServiceClient } from "./api.js";
import {
  ArticleRecord,
  MAX_K,
  MIN_K,
  QueryFormState,
  SearchHit,
  SearchResponse,
} from "./types.js";

export type Validation = { ok: true } | { ok: false; reason: string };

export function validateForm(form: QueryFormState): Validation {
  if (!form.text.trim()) {
    return { ok: false, reason: "paste an article to search for" };
  }
  if (!Number.isInteger(form.k) || form.k < MIN_K || form.k > MAX_K) {
    return { ok: false, reason: `k must be a whole number from ${MIN_K} to ${MAX_K}` };
  }
  return { ok: true };
}

export type View =
  | { kind: "idle" }
  | { kind: "loading" }
  | { kind: "results" }
  | { kind: "pair"; hit: SearchHit; article: ArticleRecord; showMasked: boolean }
  | { kind: "error"; message: string; retryable: boolean }
  | { kind: "stale"; message: string };

export class AppController {
  form: QueryFormState = { text: "", k: 5, mask: true };
  lastResponse: SearchResponse | null = null;
  view: View = { kind: "idle" };

  private inFlight = 0;

  constructor(private client: ServiceClient) {}

  canSubmit(): boolean {
    return validateForm(this.form).ok;
  }

  /** POST /search. A newer submit wins: stale replies are dropped unseen. */
  async submit(): Promise<void> {
    const valid = validateForm(this.form);
    if (!valid.ok) {
      this.view = { kind: "error", message: valid.reason, retryable: false };
      return;
    }
    const token = ++this.inFlight;
    this.view = { kind: "loading" };
    try {
      const response = await this.client.search({ ...this.form });
      if (token !== this.inFlight) return; // superseded by a newer submit
      this.lastResponse = response;
      this.view = { kind: "results" };
    } catch (err) {
      if (token !== this.inFlight) return;
      if (err instanceof NetworkError) {
        this.view = { kind: "error", message: err.message, retryable: true };
      } else if (err instanceof ServiceError) {
        // 400s are validation echoes; 503s carry the failed stage name.
        this.view = { kind: "error", message: err.message, retryable: false };
      } else {
        this.view = { kind: "error", message: String(err), retryable: false };
      }
    }
  }

  /** GET /article/{id} for a hit in the current results, then show the pair. */
  async openPair(hitId: string): Promise<void> {
    const hit = this.lastResponse?.hits.find((h) => h.id === hitId);
    if (!hit) return; // only hits from the current response are openable
    try {
      const article = await this.client.article(hitId);
      this.view = { kind: "pair", hit, article, showMasked: false };
    } catch (err) {
      if (err instanceof ServiceError && err.status === 404) {
        this.view = {
          kind: "stale",
          message: "that article is no longer served; run the search again",
        };
      } else if (err instanceof NetworkError) {
        this.view = { kind: "error", message: err.message, retryable: true };
      } else {
        this.view = { kind: "error", message: String(err), retryable: false };
      }
    }
  }

  /** Swap the left pane between the raw query and the service's masked_query. */
  toggleMasked(): void {
    if (this.view.kind === "pair") {
      this.view = { ...this.view, showMasked: !this.view.showMasked };
    }
  }

  /** Leave the pair view; the kept response renders again, no re-query. */
  back(): void {
    this.view = this.lastResponse ? { kind: "results" } : { kind: "idle" };
  }
}
