/** Thin typed client for the query service; the only I/O in the app. */

import { ArticleRecord, QueryFormState, SearchResponse } from "./types.js";

/** The service answered, but with an error status (400/404/503/...). */
export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ServiceError";
  }
}

/** The service could not be reached at all; worth offering a retry. */
export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `service replied ${response.status}`;
}

export interface ServiceClient {
  search(form: QueryFormState): Promise<SearchResponse>;
  article(id: string): Promise<ArticleRecord>;
}

export function createClient(
  baseUrl: string,
  fetchImpl: typeof fetch = fetch,
): ServiceClient {
  const base = baseUrl.replace(/\/+$/, "");

  async function post(path: string, payload: unknown): Promise<unknown> {
    let response: Response;
    try {
      response = await fetchImpl(`${base}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new NetworkError(`cannot reach ${base}: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ServiceError(await errorDetail(response), response.status);
    }
    return response.json();
  }

  async function get(path: string): Promise<unknown> {
    let response: Response;
    try {
      response = await fetchImpl(`${base}${path}`);
    } catch (err) {
      throw new NetworkError(`cannot reach ${base}: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ServiceError(await errorDetail(response), response.status);
    }
    return response.json();
  }

  return {
    async search(form: QueryFormState): Promise<SearchResponse> {
      const body = await post("/search", {
        text: form.text,
        k: form.k,
        mask: form.mask,
      });
      return body as SearchResponse;
    },

    async article(id: string): Promise<ArticleRecord> {
      const body = await get(`/article/${encodeURIComponent(id)}`);
      return body as ArticleRecord;
    },
  };
}

/** Service URL resolution at load: global override, ?service=, then default. */
export function resolveServiceUrl(
  globals: { NDV_SERVICE_URL?: string },
  queryString: string,
  fallback = "http://127.0.0.1:8080",
): string {
  if (globals.NDV_SERVICE_URL) return globals.NDV_SERVICE_URL;
  const fromQuery = new URLSearchParams(queryString).get("service");
  return fromQuery ?? fallback;
}
