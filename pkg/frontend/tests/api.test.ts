import { describe, expect, it } from "vitest";

import { createClient, NetworkError, resolveServiceUrl, ServiceError } from "../src/api.js";

function fakeFetch(
  handler: (url: string, init?: RequestInit) => { status: number; body: unknown },
): typeof fetch {
  return (async (url: any, init?: any) => {
    const { status, body } = handler(String(url), init);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    } as Response;
  }) as typeof fetch;
}

describe("createClient.search", () => {
  it("posts the form to /search and returns the parsed body", async () => {
    let seen: { url?: string; payload?: any } = {};
    const client = createClient(
      "http://svc:8080/",
      fakeFetch((url, init) => {
        seen = { url, payload: JSON.parse(String(init?.body)) };
        return { status: 200, body: { hits: [], masked_query: "m", timing_ms: 1 } };
      }),
    );
    const out = await client.search({ text: "t", k: 3, mask: false });
    expect(seen.url).toBe("http://svc:8080/search");
    expect(seen.payload).toEqual({ text: "t", k: 3, mask: false });
    expect(out.masked_query).toBe("m");
  });

  it("surfaces the service's detail message on 400", async () => {
    const client = createClient(
      "http://svc",
      fakeFetch(() => ({ status: 400, body: { detail: "k must be an integer in 1..50" } })),
    );
    await expect(client.search({ text: "t", k: 0, mask: true })).rejects.toThrowError(
      ServiceError,
    );
    await expect(client.search({ text: "t", k: 0, mask: true })).rejects.toThrow(
      "k must be an integer",
    );
  });

  it("maps fetch failures to NetworkError", async () => {
    const failing = (async () => {
      throw new TypeError("connect ECONNREFUSED");
    }) as unknown as typeof fetch;
    const client = createClient("http://down", failing);
    await expect(client.search({ text: "t", k: 1, mask: true })).rejects.toThrowError(
      NetworkError,
    );
  });
});

describe("createClient.article", () => {
  it("percent-encodes the article id", async () => {
    let seen = "";
    const client = createClient(
      "http://svc",
      fakeFetch((url) => {
        seen = url;
        return {
          status: 200,
          body: { id: "a b/c", source: "s", date: "1900-01-01", text: "t", headline: null },
        };
      }),
    );
    await client.article("a b/c");
    expect(seen).toBe("http://svc/article/a%20b%2Fc");
  });

  it("404 becomes a ServiceError with status", async () => {
    const client = createClient(
      "http://svc",
      fakeFetch(() => ({ status: 404, body: { detail: "unknown article" } })),
    );
    const err = await client.article("nope").catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect((err as ServiceError).status).toBe(404);
  });
});

describe("resolveServiceUrl", () => {
  it("prefers the global, then the query string, then the default", () => {
    expect(resolveServiceUrl({ NDV_SERVICE_URL: "http://a" }, "?service=http://b")).toBe(
      "http://a",
    );
    expect(resolveServiceUrl({}, "?service=http://b")).toBe("http://b");
    expect(resolveServiceUrl({}, "")).toBe("http://127.0.0.1:8080");
  });
});
