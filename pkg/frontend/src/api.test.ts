import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "./api";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function mockFetch(
  handler: (input: string, init?: RequestInit) => Response | Promise<Response>,
) {
  const calls: { input: string; init?: RequestInit }[] = [];
  const impl = async (input: string, init?: RequestInit) => {
    calls.push({ input, init });
    return handler(input, init);
  };
  return { impl, calls };
}

describe("ApiClient", () => {
  it("recognize posts points, method and top_k", async () => {
    const { impl, calls } = mockFetch(() =>
      jsonResponse({
        method: "1",
        ranking: [{ label: "v", score: 0 }],
        curvature_count: 3,
        edf_length: 3,
      }),
    );
    const api = new ApiClient("http://svc:8472", impl);
    const result = await api.recognize([[0, 0], [5, 5]], "1", 2);
    expect(result.ranking[0]).toEqual({ label: "v", score: 0 });
    expect(calls).toHaveLength(1);
    expect(calls[0].input).toBe("http://svc:8472/api/v1/recognize");
    expect(JSON.parse(calls[0].init!.body as string)).toEqual({
      points: [[0, 0], [5, 5]],
      method: "1",
      top_k: 2,
    });
  });

  it("primitives unwraps the labels array", async () => {
    const { impl } = mockFetch(() => jsonResponse({ labels: ["k", "v"] }));
    const api = new ApiClient("http://svc", impl);
    expect(await api.primitives()).toEqual(["k", "v"]);
  });

  it("submitSample returns the assigned id", async () => {
    const { impl, calls } = mockFetch(() =>
      jsonResponse({ id: "sample_000004" }),
    );
    const api = new ApiClient("http://svc", impl);
    const ack = await api.submitSample([[0, 0], [1, 1]], "k", "pad");
    expect(ack.id).toBe("sample_000004");
    expect(JSON.parse(calls[0].init!.body as string).label).toBe("k");
  });

  it("HTTP errors carry the service detail and status", async () => {
    const { impl } = mockFetch(() =>
      jsonResponse({ detail: "label 'zz' not in vocabulary" }, 400),
    );
    const api = new ApiClient("http://svc", impl);
    const err = await api
      .submitSample([[0, 0], [1, 1]], "zz", "pad")
      .then(() => null)
      .catch((e) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect(err!.status).toBe(400);
    expect(err!.message).toContain("not in vocabulary");
  });

  it("a 409 rebuild conflict is distinguishable", async () => {
    const { impl } = mockFetch(() =>
      jsonResponse({ detail: "rebuild already in progress" }, 409),
    );
    const api = new ApiClient("http://svc", impl);
    const err = await api.rebuild().catch((e) => e as ApiError);
    expect((err as ApiError).status).toBe(409);
  });

  it("network failure becomes ApiError with null status", async () => {
    const api = new ApiClient("http://svc", () =>
      Promise.reject(new TypeError("fetch failed")),
    );
    const err = await api.primitives().catch((e) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBeNull();
    expect((err as ApiError).message).toContain("unreachable");
  });

  it("non-JSON error bodies fall back to the status code", async () => {
    const { impl } = mockFetch(
      () => new Response("<html>gateway error</html>", { status: 502 }),
    );
    const api = new ApiClient("http://svc", impl);
    const err = await api.primitives().catch((e) => e as ApiError);
    expect((err as ApiError).message).toBe("HTTP 502");
  });
});
