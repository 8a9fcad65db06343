/** Typed client for the recognition service JSON API.
 *
 * Every method resolves with parsed data or throws ApiError carrying
 * the HTTP status and the service's error detail, so the UI can put
 * the exact failure in the banner.
 */

export interface RankingEntry {
  label: string;
  score: number;
}

export interface RecognizeResponse {
  method: string;
  ranking: RankingEntry[];
  curvature_count: number;
  edf_length: number;
}

export interface SubmitResponse {
  id: string;
}

export interface RebuildResponse {
  labels: string[];
  reference_count: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (e) {
      throw new ApiError(`service unreachable: ${(e as Error).message}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON body; fall through with null
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : `HTTP ${response.status}`;
      throw new ApiError(detail, response.status);
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  primitives(): Promise<string[]> {
    return this.request<{ labels: string[] }>("/api/v1/primitives").then(
      (doc) => doc.labels,
    );
  }

  recognize(
    points: number[][],
    method: "1" | "2",
    topK = 5,
  ): Promise<RecognizeResponse> {
    return this.post("/api/v1/recognize", { points, method, top_k: topK });
  }

  submitSample(
    points: number[][],
    label: string,
    writer: string,
  ): Promise<SubmitResponse> {
    return this.post("/api/v1/samples", { points, label, writer });
  }

  rebuild(): Promise<RebuildResponse> {
    return this.post("/api/v1/model/rebuild");
  }
}
