// Thin typed client for the verification service.  All reads and writes go
// through here; the fetch implementation is injectable so tests can fake the
// service.

import type {
  GridReport,
  Job,
  KappaTable,
  Leaderboard,
  QuerySummary,
  RegradeRequest,
  SpuriousEntry,
  TestBank,
  UncoveredPassage,
  VerifyReport,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type QueryParams = Record<string, string | number | null | undefined>;

export function buildUrl(path: string, params?: QueryParams): string {
  const pairs: string[] = [];
  for (const [key, value] of Object.entries(params ?? {})) {
    if (value !== null && value !== undefined && value !== "") {
      pairs.push(`${encodeURIComponent(key)}=${encodeURIComponent(String(value))}`);
    }
  }
  return pairs.length ? `${path}?${pairs.join("&")}` : path;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (error) {
      throw new ApiError(0, error instanceof Error ? error.message : "network failure");
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && body.detail !== undefined) {
          detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown, method = "POST"): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listQueries(): Promise<QuerySummary[]> {
    return this.request("/api/queries");
  }

  getTestBank(queryId: string): Promise<TestBank> {
    return this.request(`/api/testbank/${encodeURIComponent(queryId)}`);
  }

  getGrid(queryId: string, promptClass?: string): Promise<GridReport> {
    return this.request(
      buildUrl(`/api/grid/${encodeURIComponent(queryId)}`, { prompt_class: promptClass }),
    );
  }

  getVerifyGrading(queryId: string, promptClass?: string): Promise<VerifyReport> {
    return this.request(
      buildUrl(`/api/verify-grading/${encodeURIComponent(queryId)}`, {
        prompt_class: promptClass,
      }),
    );
  }

  getUncovered(
    queryId: string,
    minJudgment: number,
    minRating: number,
  ): Promise<UncoveredPassage[]> {
    return this.request(
      buildUrl(`/api/uncovered/${encodeURIComponent(queryId)}`, {
        min_judgment: minJudgment,
        min_rating: minRating,
      }),
    );
  }

  getSpurious(
    queryId: string,
    maxJudgment: number,
    minRating: number,
  ): Promise<SpuriousEntry[]> {
    return this.request(
      buildUrl(`/api/spurious/${encodeURIComponent(queryId)}`, {
        max_judgment: maxJudgment,
        min_rating: minRating,
      }),
    );
  }

  getLeaderboard(metric: "cover" | "mrr", k: number, minRating: number): Promise<Leaderboard> {
    return this.request(
      buildUrl("/api/leaderboard", { metric, k, min_rating: minRating }),
    );
  }

  getKappa(minAnswers: number, minRelevantJudgment: number): Promise<KappaTable[]> {
    return this.request(
      buildUrl("/api/kappa", {
        min_answers: minAnswers,
        min_relevant_judgment: minRelevantJudgment,
      }),
    );
  }

  addEntry(
    queryId: string,
    text: string,
    kind: "question" | "nugget",
    goldAnswers: string[] = [],
  ): Promise<{ entry_id: string }> {
    return this.post(`/api/testbank/${encodeURIComponent(queryId)}/entries`, {
      text,
      kind,
      gold_answers: goldAnswers,
    });
  }

  replaceEntry(queryId: string, entryId: string, newText: string): Promise<{ entry_id: string }> {
    return this.post(
      `/api/testbank/${encodeURIComponent(queryId)}/entries/${entryId}`,
      { new_text: newText },
      "PUT",
    );
  }

  deleteEntry(queryId: string, entryId: string): Promise<{ removed: string }> {
    return this.request(`/api/testbank/${encodeURIComponent(queryId)}/entries/${entryId}`, {
      method: "DELETE",
    });
  }

  startRegrade(request: RegradeRequest): Promise<{ job_id: string }> {
    return this.post("/api/regrade", request);
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${encodeURIComponent(jobId)}`);
  }

  listJobs(): Promise<Job[]> {
    return this.request("/api/jobs");
  }
}
