// Mirrors of the verification service's JSON bodies.  The UI never computes
// grades or metrics itself; these types carry server values verbatim.

export interface QuerySummary {
  query_id: string;
  query_text: string;
  n_passages: number;
  n_entries: number;
}

export interface BankEntry {
  entry_id: string;
  kind: "question" | "nugget";
  text: string;
  gold_answers: string[];
}

export interface TestBank {
  query_id: string;
  query_text: string;
  prompt_target: "questions" | "nuggets";
  items: BankEntry[];
}

export interface GridCell {
  rating: number;
  answer: string;
}

export interface GridRow {
  paragraph_id: string;
  best_rank: number | null;
  cells: (GridCell | null)[];
}

export interface GridReport {
  query_id: string;
  entry_ids: string[];
  entry_texts: string[];
  rows: GridRow[];
}

export interface VerifyRow {
  rating: number | null;
  answer: string;
  paragraph_id: string;
}

export interface VerifyGroup {
  entry_id: string;
  entry_text: string;
  rows: VerifyRow[];
}

export interface VerifyReport {
  groups: VerifyGroup[];
  warning: string | null;
}

export interface UncoveredPassage {
  query_id: string;
  paragraph_id: string;
  text: string;
  judgment: number;
  best_rating: number | null;
}

export interface SpuriousEntry {
  entry_id: string;
  text: string;
  frequency: number;
}

export interface LeaderboardRow {
  method: string;
  score: number;
  std_error: number;
}

export interface Leaderboard {
  metric_name: string;
  rows: LeaderboardRow[];
  spearman: number | null;
  kendall: number | null;
  excluded_queries: string[];
}

export interface DiffRow {
  method: string;
  before: number | null;
  after: number | null;
  delta: number | null;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface Job {
  job_id: string;
  status: JobStatus;
  request: Record<string, unknown>;
  failures: unknown[];
  leaderboard_before: Leaderboard | null;
  leaderboard_after: Leaderboard | null;
  diff: DiffRow[] | null;
  error: string | null;
}

export interface KappaRow {
  label: string;
  counts: number[];
  total: number;
  kappa: number;
}

export interface KappaTable {
  scheme: string;
  min_answers: number;
  judgment_columns: string[];
  rows: KappaRow[];
  n: number;
}

export interface RegradeRequest {
  backend?: "mock" | "remote";
  mode?: "self-rated" | "extract-verify" | "extract";
  prompt_class?: string | null;
  metric?: "cover" | "mrr";
  k?: number;
  min_rating?: number;
}
