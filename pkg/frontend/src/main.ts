// Application shell: a query browser on the left, one view at a time on the
// right, and the leaderboard/agreement panel as its own page.  All state is
// reloaded from the service on navigation, so refreshing the page always
// reconstructs the same view from server reads alone.

import { ApiClient, ApiError } from "./api";
import { clear, el } from "./dom";
import { DEFAULT_ROUTE, QUERY_VIEWS, Route, latestFinishedJob, parseRoute, routeHash } from "./state";
import type { Job, QuerySummary, SpuriousEntry } from "./types";
import { bankInlineError, renderBankEditor } from "./views/bank";
import { renderJobPanel, renderKappaTables, renderLeaderboard } from "./views/board";
import { renderGrid } from "./views/grid";
import { renderSpurious, renderUncovered, renderVerify } from "./views/reports";

const VIEW_LABELS: Record<string, string> = {
  grid: "Grade grid",
  verify: "Verify grading",
  uncovered: "Uncovered passages",
  spurious: "Spurious entries",
  bank: "Test bank",
};

export class App {
  private route: Route = { ...DEFAULT_ROUTE };
  private queries: QuerySummary[] = [];
  private pollTimer: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  start(): void {
    window.addEventListener("hashchange", () => {
      this.route = parseRoute(location.hash);
      void this.render();
    });
    this.route = parseRoute(location.hash);
    void this.render();
  }

  private navigate(route: Route): void {
    location.hash = routeHash(route);
  }

  private banner(message: string): void {
    const existing = document.querySelector(".error-banner");
    existing?.remove();
    const banner = el("div", { class: "error-banner", role: "alert" },
      message, " ",
      el("button", {
        onclick: () => {
          banner.remove();
          void this.render();
        },
      }, "Retry"));
    document.body.prepend(banner);
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    try {
      return await work();
    } catch (error) {
      if (error instanceof ApiError) {
        this.banner(error.status === 0 ? `Network problem: ${error.detail}` : error.message);
      } else {
        this.banner(String(error));
      }
      return null;
    }
  }

  private async render(): Promise<void> {
    const queries = await this.guard(() => this.api.listQueries());
    if (queries === null) {
      return; // keep the current DOM (and any unsaved edits); banner offers retry
    }
    this.queries = queries;
    if (this.route.queryId && !queries.some((q) => q.query_id === this.route.queryId)) {
      this.route = { ...DEFAULT_ROUTE };
    }

    const content = el("main", { class: "content" });
    const shell = el("div", { class: "shell" }, this.sidebar(), content);
    const rendered = await this.renderContent(content);
    if (!rendered) {
      return;
    }
    clear(this.root);
    this.root.append(shell);
  }

  private sidebar(): HTMLElement {
    const list = el("ul", { class: "query-list" });
    for (const query of this.queries) {
      const active = this.route.queryId === query.query_id;
      list.append(el("li", {},
        el("button", {
          class: active ? "query active" : "query",
          onclick: () => this.navigate({
            view: this.route.view === "board" ? "grid" : this.route.view,
            queryId: query.query_id,
          }),
        },
          el("strong", {}, query.query_id),
          el("span", { class: "muted" },
            ` ${query.query_text} (${query.n_passages} passages, ${query.n_entries} entries)`))));
    }
    const boardButton = el("button", {
      class: this.route.view === "board" ? "query active" : "query",
      onclick: () => this.navigate({ view: "board", queryId: null }),
    }, el("strong", {}, "Leaderboard & agreement"));
    return el("nav", { class: "sidebar" },
      el("h1", {}, "gradebench"), boardButton, el("h2", {}, "Queries"), list);
  }

  private tabs(): HTMLElement {
    const bar = el("div", { class: "tabs" });
    for (const view of QUERY_VIEWS) {
      bar.append(el("button", {
        class: this.route.view === view ? "tab active" : "tab",
        onclick: () => this.navigate({ view, queryId: this.route.queryId }),
      }, VIEW_LABELS[view]));
    }
    return bar;
  }

  private async renderContent(content: HTMLElement): Promise<boolean> {
    if (this.route.view === "board") {
      return this.renderBoard(content);
    }
    const queryId = this.route.queryId ?? this.queries[0]?.query_id;
    if (!queryId) {
      content.append(el("p", {}, "No queries in this workspace."));
      return true;
    }
    this.route.queryId = queryId;
    content.append(this.tabs());

    if (this.route.view === "grid") {
      const grid = await this.guard(() => this.api.getGrid(queryId));
      if (!grid) return false;
      content.append(renderGrid(grid));
    } else if (this.route.view === "verify") {
      const report = await this.guard(() => this.api.getVerifyGrading(queryId));
      if (!report) return false;
      content.append(renderVerify(report));
    } else if (this.route.view === "uncovered") {
      const passages = await this.guard(() => this.api.getUncovered(queryId, 1, 4));
      if (!passages) return false;
      content.append(renderUncovered(passages));
    } else if (this.route.view === "spurious") {
      const entries = await this.guard(() => this.api.getSpurious(queryId, 0, 4));
      if (!entries) return false;
      content.append(renderSpurious(entries, (entry) => void this.removeEntry(queryId, entry)));
    } else {
      const bank = await this.guard(() => this.api.getTestBank(queryId));
      if (!bank) return false;
      const editor = renderBankEditor(bank, {
        onAdd: (text, kind, gold) => void this.addEntry(editor, queryId, text, kind, gold),
        onReplace: (entryId, newText) => void this.replaceEntry(queryId, entryId, newText),
        onDelete: (entryId, text) => void this.deleteEntry(queryId, entryId, text),
      });
      content.append(editor);
    }
    return true;
  }

  private async renderBoard(content: HTMLElement): Promise<boolean> {
    const board = await this.guard(() => this.api.getLeaderboard("cover", 20, 4));
    if (!board) return false;
    const jobs = await this.guard(() => this.api.listJobs());
    if (jobs === null) return false;

    const launcher = el("div", { class: "regrade" },
      el("button", { onclick: () => void this.startRegrade() }, "Regrade (mock backend)"),
      el("span", { class: "muted" }, " replaces the current self-rated grades"));
    content.append(el("h2", {}, "Leaderboard"), launcher, renderLeaderboard(board));
    content.append(renderJobPanel(latestFinishedJob<Job>(jobs)));

    const kappa = await this.guard(() => this.api.getKappa(1, 1));
    if (kappa) {
      content.append(el("h2", {}, "Agreement with manual judgments"), renderKappaTables(kappa));
    }
    return true;
  }

  // ------------------------------------------------------------- mutations

  private async removeEntry(queryId: string, entry: SpuriousEntry): Promise<void> {
    if (!window.confirm(`Remove "${entry.text || entry.entry_id}" from the test bank?`)) {
      return;
    }
    const ok = await this.guard(() => this.api.deleteEntry(queryId, entry.entry_id));
    if (ok) {
      void this.render();
    }
  }

  private async deleteEntry(queryId: string, entryId: string, text: string): Promise<void> {
    if (!window.confirm(`Delete "${text}"?`)) {
      return;
    }
    const ok = await this.guard(() => this.api.deleteEntry(queryId, entryId));
    if (ok) {
      void this.render();
    }
  }

  private async addEntry(
    editor: HTMLElement,
    queryId: string,
    text: string,
    kind: "question" | "nugget",
    gold: string[],
  ): Promise<void> {
    try {
      await this.api.addEntry(queryId, text, kind, gold);
    } catch (error) {
      // surfaced next to the form; the typed text stays in place
      bankInlineError(editor, error instanceof ApiError ? error.detail : String(error));
      return;
    }
    void this.render();
  }

  private async replaceEntry(queryId: string, entryId: string, newText: string): Promise<void> {
    const ok = await this.guard(() => this.api.replaceEntry(queryId, entryId, newText));
    if (ok) {
      void this.render();
    }
  }

  private async startRegrade(): Promise<void> {
    const started = await this.guard(() => this.api.startRegrade({ metric: "cover" }));
    if (!started) {
      return;
    }
    this.pollJob(started.job_id);
  }

  private pollJob(jobId: string): void {
    if (this.pollTimer !== null) {
      window.clearInterval(this.pollTimer);
    }
    this.pollTimer = window.setInterval(async () => {
      const job = await this.guard(() => this.api.getJob(jobId));
      if (!job) {
        return;
      }
      if (job.status === "done" || job.status === "failed") {
        window.clearInterval(this.pollTimer!);
        this.pollTimer = null;
        void this.render();
      }
    }, 300);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  new App(new ApiClient(), document.getElementById("app")!).start();
}
