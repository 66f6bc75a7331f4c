// Leaderboard + agreement panel with the regrade launcher and the
// before/after diff of the last regrade.  Every number shown comes straight
// from a service JSON field.

import { el } from "../dom";
import { deltaClass, renderNumber, statusLabel } from "../format";
import type { Job, KappaTable, Leaderboard } from "../types";

export function renderLeaderboard(board: Leaderboard): HTMLElement {
  const body = el("tbody");
  for (const row of board.rows) {
    body.append(el("tr", {},
      el("td", {}, row.method),
      el("td", { class: "num" }, renderNumber(row.score)),
      el("td", { class: "num" }, renderNumber(row.std_error))));
  }
  const footer = el("tfoot");
  if (board.spearman !== null) {
    footer.append(el("tr", {}, el("td", {}, "spearman"),
      el("td", { class: "num" }, renderNumber(board.spearman)), el("td")));
  }
  if (board.kendall !== null) {
    footer.append(el("tr", {}, el("td", {}, "kendall"),
      el("td", { class: "num" }, renderNumber(board.kendall)), el("td")));
  }
  const table = el("table", { class: "board" },
    el("caption", {}, board.metric_name),
    el("thead", {}, el("tr", {},
      el("th", {}, "method"), el("th", {}, "score"), el("th", {}, "std error"))),
    body, footer);
  const section = el("section", { class: "board-view" }, table);
  if (board.excluded_queries.length) {
    section.append(el("p", { class: "muted" },
      `queries with nothing answerable were excluded: ${board.excluded_queries.join(", ")}`));
  }
  return section;
}

export function renderKappaTables(tables: KappaTable[]): HTMLElement {
  const root = el("section", { class: "kappa-view" });
  for (const table of tables) {
    const head = el("tr", {}, el("th", {}, "label"));
    for (const column of table.judgment_columns) {
      head.append(el("th", {}, `judgment ${column}`));
    }
    head.append(el("th", {}, "total"), el("th", {}, "κ"));
    const body = el("tbody");
    for (const row of table.rows) {
      const tr = el("tr", {}, el("td", {}, row.label));
      for (const count of row.counts) {
        tr.append(el("td", { class: "num" }, renderNumber(count)));
      }
      tr.append(el("td", { class: "num" }, renderNumber(row.total)),
        el("td", { class: "num" }, renderNumber(row.kappa)));
      body.append(tr);
    }
    root.append(el("table", { class: "kappa" },
      el("caption", {}, `${table.scheme} (min answers = ${table.min_answers}, n = ${table.n})`),
      el("thead", {}, head), body));
  }
  return root;
}

export function renderJobPanel(job: Job | null): HTMLElement {
  const root = el("section", { class: "job-panel" });
  if (!job) {
    root.append(el("p", { class: "muted" }, "No regrade has run yet."));
    return root;
  }
  root.append(el("p", {},
    `${job.job_id}: `, el("strong", {}, statusLabel(job.status)),
    job.error ? ` (${job.error})` : ""));
  if (job.failures.length) {
    root.append(el("p", { class: "warning" }, `${job.failures.length} pair(s) failed to grade.`));
  }
  if (job.diff && job.diff.length) {
    const body = el("tbody");
    for (const row of job.diff) {
      body.append(el("tr", { class: deltaClass(row.delta) },
        el("td", {}, row.method),
        el("td", { class: "num" }, renderNumber(row.before)),
        el("td", { class: "num" }, renderNumber(row.after)),
        el("td", { class: "num delta" }, renderNumber(row.delta))));
    }
    root.append(el("table", { class: "diff" },
      el("caption", {}, "leaderboard before → after this regrade"),
      el("thead", {}, el("tr", {},
        el("th", {}, "method"), el("th", {}, "before"),
        el("th", {}, "after"), el("th", {}, "delta"))),
      body));
  }
  return root;
}
