// Verify-grading, uncovered-passages, and spurious-entries views.

import { el } from "../dom";
import { renderNumber, renderRating } from "../format";
import type { SpuriousEntry, UncoveredPassage, VerifyReport } from "../types";

export function renderVerify(report: VerifyReport): HTMLElement {
  const root = el("section", { class: "verify-view" });
  if (report.warning) {
    root.append(el("p", { class: "warning" }, `Warning: ${report.warning}`));
  }
  for (const group of report.groups) {
    const list = el("ul", { class: "verify-rows" });
    for (const row of group.rows) {
      list.append(
        el("li", {},
          el("span", { class: "rating-chip" }, `rating: ${renderRating(row.rating)}`),
          ` ${row.answer || "(no answer recorded)"} `,
          el("span", { class: "muted" }, `[${row.paragraph_id}]`)),
      );
    }
    root.append(
      el("details", { class: "verify-group", open: "" },
        el("summary", {}, `${group.entry_text} `, el("span", { class: "muted" }, group.entry_id)),
        list),
    );
  }
  if (!report.groups.length && !report.warning) {
    root.append(el("p", {}, "Nothing graded yet."));
  }
  return root;
}

export function renderUncovered(passages: UncoveredPassage[]): HTMLElement {
  const root = el("section", { class: "uncovered-view" });
  if (!passages.length) {
    root.append(el("p", {}, "No judged-relevant passage lacks a high grade."));
    return root;
  }
  root.append(el("p", {},
    "Judged relevant, but no current entry rates them highly: the test bank "
    + "is likely missing something."));
  for (const passage of passages) {
    root.append(
      el("article", { class: "uncovered-passage" },
        el("header", {},
          el("strong", {}, passage.paragraph_id),
          ` judgment ${renderNumber(passage.judgment)}, best rating `
          + `${renderRating(passage.best_rating)}`),
        el("p", {}, passage.text)),
    );
  }
  return root;
}

export function renderSpurious(
  entries: SpuriousEntry[],
  onRemove: (entry: SpuriousEntry) => void,
): HTMLElement {
  const root = el("section", { class: "spurious-view" });
  if (!entries.length) {
    root.append(el("p", {}, "No entry is frequently matched by non-relevant passages."));
    return root;
  }
  root.append(el("p", {},
    "Often rated high on passages judged non-relevant; candidates for removal "
    + "or reformulation:"));
  const list = el("ul", { class: "spurious-rows" });
  for (const entry of entries) {
    list.append(
      el("li", {},
        el("span", { class: "freq" }, `(${renderNumber(entry.frequency)})`),
        ` ${entry.text || entry.entry_id} `,
        el("button", { class: "danger", onclick: () => onRemove(entry) }, "Remove")),
    );
  }
  root.append(list);
  return root;
}
