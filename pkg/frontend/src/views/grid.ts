// Grade grid: passages (rows) x test-bank entries (columns), cells colored
// by rating.  Focusing a cell shows the extracted answer in the detail box.

import { el } from "../dom";
import { MISSING_CELL, RATING_COLORS, ratingColor, renderRating } from "../format";
import type { GridReport } from "../types";

export function renderGrid(grid: GridReport): HTMLElement {
  const detail = el("div", { class: "cell-detail", "aria-live": "polite" },
    "Focus a cell to see the extracted answer.");

  const headRow = el("tr", {}, el("th", {}, "passage"), el("th", {}, "rank"));
  grid.entry_ids.forEach((entryId, i) => {
    headRow.append(
      el("th", { class: "entry-col", title: `${entryId}: ${grid.entry_texts[i]}` },
        `e${i + 1}`),
    );
  });

  const body = el("tbody");
  for (const row of grid.rows) {
    const tr = el("tr", {},
      el("td", { class: "pid" }, row.paragraph_id),
      el("td", {}, row.best_rank === null ? MISSING_CELL : String(row.best_rank)),
    );
    row.cells.forEach((cell, i) => {
      if (cell === null) {
        tr.append(el("td", { class: "cell missing", title: "never graded" }, MISSING_CELL));
        return;
      }
      const show = () => {
        detail.textContent =
          `${grid.entry_texts[i]} → (rating: ${renderRating(cell.rating)}) ` +
          (cell.answer || "(no extracted answer)");
      };
      const button = el(
        "button",
        { class: "cell rated", style: `background:${ratingColor(cell.rating)}`,
          onfocus: show, onmouseenter: show },
        renderRating(cell.rating),
      );
      tr.append(el("td", {}, button));
    });
    body.append(tr);
  }

  const legend = el("div", { class: "legend" }, "rating scale: ");
  RATING_COLORS.forEach((color, rating) => {
    legend.append(el("span", { class: "swatch", style: `background:${color}` }, String(rating)));
  });
  legend.append(el("span", { class: "swatch missing" }, `${MISSING_CELL} never graded`));

  const entryKey = el("ol", { class: "entry-key" });
  grid.entry_ids.forEach((entryId, i) => {
    entryKey.append(el("li", {}, el("code", {}, `e${i + 1}`), ` ${grid.entry_texts[i]} `,
      el("span", { class: "muted" }, entryId)));
  });

  return el("section", { class: "grid-view" },
    el("table", { class: "grid" }, el("thead", {}, headRow), body),
    legend, detail, entryKey);
}
