// Test-bank editor: add, replace, and delete entries.  The entry-ID preview
// updates live as the reviewer types (ID follows text); the committed ID
// always comes back from the service.

import { el } from "../dom";
import { entryIdPreview } from "../md5";
import type { TestBank } from "../types";

export interface BankHandlers {
  onAdd(text: string, kind: "question" | "nugget", goldAnswers: string[]): void;
  onReplace(entryId: string, newText: string): void;
  onDelete(entryId: string, text: string): void;
}

export function renderBankEditor(bank: TestBank, handlers: BankHandlers): HTMLElement {
  const root = el("section", { class: "bank-view" });

  const rows = el("ul", { class: "bank-rows" });
  for (const entry of bank.items) {
    const editButton = el("button", {
      onclick: () => {
        const newText = window.prompt("Reformulate the entry:", entry.text);
        if (newText && newText.trim() && newText !== entry.text) {
          handlers.onReplace(entry.entry_id, newText.trim());
        }
      },
    }, "Edit");
    const deleteButton = el("button", {
      class: "danger",
      onclick: () => handlers.onDelete(entry.entry_id, entry.text),
    }, "Delete");
    rows.append(
      el("li", { class: "bank-row" },
        el("div", {},
          el("strong", {}, entry.text),
          entry.gold_answers.length
            ? el("span", { class: "muted" }, ` gold: ${entry.gold_answers.join(" | ")}`)
            : null,
          el("div", { class: "muted" }, entry.entry_id)),
        el("div", { class: "row-actions" }, editButton, deleteButton)),
    );
  }
  root.append(rows);

  const kind = bank.prompt_target === "nuggets" ? "nugget" : "question";
  const textInput = el("textarea", {
    class: "new-entry-text", rows: "2",
    placeholder: kind === "question" ? "New exam question…" : "New nugget…",
  });
  const goldInput = el("input", {
    class: "new-entry-gold", placeholder: "gold answers, | separated (optional)",
  });
  const preview = el("code", { class: "id-preview" }, `${bank.query_id}/…`);
  textInput.addEventListener("input", () => {
    const text = textInput.value.trim();
    preview.textContent = text ? entryIdPreview(bank.query_id, text) : `${bank.query_id}/…`;
  });
  const inlineError = el("div", { class: "inline-error", role: "alert" });

  const form = el("form", {
    class: "add-entry",
    onsubmit: (event: Event) => {
      event.preventDefault();
      inlineError.textContent = "";
      const text = textInput.value.trim();
      if (!text) {
        inlineError.textContent = "Entry text must not be empty.";
        return;
      }
      const gold = goldInput.value.split("|").map((g) => g.trim()).filter(Boolean);
      handlers.onAdd(text, kind, gold);
    },
  },
    el("h3", {}, `Add a ${kind}`),
    textInput,
    goldInput,
    el("div", { class: "muted" }, "entry id preview: ", preview),
    inlineError,
    el("button", { type: "submit" }, "Add entry"));
  root.append(form);
  return root;
}

export function bankInlineError(root: HTMLElement, message: string): void {
  const slot = root.querySelector<HTMLElement>(".inline-error");
  if (slot) {
    slot.textContent = message;
  }
}
