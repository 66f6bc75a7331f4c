// Rendering helpers.  Numbers coming from the service are displayed
// byte-for-byte: String(n) on a JSON-parsed double reproduces the JSON text,
// so no rounding or padding happens anywhere in the UI.

// Fixed 6-step rating scale, 0 (not covered) .. 5 (fully covered); shown in
// the grid legend so reviewers read colors consistently.
export const RATING_COLORS: readonly string[] = [
  "#d73027", // 0
  "#fc8d59", // 1
  "#fee08b", // 2
  "#d9ef8b", // 3
  "#91cf60", // 4
  "#1a9850", // 5
];

export const MISSING_CELL = "—"; // em dash: never graded, distinct from 0

export function ratingColor(rating: number): string {
  const index = Math.min(Math.max(Math.trunc(rating), 0), 5);
  return RATING_COLORS[index];
}

export function renderNumber(value: number | null | undefined): string {
  return value === null || value === undefined ? MISSING_CELL : String(value);
}

export function renderRating(rating: number | null | undefined): string {
  return renderNumber(rating);
}

export function deltaClass(delta: number | null): string {
  if (delta === null || delta === 0) {
    return "delta-flat";
  }
  return delta > 0 ? "delta-up" : "delta-down";
}

export function statusLabel(status: string): string {
  return { queued: "queued…", running: "running…", done: "done", failed: "failed" }[
    status
  ] ?? status;
}
