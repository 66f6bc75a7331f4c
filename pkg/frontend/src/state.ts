// Route handling.  Everything the UI shows is reloaded from the service on
// navigation, so the URL hash is the only client-side state that matters and
// a full page reload reconstructs the same view.

export type QueryView = "grid" | "verify" | "uncovered" | "spurious" | "bank";
export type View = QueryView | "board";

export interface Route {
  view: View;
  queryId: string | null;
}

export const QUERY_VIEWS: readonly QueryView[] = [
  "grid",
  "verify",
  "uncovered",
  "spurious",
  "bank",
];

export const DEFAULT_ROUTE: Route = { view: "board", queryId: null };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "q" && parts.length >= 2) {
    const view = parts[2] as QueryView;
    return {
      view: QUERY_VIEWS.includes(view) ? view : "grid",
      queryId: decodeURIComponent(parts[1]),
    };
  }
  return { ...DEFAULT_ROUTE };
}

export function routeHash(route: Route): string {
  if (route.view === "board" || route.queryId === null) {
    return "#/board";
  }
  return `#/q/${encodeURIComponent(route.queryId)}/${route.view}`;
}

// Latest job wins the diff panel; jobs arrive in creation order.
export function latestFinishedJob<T extends { status: string }>(jobs: T[]): T | null {
  for (let i = jobs.length - 1; i >= 0; i -= 1) {
    if (jobs[i].status === "done" || jobs[i].status === "failed") {
      return jobs[i];
    }
  }
  return null;
}
