import { fetchHealth, makeFetcher } from "./api.js";
import { PaneId, TypeaheadController } from "./controller.js";
import { ActiveMode, SuggestResponse } from "./types.js";
import { clearError, renderResults, showError } from "./view.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function main(): void {
  // same origin when served from /ui; override with ?api=http://host:port
  const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";

  const input = el<HTMLInputElement>("prefix");
  const modeSelect = el<HTMLSelectElement>("mode");
  const health = el<HTMLElement>("health");
  const lists: Record<PaneId, HTMLElement> = {
    control: el("control-list"),
    active: el("active-list"),
  };
  const banners: Record<PaneId, HTMLElement> = {
    control: el("control-error"),
    active: el("active-error"),
  };
  const activeTitle = el<HTMLElement>("active-title");

  const controller = new TypeaheadController({
    fetcher: makeFetcher(apiBase),
    sink: {
      render(pane: PaneId, response: SuggestResponse): void {
        clearError(banners[pane]);
        renderResults(lists[pane], response);
      },
      renderError(pane: PaneId, message: string): void {
        showError(banners[pane], message); // previous results stay in place
      },
      clear(): void {
        for (const pane of ["control", "active"] as PaneId[]) {
          clearError(banners[pane]);
          lists[pane].textContent = "";
        }
      },
    },
  });

  input.addEventListener("input", () => controller.onKeystroke(input.value));
  modeSelect.addEventListener("change", () => {
    const mode = modeSelect.value as ActiveMode;
    activeTitle.textContent = mode;
    controller.selectMode(mode);
  });

  fetchHealth(apiBase).then(
    (h) => {
      health.textContent = `connected: ${h.queries} queries, ${h.embeddings} embeddings`;
    },
    () => {
      health.textContent = "service unreachable; is `typeahead serve` running?";
    },
  );
}

main();
