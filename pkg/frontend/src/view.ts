import { SuggestResponse } from "./types.js";

/**
 * DOM rendering for one result pane. The list order is exactly the response
 * order (the UI never re-sorts), and the demoted badge is driven solely by
 * the response's `demoted` field.
 */
export function renderResults(listEl: HTMLElement, response: SuggestResponse): void {
  listEl.textContent = "";
  for (const s of response.suggestions) {
    const li = document.createElement("li");
    li.className = s.demoted ? "suggestion demoted" : "suggestion";

    const rank = document.createElement("span");
    rank.className = "rank";
    rank.textContent = String(s.rank);
    li.appendChild(rank);

    const query = document.createElement("span");
    query.className = "query";
    query.textContent = s.query;
    li.appendChild(query);

    if (s.demoted) {
      const badge = document.createElement("span");
      badge.className = "badge";
      badge.textContent = "demoted";
      li.appendChild(badge);
    }
    listEl.appendChild(li);
  }
  if (response.suggestions.length === 0 && response.prefix !== "") {
    const li = document.createElement("li");
    li.className = "empty";
    li.textContent = "no suggestions";
    listEl.appendChild(li);
  }
}

export function showError(bannerEl: HTMLElement, message: string): void {
  bannerEl.textContent = message;
  bannerEl.hidden = false;
}

export function clearError(bannerEl: HTMLElement): void {
  bannerEl.textContent = "";
  bannerEl.hidden = true;
}
