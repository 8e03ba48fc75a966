import { SuggestFetcher } from "./api.js";
import { debounce } from "./debounce.js";
import { ActiveMode, SuggestResponse } from "./types.js";

export type PaneId = "control" | "active";

export interface PaneSink {
  /** Replace a pane's results. The sink must render the response order as-is. */
  render(pane: PaneId, response: SuggestResponse): void;
  /** Show an inline error for a pane, keeping previously rendered results. */
  renderError(pane: PaneId, message: string): void;
  /** Clear both panes (input emptied). */
  clear(): void;
}

export interface ControllerOptions {
  fetcher: SuggestFetcher;
  sink: PaneSink;
  debounceMs?: number;
  k?: number;
  initialMode?: ActiveMode;
}

export const DEFAULT_DEBOUNCE_MS = 150;

/**
 * Per-keystroke orchestration for the two result panes.
 *
 * Keystrokes are debounced; after quiescence each pane issues one request for
 * the current prefix (control mode on the left, the selected rerank mode on
 * the right). Responses are version-stamped per pane: anything that arrives
 * for a superseded prefix or mode is dropped, and the matching in-flight
 * request is aborted, so at most one request per pane is ever live.
 */
export class TypeaheadController {
  private readonly fetcher: SuggestFetcher;
  private readonly sink: PaneSink;
  private readonly k: number;
  private prefix = "";
  private mode: ActiveMode;
  private readonly versions: Record<PaneId, number> = { control: 0, active: 0 };
  private readonly inflight: Record<PaneId, AbortController | null> = {
    control: null,
    active: null,
  };
  private readonly scheduleFlush: (() => void) & { cancel: () => void };

  constructor(opts: ControllerOptions) {
    this.fetcher = opts.fetcher;
    this.sink = opts.sink;
    this.k = opts.k ?? 10;
    this.mode = opts.initialMode ?? "dedup";
    this.scheduleFlush = debounce(
      () => this.fetchPanes("control", "active"),
      opts.debounceMs ?? DEFAULT_DEBOUNCE_MS,
    );
  }

  get activeMode(): ActiveMode {
    return this.mode;
  }

  /** Input changed; refetch both panes after the debounce window. */
  onKeystroke(prefix: string): void {
    this.prefix = prefix;
    if (prefix === "") {
      this.scheduleFlush.cancel();
      this.invalidate("control");
      this.invalidate("active");
      this.sink.clear();
      return;
    }
    this.scheduleFlush();
  }

  /** Mode switch refetches only the active pane, and only with a prefix. */
  selectMode(mode: ActiveMode): void {
    this.mode = mode;
    if (this.prefix !== "") {
      this.fetchPanes("active");
    }
  }

  dispose(): void {
    this.scheduleFlush.cancel();
    this.invalidate("control");
    this.invalidate("active");
  }

  private invalidate(pane: PaneId): void {
    this.versions[pane] += 1;
    this.inflight[pane]?.abort();
    this.inflight[pane] = null;
  }

  private fetchPanes(...panes: PaneId[]): void {
    for (const pane of panes) {
      this.issue(pane);
    }
  }

  private issue(pane: PaneId): void {
    this.invalidate(pane);
    const version = this.versions[pane];
    const controller = new AbortController();
    this.inflight[pane] = controller;
    const mode = pane === "control" ? "control" : this.mode;
    this.fetcher(this.prefix, mode, this.k, controller.signal).then(
      (response) => {
        if (version === this.versions[pane]) {
          this.inflight[pane] = null;
          this.sink.render(pane, response);
        }
      },
      (err: unknown) => {
        if (version === this.versions[pane]) {
          this.inflight[pane] = null;
          this.sink.renderError(pane, err instanceof Error ? err.message : String(err));
        }
      },
    );
  }
}
