import { Health, parseSuggestResponse, SuggestResponse } from "./types.js";

/** Injectable transport so the controller is testable without a network. */
export type SuggestFetcher = (
  prefix: string,
  mode: string,
  k: number,
  signal: AbortSignal,
) => Promise<SuggestResponse>;

export function makeFetcher(baseUrl: string): SuggestFetcher {
  return async (prefix, mode, k, signal) => {
    const params = new URLSearchParams({ prefix, mode, k: String(k) });
    const resp = await fetch(`${baseUrl}/suggest?${params}`, { signal });
    if (!resp.ok) {
      throw new Error(`suggest failed: HTTP ${resp.status}`);
    }
    return parseSuggestResponse(await resp.json());
  };
}

export async function fetchHealth(baseUrl: string): Promise<Health> {
  const resp = await fetch(`${baseUrl}/healthz`);
  if (!resp.ok) {
    throw new Error(`healthz failed: HTTP ${resp.status}`);
  }
  return (await resp.json()) as Health;
}
