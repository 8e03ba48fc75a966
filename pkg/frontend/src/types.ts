// Wire contract of the suggest service (field names are normative).

export interface Suggestion {
  rank: number;
  query: string;
  score: number;
  demoted: boolean;
}

export interface SuggestResponse {
  prefix: string;
  mode: string;
  suggestions: Suggestion[];
}

export interface Health {
  status: string;
  queries: number;
  embeddings: number;
}

/** Active-pane rerank modes; the left pane is always "control". */
export type ActiveMode = "dedup" | "mmr";

export function parseSuggestResponse(data: unknown): SuggestResponse {
  const obj = data as Record<string, unknown>;
  if (
    typeof obj !== "object" ||
    obj === null ||
    typeof obj.prefix !== "string" ||
    typeof obj.mode !== "string" ||
    !Array.isArray(obj.suggestions)
  ) {
    throw new Error("malformed suggest response");
  }
  for (const s of obj.suggestions as Record<string, unknown>[]) {
    if (
      typeof s.rank !== "number" ||
      typeof s.query !== "string" ||
      typeof s.score !== "number" ||
      typeof s.demoted !== "boolean"
    ) {
      throw new Error("malformed suggestion entry");
    }
  }
  return obj as unknown as SuggestResponse;
}
