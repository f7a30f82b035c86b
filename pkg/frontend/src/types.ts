/** Wire types mirroring the query service's JSON contract. */

export interface SearchHit {
  id: string;
  score: number;
  headline: string | null;
  date: string | null;
  source: string | null;
  snippet: string | null;
}

export interface SearchResponse {
  hits: SearchHit[];
  masked_query: string;
  timing_ms: number;
}

export interface ArticleRecord {
  id: string;
  source: string;
  date: string;
  text: string;
  headline: string | null;
}

export interface QueryFormState {
  text: string;
  k: number;
  mask: boolean;
}

export const MIN_K = 1;
export const MAX_K = 50;
