// Typed client for the annotation service HTTP API. All state lives on
// the server; this module only shapes requests and surfaces errors.

import type { Bracket, ErrorCounts } from './scoring.js';

export interface Instance {
  id: string;
  source_text: string;
  simplified_text: string;
}

export interface Progress {
  completed: number;
  total: number;
}

export interface NextResponse {
  done: boolean;
  instance?: Instance;
  progress: Progress;
}

export interface CharacterizationOption {
  id: number;
  fr: string;
  en: string;
}

export interface Labels {
  simplicity: string[];
  characterization: CharacterizationOption[];
  brackets: { id: Bracket; max_score: number }[];
}

export interface SubmitPayload {
  annotator_id: string;
  instance_id: string;
  simplicity: string;
  characterization: number;
  bracket: Bracket;
  errors: ErrorCounts;
  lmp_score: number;
  comment?: string;
  elapsed_seconds?: number;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return response.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return response.json() as Promise<T>;
  }

  next(annotator: string): Promise<NextResponse> {
    return this.get(`/api/next?annotator=${encodeURIComponent(annotator)}`);
  }

  progress(annotator: string): Promise<Progress> {
    return this.get(`/api/progress?annotator=${encodeURIComponent(annotator)}`);
  }

  labels(): Promise<Labels> {
    return this.get('/api/labels');
  }

  submit(payload: SubmitPayload): Promise<{ instance_id: string }> {
    return this.post('/api/annotations', payload);
  }

  serverScore(bracket: Bracket, errors: ErrorCounts): Promise<number> {
    return this.post<{ lmp_score: number }>('/api/score', { bracket, errors }).then(
      (body) => body.lmp_score,
    );
  }
}
