/**
 * Thin typed client for the market decision service.
 *
 * Every method maps one endpoint; service error bodies {code, message}
 * become ApiError so callers can branch on the code (e.g. the 409
 * "week_already_played" double-act guard).
 */

import type {
  ActionDraft,
  ActResponse,
  EstimateResponse,
  HistoryResponse,
  MetricsPayload,
  SessionResponse,
  ValidateResponse,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        body.code ?? 'unknown_error',
        body.message ?? `request failed with status ${resp.status}`
      );
    }
    return body as T;
  }

  createSession(): Promise<SessionResponse> {
    return this.request('/sessions', { method: 'POST', body: '{}' });
  }

  validate(sessionId: string, draft: ActionDraft): Promise<ValidateResponse> {
    return this.request(`/sessions/${sessionId}/validate`, {
      method: 'POST',
      body: JSON.stringify(draft),
    });
  }

  estimate(sessionId: string, draft: ActionDraft): Promise<EstimateResponse> {
    return this.request(`/sessions/${sessionId}/estimate`, {
      method: 'POST',
      body: JSON.stringify(draft),
    });
  }

  act(
    sessionId: string,
    draft: ActionDraft,
    expectedWeek: number
  ): Promise<ActResponse> {
    return this.request(`/sessions/${sessionId}/act`, {
      method: 'POST',
      body: JSON.stringify({ ...draft, mode: 'repaired', expected_week: expectedWeek }),
    });
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return this.request(`/sessions/${sessionId}/history`);
  }

  metrics(sessionId: string): Promise<{ metrics: MetricsPayload | null }> {
    return this.request(`/sessions/${sessionId}/metrics`);
  }
}
