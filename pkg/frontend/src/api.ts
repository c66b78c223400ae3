/**
 * Typed client for the forecast service endpoints.
 */

import type {
  AccrualModelInfo,
  ApiErrorBody,
  CountryProfile,
  ForecastSummary,
  Scenario,
} from "./types.js";

/** Non-2xx response; carries the parsed error body when there is one. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody | null,
  ) {
    super(body?.error ? `${body.error.field}: ${body.error.message}` : `service returned ${status}`);
    this.name = "ServiceError";
  }
}

export interface ForecastClient {
  countries(): Promise<CountryProfile[]>;
  accrualModel(): Promise<AccrualModelInfo>;
  forecast(scenario: Scenario, signal?: AbortSignal): Promise<ForecastSummary>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export function createClient(baseUrl: string, fetchFn?: FetchLike): ForecastClient {
  const doFetch: FetchLike = fetchFn ?? ((input, init) => fetch(input, init));
  const base = baseUrl.replace(/\/$/, "");

  async function parseOrThrow<T>(response: Response): Promise<T> {
    if (response.ok) {
      return (await response.json()) as T;
    }
    let body: ApiErrorBody | null = null;
    try {
      body = (await response.json()) as ApiErrorBody;
    } catch {
      body = null;
    }
    throw new ServiceError(response.status, body);
  }

  return {
    async countries() {
      const response = await doFetch(`${base}/api/countries`);
      const payload = await parseOrThrow<{ countries: CountryProfile[] }>(response);
      return payload.countries;
    },
    async accrualModel() {
      const response = await doFetch(`${base}/api/accrual-model`);
      return parseOrThrow<AccrualModelInfo>(response);
    },
    async forecast(scenario, signal) {
      const response = await doFetch(`${base}/api/forecast`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(scenario),
        signal,
      });
      return parseOrThrow<ForecastSummary>(response);
    },
  };
}
