/**
 * Wire types mirroring the forecast service JSON exactly (lower_snake_case).
 */

export type Mode = "fixed" | "perturbed" | "poisson";

export const MODES: readonly Mode[] = ["fixed", "perturbed", "poisson"];

export interface CountrySites {
  country: string;
  n_sites: number;
}

/** POST /api/forecast request body. */
export interface Scenario {
  countries: CountrySites[];
  target_enrollment: number;
  replicates: number;
  mode: Mode;
  seed: number;
  pi_level: number;
  horizon_months: number;
  psm_override: number | null;
}

export interface CurvePoint {
  month: number;
  q_low: number;
  q_median: number;
  q_high: number;
}

/** POST /api/forecast response body. Null bounds mean a censored quantile. */
export interface ForecastSummary {
  point_months: number | null;
  pi_low_months: number | null;
  pi_high_months: number | null;
  fsfd_point: number | null;
  fsfd_pi_low: number | null;
  fsfd_pi_high: number | null;
  censored_fraction: number;
  pi_level: number;
  curve: CurvePoint[];
}

/** GET /api/countries entry. */
export interface CountryProfile {
  country: string;
  t_hat: number;
  gap_hat: number;
  n_studies: number;
}

/** GET /api/accrual-model response. */
export interface AccrualModelInfo {
  intercept: number;
  intercept_se: number;
  dispersion: number;
  psm: number;
  n_studies_fit: number;
}

/** Error object carried by 4xx responses. */
export interface ApiErrorBody {
  error: { field: string; message: string };
  censored_fraction?: number;
  summary?: ForecastSummary;
}
