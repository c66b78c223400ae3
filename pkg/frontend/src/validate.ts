/**
 * Client-side validation mirroring the service's Scenario invariants, so a
 * request is only sent when it would pass server validation.
 */

import { MODES } from "./types.js";
import type { ScenarioDraft } from "./scenario.js";

export interface ValidationIssue {
  field: string;
  message: string;
}

function isPositiveInt(value: unknown): value is number {
  return typeof value === "number" && Number.isSafeInteger(value) && value >= 1;
}

/**
 * All invariant violations in a draft; empty means the draft is sendable.
 * The catalog is the service's country list: names outside it are rejected
 * before the server has to.
 */
export function validateDraft(draft: ScenarioDraft, catalog: readonly string[]): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const known = new Set(catalog);

  if (draft.countries.length === 0) {
    issues.push({ field: "countries", message: "add at least one country" });
  }
  const seen = new Set<string>();
  for (const { country, n_sites } of draft.countries) {
    if (seen.has(country)) {
      issues.push({ field: `countries.${country}`, message: "duplicate country" });
    }
    seen.add(country);
    if (!known.has(country)) {
      issues.push({ field: `countries.${country}`, message: "not in the historical catalog" });
    }
    if (!isPositiveInt(n_sites)) {
      issues.push({ field: `countries.${country}`, message: "site count must be a positive integer" });
    }
  }

  if (!isPositiveInt(draft.target_enrollment)) {
    issues.push({ field: "target_enrollment", message: "target must be a positive integer" });
  }
  if (!isPositiveInt(draft.replicates)) {
    issues.push({ field: "replicates", message: "replicates must be a positive integer" });
  }
  if (!MODES.includes(draft.mode)) {
    issues.push({ field: "mode", message: `mode must be one of ${MODES.join(", ")}` });
  }
  if (!(typeof draft.seed === "number" && Number.isSafeInteger(draft.seed) && draft.seed >= 0)) {
    issues.push({ field: "seed", message: "seed must be a non-negative integer" });
  }
  if (!(draft.pi_level > 0 && draft.pi_level < 1)) {
    issues.push({ field: "pi_level", message: "PI level must be strictly between 0 and 1" });
  }
  if (!(draft.horizon_months > 0)) {
    issues.push({ field: "horizon_months", message: "horizon must be positive" });
  }
  if (draft.psm_override !== null && !(draft.psm_override > 0)) {
    issues.push({ field: "psm_override", message: "psm override must be positive when set" });
  }
  return issues;
}
