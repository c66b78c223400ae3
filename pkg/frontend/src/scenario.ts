/**
 * Scenario draft state: defaults, serialization to the service schema,
 * seed rerolling, and draft diffing for the comparison list.
 */

import type { CountrySites, Mode, Scenario } from "./types.js";

export interface ScenarioDraft {
  countries: CountrySites[];
  target_enrollment: number;
  replicates: number;
  mode: Mode;
  seed: number;
  pi_level: number;
  horizon_months: number;
  psm_override: number | null;
}

/** Fresh random seed; kept under 2^32 so it stays comfortably a safe integer. */
export function rerollSeed(): number {
  return Math.floor(Math.random() * 0x1_0000_0000);
}

export function newDraft(seed: number = rerollSeed()): ScenarioDraft {
  return {
    countries: [],
    target_enrollment: 100,
    replicates: 2000,
    mode: "perturbed",
    seed,
    pi_level: 0.95,
    horizon_months: 120,
    psm_override: null,
  };
}

export function cloneDraft(draft: ScenarioDraft): ScenarioDraft {
  return {
    ...draft,
    countries: draft.countries.map((c) => ({ ...c })),
  };
}

/**
 * Serialize a draft to exactly the service's Scenario JSON schema.
 * Field names and shapes must match the wire contract byte for byte
 * (modulo JSON formatting); the round-trip test pins this.
 */
export function toScenarioPayload(draft: ScenarioDraft): Scenario {
  return {
    countries: draft.countries.map((c) => ({ country: c.country, n_sites: c.n_sites })),
    target_enrollment: draft.target_enrollment,
    replicates: draft.replicates,
    mode: draft.mode,
    seed: draft.seed,
    pi_level: draft.pi_level,
    horizon_months: draft.horizon_months,
    psm_override: draft.psm_override,
  };
}

/** Human-readable names of the fields on which two drafts differ. */
export function diffDrafts(a: ScenarioDraft, b: ScenarioDraft): string[] {
  const diffs: string[] = [];
  const aByCountry = new Map(a.countries.map((c) => [c.country, c.n_sites]));
  const bByCountry = new Map(b.countries.map((c) => [c.country, c.n_sites]));
  for (const [country, sites] of bByCountry) {
    const prev = aByCountry.get(country);
    if (prev === undefined) diffs.push(`+${country}(${sites})`);
    else if (prev !== sites) diffs.push(`${country}: ${prev}→${sites}`);
  }
  for (const country of aByCountry.keys()) {
    if (!bByCountry.has(country)) diffs.push(`−${country}`);
  }
  const scalars: [keyof ScenarioDraft, string][] = [
    ["target_enrollment", "target"],
    ["replicates", "replicates"],
    ["mode", "mode"],
    ["seed", "seed"],
    ["pi_level", "PI level"],
    ["horizon_months", "horizon"],
    ["psm_override", "psm override"],
  ];
  for (const [key, label] of scalars) {
    if (a[key] !== b[key]) diffs.push(`${label}: ${a[key] ?? "auto"}→${b[key] ?? "auto"}`);
  }
  return diffs;
}
