// @vitest-environment jsdom
/**
 * Mock-free end-to-end smoke test against a live forecast service.
 *
 * Requires SERVICE_URL (e.g. from scripts/e2e.sh, which boots the service on
 * a synthetic history). Edits the scenario through the real DOM, runs it,
 * and checks every displayed number against an independent fetch of the
 * same scenario.
 */
import { describe, expect, it } from "vitest";

import { mount } from "../src/app.js";
import type { ForecastSummary, Scenario } from "../src/types.js";

const SERVICE_URL = process.env["SERVICE_URL"];

function query<T extends Element>(root: HTMLElement, testid: string): T {
  const node = root.querySelector<T>(`[data-testid="${testid}"]`);
  if (!node) throw new Error(`missing [data-testid=${testid}]`);
  return node;
}

function setNumber(root: HTMLElement, testid: string, value: number): void {
  const input = query<HTMLInputElement>(root, testid);
  input.value = String(value);
  input.dispatchEvent(new window.Event("input", { bubbles: true }));
}

async function waitFor(check: () => boolean, what: string, timeoutMs = 30_000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
}

describe.skipIf(!SERVICE_URL)("end-to-end against a live service", () => {
  it("edited scenario renders exactly the service's forecast", async () => {
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    await mount(root, SERVICE_URL!);

    // pick the first two catalog countries through the real picker
    const picker = query<HTMLSelectElement>(root, "country-picker");
    const countries = [...picker.options].map((option) => option.value);
    expect(countries.length).toBeGreaterThanOrEqual(2);
    const [first, second] = countries as [string, string];
    for (const country of [first, second]) {
      query<HTMLSelectElement>(root, "country-picker").value = country;
      query<HTMLButtonElement>(root, "add-country").click();
    }

    // edit site counts and controls via DOM events
    setNumber(root, `sites-${first}`, 6);
    setNumber(root, `sites-${second}`, 4);
    setNumber(root, "target", 40);
    setNumber(root, "replicates", 400);
    setNumber(root, "horizon", 60);
    setNumber(root, "seed", 20240809);

    const run = query<HTMLButtonElement>(root, "run");
    expect(run.disabled).toBe(false);
    run.click();
    await waitFor(() => root.querySelector('[data-testid="pin-1"]') !== null, "first result");

    // the same scenario, fetched independently of the UI
    const scenario: Scenario = {
      countries: [
        { country: first, n_sites: 6 },
        { country: second, n_sites: 4 },
      ],
      target_enrollment: 40,
      replicates: 400,
      mode: "perturbed",
      seed: 20240809,
      pi_level: 0.95,
      horizon_months: 60,
      psm_override: null,
    };
    const response = await fetch(`${SERVICE_URL}/api/forecast`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(scenario),
    });
    expect(response.status).toBe(200);
    const expected = (await response.json()) as ForecastSummary;

    // displayed point / PI / FSFD / censoring equal the response fields
    expect(query(root, "point").getAttribute("data-value")).toBe(String(expected.point_months));
    expect(query(root, "pi").getAttribute("data-low")).toBe(String(expected.pi_low_months));
    expect(query(root, "pi").getAttribute("data-high")).toBe(String(expected.pi_high_months));
    expect(query(root, "fsfd").getAttribute("data-value")).toBe(String(expected.fsfd_point));
    expect(query(root, "censored").getAttribute("data-value")).toBe(String(expected.censored_fraction));

    // the fan chart is built from the response curve
    const median = query(root, "median-line");
    expect(median.getAttribute("points")!.split(" ")).toHaveLength(expected.curve.length + 1);
    expect(root.querySelector('[data-testid="pi-band"]')).not.toBeNull();
    expect(root.querySelector('[data-testid="target-line"]')).not.toBeNull();

    // identical draft rerun renders identical numbers (service determinism)
    const before = {
      point: query(root, "point").textContent,
      pi: query(root, "pi").textContent,
      fsfd: query(root, "fsfd").textContent,
    };
    query<HTMLButtonElement>(root, "run").click();
    await waitFor(() => root.querySelector('[data-testid="pin-2"]') !== null, "second result");
    expect(query(root, "point").textContent).toBe(before.point);
    expect(query(root, "pi").textContent).toBe(before.pi);
    expect(query(root, "fsfd").textContent).toBe(before.fsfd);

    // editing a site count and rerunning pins a diff chip
    setNumber(root, `sites-${first}`, 8);
    query<HTMLButtonElement>(root, "run").click();
    await waitFor(() => root.querySelector('[data-testid="pin-3"]') !== null, "third result");
    expect(query(root, "pin-3-diffs").textContent).toContain(`${first}: 6→8`);
  }, 60_000);

  it("metadata endpoints feed the catalog", async () => {
    const response = await fetch(`${SERVICE_URL}/api/accrual-model`);
    expect(response.status).toBe(200);
    const model = await response.json();
    expect(model.psm).toBeCloseTo(Math.exp(model.intercept), 10);
  });
});
