/**
 * Scenario explorer controller: draft editing with inline validation, runs
 * against the forecast service, result rendering, and a pinned comparison
 * list for side-by-side what-ifs.
 *
 * Every number on screen comes from a service response field; this module
 * formats, it never computes. Exact raw values are kept in data-value
 * attributes so tests (and curious users) can trace them.
 */

import { createClient, ServiceError, type ForecastClient } from "./api.js";
import { renderFanChart } from "./fanchart.js";
import {
  cloneDraft,
  diffDrafts,
  newDraft,
  rerollSeed,
  toScenarioPayload,
  type ScenarioDraft,
} from "./scenario.js";
import type { CountryProfile, ForecastSummary } from "./types.js";
import { validateDraft, type ValidationIssue } from "./validate.js";

const DRAFT_KEY = "enrollcast-draft";

interface PinnedResult {
  id: number;
  draft: ScenarioDraft;
  summary: ForecastSummary;
  /** Scenario fields changed relative to the previous pin. */
  diffs: string[];
}

function fmt(value: number | null, digits = 2): string {
  return value === null ? "—" : value.toFixed(digits);
}

function html(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ScenarioExplorer {
  draft: ScenarioDraft;
  private catalog: CountryProfile[] = [];
  private pinned: PinnedResult[] = [];
  private current: { summary: ForecastSummary; draft: ScenarioDraft } | null = null;
  private banner: { kind: "error" | "warn"; text: string } | null = null;
  private serverFieldErrors = new Map<string, string>();
  private inflight: AbortController | null = null;
  private nextPinId = 1;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ForecastClient,
    private readonly storage: Storage | null = null,
  ) {
    this.draft = this.restoreDraft() ?? newDraft();
  }

  async init(): Promise<void> {
    this.catalog = await this.client.countries();
    const known = new Set(this.catalog.map((p) => p.country));
    this.draft.countries = this.draft.countries.filter((c) => known.has(c.country));
    this.render();
  }

  private restoreDraft(): ScenarioDraft | null {
    const raw = this.storage?.getItem(DRAFT_KEY);
    if (!raw) return null;
    try {
      return JSON.parse(raw) as ScenarioDraft;
    } catch {
      return null;
    }
  }

  private persistDraft(): void {
    this.storage?.setItem(DRAFT_KEY, JSON.stringify(this.draft));
  }

  issues(): ValidationIssue[] {
    return validateDraft(this.draft, this.catalog.map((p) => p.country));
  }

  // ------------------------------------------------------------------ editing

  addCountry(country: string): void {
    if (!this.catalog.some((p) => p.country === country)) return; // picker sources the catalog
    if (this.draft.countries.some((c) => c.country === country)) return;
    this.draft.countries.push({ country, n_sites: 5 });
    this.persistDraft();
    this.render();
  }

  removeCountry(country: string): void {
    this.draft.countries = this.draft.countries.filter((c) => c.country !== country);
    this.persistDraft();
    this.render();
  }

  setSites(country: string, value: number): void {
    const entry = this.draft.countries.find((c) => c.country === country);
    if (entry) entry.n_sites = value;
    this.persistDraft();
    this.refreshValidation();
  }

  setField<K extends keyof ScenarioDraft>(key: K, value: ScenarioDraft[K]): void {
    this.draft[key] = value;
    this.persistDraft();
    this.refreshValidation();
  }

  // ------------------------------------------------------------------ running

  async run(): Promise<void> {
    if (this.issues().length > 0) {
      this.refreshValidation();
      return;
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.serverFieldErrors.clear();
    this.banner = null;
    this.setStale(true);

    const snapshot = cloneDraft(this.draft);
    try {
      const summary = await this.client.forecast(toScenarioPayload(snapshot), controller.signal);
      // a transport may resolve instead of rejecting after abort; never
      // let a superseded run overwrite the newer result
      if (controller.signal.aborted) return;
      this.acceptResult(snapshot, summary);
    } catch (error) {
      if (controller.signal.aborted) return; // a newer submission took over
      if (error instanceof ServiceError) {
        this.handleServiceError(snapshot, error);
      } else {
        this.banner = { kind: "error", text: `service unreachable: ${String(error)}` };
      }
      this.render();
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
        this.setStale(false);
      }
    }
  }

  private acceptResult(snapshot: ScenarioDraft, summary: ForecastSummary): void {
    if (summary.censored_fraction > 0) {
      this.banner = {
        kind: "warn",
        text: summary.point_months === null
          ? "target not reached within horizon"
          : `${(summary.censored_fraction * 100).toFixed(1)}% of replicates never reached the target`,
      };
    }
    this.current = { summary, draft: snapshot };
    const previous = this.pinned[this.pinned.length - 1];
    this.pinned.push({
      id: this.nextPinId++,
      draft: snapshot,
      summary,
      diffs: previous ? diffDrafts(previous.draft, snapshot) : [],
    });
    this.render();
  }

  private handleServiceError(snapshot: ScenarioDraft, error: ServiceError): void {
    if (error.status === 422 && error.body?.summary) {
      // majority censored: keep the partial summary on screen with a banner
      this.banner = { kind: "warn", text: "target not reached within horizon" };
      this.current = { summary: error.body.summary, draft: snapshot };
      return;
    }
    if (error.body?.error) {
      this.serverFieldErrors.set(error.body.error.field, error.body.error.message);
      this.banner = { kind: "error", text: `rejected by service: ${error.message}` };
      return;
    }
    this.banner = { kind: "error", text: `service error (${error.status})` };
  }

  private setStale(stale: boolean): void {
    const result = this.root.querySelector('[data-testid="result"]');
    if (result) result.classList.toggle("stale", stale);
  }

  // ---------------------------------------------------------------- rendering

  private refreshValidation(): void {
    const issues = this.issues();
    const byField = new Map<string, string>();
    for (const issue of issues) {
      if (!byField.has(issue.field)) byField.set(issue.field, issue.message);
    }
    for (const slot of this.root.querySelectorAll<HTMLElement>("[data-error-for]")) {
      const field = slot.dataset["errorFor"]!;
      const message = byField.get(field) ?? this.serverFieldErrors.get(field) ?? "";
      slot.textContent = message;
      slot.classList.toggle("active", message !== "");
    }
    const runButton = this.root.querySelector<HTMLButtonElement>('[data-testid="run"]');
    if (runButton) runButton.disabled = issues.length > 0;
  }

  render(): void {
    this.root.replaceChildren(this.renderEditor(), this.renderResult(), this.renderPinned());
    this.refreshValidation();
  }

  private fieldRow(
    label: string,
    field: string,
    input: HTMLElement,
    extra?: HTMLElement,
  ): HTMLElement {
    const row = html("div", { class: "field-row" });
    const lab = html("label", {}, label);
    lab.appendChild(input);
    if (extra) lab.appendChild(extra);
    row.appendChild(lab);
    row.appendChild(html("span", { class: "field-error", "data-error-for": field }));
    return row;
  }

  private numberInput(
    testid: string,
    value: number | null,
    onChange: (value: number) => void,
    step = "1",
  ): HTMLInputElement {
    const input = html("input", {
      type: "number",
      step,
      value: value === null ? "" : String(value),
      "data-testid": testid,
    }) as HTMLInputElement;
    input.addEventListener("input", () => onChange(input.valueAsNumber));
    return input;
  }

  private renderEditor(): HTMLElement {
    const editor = html("section", { class: "editor", "data-testid": "editor" });
    editor.appendChild(html("h2", {}, "Scenario"));

    // country picker sourced from the service catalog
    const pickerRow = html("div", { class: "field-row" });
    const picker = html("select", { "data-testid": "country-picker" }) as HTMLSelectElement;
    const chosen = new Set(this.draft.countries.map((c) => c.country));
    for (const profile of this.catalog) {
      if (chosen.has(profile.country)) continue;
      const option = html("option", { value: profile.country },
        `${profile.country} (start-up ${profile.t_hat.toFixed(1)} mo, ${profile.n_studies} studies)`);
      picker.appendChild(option);
    }
    const addButton = html("button", { "data-testid": "add-country", type: "button" }, "Add country");
    addButton.addEventListener("click", () => {
      if (picker.value) this.addCountry(picker.value);
    });
    if (!picker.childElementCount) addButton.setAttribute("disabled", "");
    pickerRow.append(picker, addButton);
    editor.appendChild(pickerRow);

    const countryList = html("div", { class: "countries", "data-testid": "country-list" });
    for (const entry of this.draft.countries) {
      const row = html("div", { class: "country-row", "data-country": entry.country });
      row.appendChild(html("span", { class: "country-name" }, entry.country));
      const sites = this.numberInput(
        `sites-${entry.country}`, entry.n_sites,
        (value) => this.setSites(entry.country, value),
      );
      sites.setAttribute("min", "1");
      row.appendChild(sites);
      const remove = html("button", { type: "button", "data-testid": `remove-${entry.country}` }, "×");
      remove.addEventListener("click", () => this.removeCountry(entry.country));
      row.appendChild(remove);
      row.appendChild(html("span", { class: "field-error", "data-error-for": `countries.${entry.country}` }));
      countryList.appendChild(row);
    }
    countryList.appendChild(html("span", { class: "field-error", "data-error-for": "countries" }));
    editor.appendChild(countryList);

    editor.appendChild(this.fieldRow("Target enrollment", "target_enrollment",
      this.numberInput("target", this.draft.target_enrollment,
        (v) => this.setField("target_enrollment", v))));
    editor.appendChild(this.fieldRow("Replicates", "replicates",
      this.numberInput("replicates", this.draft.replicates,
        (v) => this.setField("replicates", v))));

    const mode = html("select", { "data-testid": "mode" }) as HTMLSelectElement;
    for (const value of ["fixed", "perturbed", "poisson"] as const) {
      const option = html("option", { value }, value);
      if (value === this.draft.mode) option.setAttribute("selected", "");
      mode.appendChild(option);
    }
    mode.addEventListener("input", () => this.setField("mode", mode.value as ScenarioDraft["mode"]));
    editor.appendChild(this.fieldRow("Site-activation mode", "mode", mode));

    editor.appendChild(this.fieldRow("PI level", "pi_level",
      this.numberInput("pi-level", this.draft.pi_level,
        (v) => this.setField("pi_level", v), "0.01")));
    editor.appendChild(this.fieldRow("Horizon (months)", "horizon_months",
      this.numberInput("horizon", this.draft.horizon_months,
        (v) => this.setField("horizon_months", v), "1")));

    // reproducibility is first-class: the seed is visible and rerollable
    const reroll = html("button", { type: "button", "data-testid": "reroll" }, "↻ reroll");
    reroll.addEventListener("click", () => {
      this.setField("seed", rerollSeed());
      this.render();
    });
    editor.appendChild(this.fieldRow("Seed", "seed",
      this.numberInput("seed", this.draft.seed, (v) => this.setField("seed", v)),
      reroll));

    const run = html("button", { class: "run", type: "button", "data-testid": "run" }, "Run forecast");
    run.addEventListener("click", () => void this.run());
    editor.appendChild(run);
    return editor;
  }

  private statRow(label: string, testid: string, value: number | null, suffix = " mo"): HTMLElement {
    const row = html("div", { class: "stat" });
    row.appendChild(html("span", { class: "stat-label" }, label));
    const out = html("span", {
      class: "stat-value",
      "data-testid": testid,
      "data-value": String(value),
    }, value === null ? "—" : `${fmt(value)}${suffix}`);
    row.appendChild(out);
    return row;
  }

  private renderResult(): HTMLElement {
    const section = html("section", { class: "result", "data-testid": "result" });
    section.appendChild(html("h2", {}, "Forecast"));
    if (this.banner) {
      section.appendChild(html("div", {
        class: `banner ${this.banner.kind}`,
        "data-testid": "banner",
      }, this.banner.text));
    }
    if (!this.current) {
      section.appendChild(html("p", { class: "placeholder" }, "Run a scenario to see its forecast."));
      return section;
    }
    const { summary, draft } = this.current;
    section.appendChild(this.statRow("Point prediction (median LSFD)", "point", summary.point_months));
    const pi = html("div", { class: "stat" });
    pi.appendChild(html("span", { class: "stat-label" },
      `${Math.round(summary.pi_level * 100)}% prediction interval`));
    const piValue = html("span", {
      class: "stat-value",
      "data-testid": "pi",
      "data-low": String(summary.pi_low_months),
      "data-high": String(summary.pi_high_months),
    }, `(${fmt(summary.pi_low_months)}, ${summary.pi_high_months === null ? "∞" : fmt(summary.pi_high_months)}) mo`);
    pi.appendChild(piValue);
    section.appendChild(pi);
    section.appendChild(this.statRow("FSFD (median)", "fsfd", summary.fsfd_point));
    section.appendChild(this.statRow("Censored fraction", "censored", summary.censored_fraction, ""));
    section.appendChild(renderFanChart(summary.curve, draft.target_enrollment));
    return section;
  }

  private renderPinned(): HTMLElement {
    const section = html("section", { class: "pinned", "data-testid": "pinned" });
    section.appendChild(html("h2", {}, "Comparison"));
    for (const pin of this.pinned) {
      const row = html("div", { class: "pin", "data-testid": `pin-${pin.id}` });
      const mix = pin.draft.countries.map((c) => `${c.country}:${c.n_sites}`).join(" ");
      row.appendChild(html("span", { class: "pin-scenario" },
        `#${pin.id} ${mix} target ${pin.draft.target_enrollment} ${pin.draft.mode} seed ${pin.draft.seed}`));
      row.appendChild(html("span", {
        class: "pin-point",
        "data-testid": `pin-${pin.id}-point`,
        "data-value": String(pin.summary.point_months),
      }, fmt(pin.summary.point_months)));
      row.appendChild(html("span", {
        class: "pin-pi",
        "data-low": String(pin.summary.pi_low_months),
        "data-high": String(pin.summary.pi_high_months),
      }, `(${fmt(pin.summary.pi_low_months)}, ${summaryHigh(pin.summary)})`));
      if (pin.diffs.length) {
        const chips = html("span", { class: "pin-diffs", "data-testid": `pin-${pin.id}-diffs` });
        for (const diff of pin.diffs) {
          chips.appendChild(html("em", { class: "diff-chip" }, diff));
        }
        row.appendChild(chips);
      }
      section.appendChild(row);
    }
    return section;
  }
}

function summaryHigh(summary: ForecastSummary): string {
  return summary.pi_high_months === null ? "∞" : fmt(summary.pi_high_months);
}

/** Wire the explorer into a page. */
export async function mount(
  root: HTMLElement,
  serviceUrl: string,
  storage: Storage | null = null,
  client: ForecastClient = createClient(serviceUrl),
): Promise<ScenarioExplorer> {
  const app = new ScenarioExplorer(root, client, storage);
  await app.init();
  return app;
}
