/**
 * The what-if explorer: edit features and watch the prediction move, ask for
 * counterfactuals toward a chosen target, compare attribution schemes side by
 * side, and keep the full exchange visible as a timeline. Every state change
 * round-trips through the server; the page never computes its own numbers.
 */

import { ApiClient, ApiError, CounterfactualDoc, FeatureView } from "./api.js";
import { ComparePick, renderComparePanel, runCompare } from "./components/compare.js";
import { renderContrastCard } from "./components/contrast.js";
import { ControlsHandle, renderControls } from "./components/controls.js";
import { renderPrediction } from "./components/prediction.js";
import { renderTimeline } from "./components/timeline.js";
import { DEMOS, Demo } from "./demos.js";
import { SessionStore } from "./state.js";

export class App {
  readonly store: SessionStore;
  private controls: ControlsHandle | null = null;
  private previousClass: string | null = null;
  private contrastHost: HTMLElement | null = null;
  private compareHost: HTMLElement | null = null;

  constructor(private readonly root: HTMLElement, api: ApiClient) {
    this.store = new SessionStore(api);
    this.store.subscribe(() => this.renderSession());
  }

  showDemos(): void {
    this.root.textContent = "";
    const heading = document.createElement("h1");
    heading.textContent = "modelprobe explorer";
    this.root.appendChild(heading);
    const intro = document.createElement("p");
    intro.className = "muted";
    intro.textContent =
      "Pick a demo model, then steer the dialogue: what-if edits, counterfactual targets, and scheme comparisons.";
    this.root.appendChild(intro);
    const grid = document.createElement("div");
    grid.className = "demo-grid";
    for (const demo of DEMOS) {
      const card = document.createElement("button");
      card.type = "button";
      card.className = "demo-card";
      card.dataset.demo = demo.name;
      const title = document.createElement("h3");
      title.textContent = demo.title;
      const blurb = document.createElement("p");
      blurb.textContent = demo.blurb;
      card.append(title, blurb);
      card.addEventListener("click", () => void this.openDemo(demo));
      grid.appendChild(card);
    }
    this.root.appendChild(grid);
  }

  async openDemo(demo: Demo | string): Promise<void> {
    const entry = typeof demo === "string" ? DEMOS.find((d) => d.name === demo) : demo;
    if (!entry) throw new Error(`unknown demo ${String(demo)}`);
    await this.store.create(entry.model, entry.point, entry.datasetCsv ?? undefined);
    this.renderSession();
  }

  /** Apply one edit through the server; 4xx lands inline next to the control. */
  async edit(name: string, value: number | string): Promise<void> {
    this.controls?.clearErrors();
    const before = this.store.view?.prediction.predicted_class ?? null;
    try {
      await this.store.whatif({ [name]: value });
      this.previousClass = before;
    } catch (err) {
      if (err instanceof ApiError) {
        this.controls?.showError(err.locus ?? name, err.message);
        return;
      }
      throw err;
    }
  }

  async requestCounterfactual(target: { score?: number; class?: string; tolerance?: number },
                              locked: string[], seed: number): Promise<CounterfactualDoc> {
    const doc = await this.store.counterfactual({
      target,
      distance: { kind: "mad_weighted_l1", locked },
      seed,
    });
    if (this.contrastHost) {
      this.contrastHost.textContent = "";
      this.contrastHost.appendChild(
        renderContrastCard(doc, { onAdopt: (d) => void this.adopt(d) }),
      );
    }
    return doc;
  }

  /** Adopting a counterfactual replays it as a what-if, extending the timeline. */
  async adopt(doc: CounterfactualDoc): Promise<void> {
    const edits: Record<string, number | string> = {};
    for (const change of doc.changed_features) edits[change.feature] = change.to;
    const before = this.store.view?.prediction.predicted_class ?? null;
    await this.store.whatif(edits);
    this.previousClass = before;
  }

  async compare(picks: ComparePick[], seed = 0): Promise<void> {
    if (!this.store.view) throw new Error("no active session");
    const outcomes = await runCompare(this.store, picks, { seed });
    if (this.compareHost) {
      this.compareHost.textContent = "";
      this.compareHost.appendChild(renderComparePanel(outcomes, this.store.view.schema));
    }
  }

  renderSession(): void {
    const view = this.store.view;
    if (!view) return;
    this.root.textContent = "";

    const back = document.createElement("button");
    back.type = "button";
    back.className = "back";
    back.textContent = "← demos";
    back.addEventListener("click", () => this.showDemos());
    this.root.appendChild(back);

    const layout = document.createElement("div");
    layout.className = "layout";

    const left = document.createElement("div");
    left.className = "pane inputs";
    this.controls = renderControls(view.schema, view.named, (name, value) => void this.edit(name, value));
    left.appendChild(this.controls.element);
    layout.appendChild(left);

    const middle = document.createElement("div");
    middle.className = "pane outcome";
    middle.appendChild(
      renderPrediction(view.prediction, this.store.lastWhatIf?.delta ?? null, this.previousClass),
    );
    middle.appendChild(this.renderCounterfactualForm(view.schema, view.classes));
    this.contrastHost = document.createElement("div");
    this.contrastHost.className = "contrast-host";
    middle.appendChild(this.contrastHost);
    this.compareHost = document.createElement("div");
    this.compareHost.className = "compare-host";
    middle.appendChild(this.renderCompareForm());
    middle.appendChild(this.compareHost);
    layout.appendChild(middle);

    const right = document.createElement("div");
    right.className = "pane history";
    right.appendChild(renderTimeline(this.store.timeline, () => this.exportTimeline()));
    layout.appendChild(right);

    this.root.appendChild(layout);
  }

  private renderCounterfactualForm(schema: FeatureView[], classes: string[] | null): HTMLElement {
    const form = document.createElement("form");
    form.className = "cf-form";
    const title = document.createElement("h3");
    title.textContent = "How could the data change the outcome?";
    form.appendChild(title);

    let targetControl: HTMLSelectElement | HTMLInputElement;
    if (classes) {
      targetControl = document.createElement("select");
      targetControl.name = "target-class";
      for (const cls of classes) {
        const option = document.createElement("option");
        option.value = cls;
        option.textContent = cls;
        targetControl.appendChild(option);
      }
    } else {
      targetControl = document.createElement("input");
      targetControl.type = "number";
      targetControl.name = "target-score";
      targetControl.step = "any";
      targetControl.placeholder = "target score";
    }
    form.appendChild(targetControl);

    const locks = document.createElement("div");
    locks.className = "locks";
    for (const feature of schema) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.name = `lock-${feature.name}`;
      label.append(box, document.createTextNode(` lock ${feature.name}`));
      locks.appendChild(label);
    }
    form.appendChild(locks);

    const go = document.createElement("button");
    go.type = "submit";
    go.textContent = "Find counterfactual";
    form.appendChild(go);
    const status = document.createElement("span");
    status.className = "cf-status muted";
    form.appendChild(status);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const locked = schema
        .filter((f) => (form.elements.namedItem(`lock-${f.name}`) as HTMLInputElement).checked)
        .map((f) => f.name);
      const target = classes
        ? { class: (targetControl as HTMLSelectElement).value, tolerance: 0.01 }
        : { score: Number((targetControl as HTMLInputElement).value), tolerance: 0.01 };
      status.textContent = "searching…";
      void this.requestCounterfactual(target, locked, 7)
        .then(() => { status.textContent = ""; })
        .catch((err) => { status.textContent = err instanceof Error ? err.message : String(err); });
    });
    return form;
  }

  private renderCompareForm(): HTMLElement {
    const form = document.createElement("form");
    form.className = "compare-form";
    const title = document.createElement("h3");
    title.textContent = "Compare attribution schemes";
    form.appendChild(title);
    const kinds: Array<[string, string]> = [
      ["edge_from_data", "edge"],
      ["shapley_exact", "shapley"],
      ["banzhaf_exact", "banzhaf"],
      ["lime_kernel", "lime"],
    ];
    for (const [kind, label] of kinds) {
      const wrap = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.name = `scheme-${kind}`;
      box.checked = kind === "edge_from_data" || kind === "shapley_exact";
      wrap.append(box, document.createTextNode(` ${label}`));
      form.appendChild(wrap);
    }
    const go = document.createElement("button");
    go.type = "submit";
    go.textContent = "Compare";
    form.appendChild(go);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const picks: ComparePick[] = [];
      for (const [kind, label] of kinds) {
        if (!(form.elements.namedItem(`scheme-${kind}`) as HTMLInputElement).checked) continue;
        const scheme = kind === "lime_kernel" ? { kind, n_samples: 256 } : { kind };
        picks.push({
          label: `${label} @ zero`,
          request: { scheme, baseline: { strategy: "zero" }, seed: 7 },
        });
      }
      void this.compare(picks, 7);
    });
    return form;
  }

  exportTimeline(): void {
    const payload = this.store.exportTimeline();
    const anchor = document.createElement("a");
    anchor.href = `data:application/json;charset=utf-8,${encodeURIComponent(payload)}`;
    anchor.download = `modelprobe-session-${this.store.view?.id ?? "export"}.json`;
    anchor.click();
  }
}
