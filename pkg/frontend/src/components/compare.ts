/**
 * Side-by-side attribution comparison: one chart per (scheme, baseline) pick,
 * all sharing a single axis scale, with the dominant feature flagged when
 * picks disagree and a validity-radius badge quoted from the fidelity
 * response. Per-pick failures render in place without collapsing the panel.
 */

import { AttributionRequest, ExplanationDoc, FeatureView, ProfileDoc } from "../api.js";
import { argmaxIndex, barWidthPercent, displayNumber, sharedAxisMax } from "../format.js";
import { SessionStore } from "../state.js";

export interface ComparePick {
  label: string;
  request: AttributionRequest;
}

export interface CompareOutcome {
  pick: ComparePick;
  explanation?: ExplanationDoc;
  profile?: ProfileDoc;
  error?: string;
}

export interface CompareOptions {
  radii?: number[];
  threshold?: number;
  nSamples?: number;
  seed?: number;
}

/** One attribution request per pick, then a fidelity badge per explanation. */
export async function runCompare(store: SessionStore, picks: ComparePick[],
                                 options: CompareOptions = {}): Promise<CompareOutcome[]> {
  const outcomes: CompareOutcome[] = [];
  for (const pick of picks) {
    try {
      const explanation = await store.attribution(pick.request);
      let profile: ProfileDoc | undefined;
      try {
        const fidelity = await store.fidelity({
          explanation: { event_seq: explanation.seq! },
          radii: options.radii ?? [0.5, 1.0, 2.0, 4.0],
          threshold: options.threshold ?? 0.95,
          n_samples: options.nSamples ?? 400,
          seed: options.seed ?? 0,
        });
        profile = fidelity.profile;
      } catch (err) {
        profile = undefined; // chart still renders; only the badge is missing
      }
      outcomes.push({ pick, explanation, profile });
    } catch (err) {
      outcomes.push({ pick, error: err instanceof Error ? err.message : String(err) });
    }
  }
  return outcomes;
}

export function renderComparePanel(outcomes: CompareOutcome[], schema: FeatureView[]): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "compare-panel";
  const ok = outcomes.filter((o) => o.explanation);
  const axisMax = sharedAxisMax(ok.map((o) => o.explanation!.weights));
  const argmaxes = new Set(ok.map((o) => argmaxIndex(o.explanation!.weights)));
  const disagreement = argmaxes.size > 1;

  for (const outcome of outcomes) {
    const chart = document.createElement("div");
    chart.className = "weight-chart";
    chart.dataset.label = outcome.pick.label;
    const title = document.createElement("h4");
    title.textContent = outcome.pick.label;
    chart.appendChild(title);

    if (!outcome.explanation) {
      chart.classList.add("failed");
      const error = document.createElement("p");
      error.className = "chart-error";
      error.textContent = outcome.error ?? "failed";
      chart.appendChild(error);
      panel.appendChild(chart);
      continue;
    }

    const weights = outcome.explanation.weights;
    const top = argmaxIndex(weights);
    weights.forEach((weight, i) => {
      const row = document.createElement("div");
      row.className = "bar-row";
      if (disagreement && i === top) row.classList.add("argmax-disagreement");
      const name = document.createElement("span");
      name.className = "bar-name";
      name.textContent = schema[i]?.name ?? `f${i}`;
      const track = document.createElement("span");
      track.className = "bar-track";
      const bar = document.createElement("span");
      bar.className = weight >= 0 ? "bar positive" : "bar negative";
      bar.style.width = `${barWidthPercent(weight, axisMax)}%`;
      track.appendChild(bar);
      const value = document.createElement("span");
      value.className = "bar-value";
      value.textContent = displayNumber(weight); // byte-faithful to the wire
      row.append(name, track, value);
      chart.appendChild(row);
    });

    const badge = document.createElement("span");
    badge.className = "validity-badge";
    if (outcome.profile) {
      badge.textContent = `validity radius ${displayNumber(outcome.profile.validity_radius)} at threshold ${displayNumber(outcome.profile.threshold)}`;
    } else {
      badge.textContent = "validity radius unavailable";
      badge.classList.add("muted");
    }
    chart.appendChild(badge);
    panel.appendChild(chart);
  }
  return panel;
}
