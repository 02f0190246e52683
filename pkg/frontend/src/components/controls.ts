/**
 * Feature controls: sliders for bounded continuous features, steppers for
 * counts, dropdowns for categoricals. Bounds are enforced client-side: an
 * out-of-range value marks the control invalid and no request is sent.
 */

import { FeatureView } from "../api.js";

export type EditHandler = (name: string, value: number | string) => void;

export interface ControlsHandle {
  element: HTMLElement;
  setValues(named: Record<string, number | string>): void;
  showError(feature: string | null, message: string): void;
  clearErrors(): void;
}

function inBounds(feature: FeatureView, value: number): boolean {
  if (Number.isNaN(value)) return false;
  if (feature.lower !== undefined && feature.lower !== null && value < feature.lower) return false;
  if (feature.upper !== undefined && feature.upper !== null && value > feature.upper) return false;
  if (feature.kind === "count" && !Number.isInteger(value)) return false;
  return true;
}

export function renderControls(schema: FeatureView[], named: Record<string, number | string>, onEdit: EditHandler): ControlsHandle {
  const element = document.createElement("div");
  element.className = "controls";
  const rows = new Map<string, { row: HTMLElement; set: (v: number | string) => void; error: HTMLElement }>();

  for (const feature of schema) {
    const row = document.createElement("div");
    row.className = "control-row";
    row.dataset.feature = feature.name;
    const label = document.createElement("label");
    label.textContent = feature.name;
    row.appendChild(label);
    const error = document.createElement("span");
    error.className = "control-error";
    error.hidden = true;

    if (feature.kind === "categorical") {
      const select = document.createElement("select");
      for (const category of feature.categories ?? []) {
        const option = document.createElement("option");
        option.value = category;
        option.textContent = category;
        select.appendChild(option);
      }
      select.value = String(named[feature.name]);
      select.addEventListener("change", () => onEdit(feature.name, select.value));
      row.appendChild(select);
      rows.set(feature.name, { row, set: (v) => { select.value = String(v); }, error });
    } else {
      const bounded = feature.lower !== undefined && feature.upper !== undefined;
      const input = document.createElement("input");
      input.type = "number";
      if (feature.lower !== undefined) input.min = String(feature.lower);
      if (feature.upper !== undefined) input.max = String(feature.upper);
      input.step = feature.kind === "count" ? "1" : "any";
      input.value = String(named[feature.name]);

      let slider: HTMLInputElement | null = null;
      if (bounded && feature.kind === "continuous") {
        slider = document.createElement("input");
        slider.type = "range";
        slider.min = String(feature.lower);
        slider.max = String(feature.upper);
        slider.step = "any";
        slider.value = input.value;
        slider.addEventListener("input", () => {
          input.value = slider!.value;
        });
        slider.addEventListener("change", () => commit(Number(slider!.value)));
        row.appendChild(slider);
      }

      const commit = (value: number) => {
        if (!inBounds(feature, value)) {
          // client-side rejection: flag the control, send nothing
          row.classList.add("invalid");
          error.textContent = `out of bounds [${feature.lower ?? "-inf"}, ${feature.upper ?? "inf"}]`;
          error.hidden = false;
          return;
        }
        row.classList.remove("invalid");
        error.hidden = true;
        onEdit(feature.name, value);
      };
      input.addEventListener("change", () => commit(Number(input.value)));

      if (feature.kind === "count") {
        const makeStep = (delta: number) => {
          const button = document.createElement("button");
          button.type = "button";
          button.className = "stepper";
          button.textContent = delta > 0 ? "+" : "−";
          button.addEventListener("click", () => commit(Number(input.value) + delta));
          return button;
        };
        row.appendChild(makeStep(-1));
        row.appendChild(input);
        row.appendChild(makeStep(+1));
      } else {
        row.appendChild(input);
      }
      rows.set(feature.name, {
        row,
        set: (v) => {
          input.value = String(v);
          if (slider) slider.value = String(v);
        },
        error,
      });
    }
    row.appendChild(error);
    element.appendChild(row);
  }

  return {
    element,
    setValues(values) {
      for (const [name, value] of Object.entries(values)) {
        rows.get(name)?.set(value);
      }
    },
    showError(feature, message) {
      if (feature && rows.has(feature)) {
        // render the server's 4xx inline next to the offending control
        const entry = rows.get(feature)!;
        entry.row.classList.add("invalid");
        entry.error.textContent = message;
        entry.error.hidden = false;
      } else {
        for (const entry of rows.values()) {
          entry.error.textContent = message;
          entry.error.hidden = false;
          break;
        }
      }
    },
    clearErrors() {
      for (const entry of rows.values()) {
        entry.row.classList.remove("invalid");
        entry.error.hidden = true;
      }
    },
  };
}
