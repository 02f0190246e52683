/** Prediction card with an old -> new delta readout after each what-if. */

import { PredictionView } from "../api.js";
import { displayNumber } from "../format.js";

export function renderPrediction(prediction: PredictionView, delta: number | null = null,
                                 previousClass: string | null = null): HTMLElement {
  const card = document.createElement("div");
  card.className = "prediction-card";
  if (prediction.predicted_class !== undefined && prediction.predicted_class !== null) {
    const label = document.createElement("div");
    label.className = "predicted-class";
    label.textContent = prediction.predicted_class;
    if (previousClass !== null && previousClass !== prediction.predicted_class) {
      label.classList.add("flipped");
      const note = document.createElement("span");
      note.className = "flip-note";
      note.textContent = ` (was ${previousClass})`;
      label.appendChild(note);
    }
    card.appendChild(label);
    const list = document.createElement("ul");
    list.className = "prob-list";
    (prediction.probabilities ?? []).forEach((p, i) => {
      const item = document.createElement("li");
      item.textContent = `${prediction.classes?.[i] ?? i}: ${displayNumber(p)}`;
      list.appendChild(item);
    });
    card.appendChild(list);
  } else {
    const score = document.createElement("div");
    score.className = "score";
    score.textContent = displayNumber(prediction.score ?? null);
    card.appendChild(score);
    if (delta !== null) {
      const chip = document.createElement("span");
      chip.className = "delta-chip";
      chip.textContent = `Δ ${displayNumber(delta)}`;
      card.appendChild(chip);
    }
  }
  return card;
}
