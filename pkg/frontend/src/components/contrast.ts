/**
 * Counterfactual card: changed features as from -> to chips, the server's
 * statement verbatim, and an adopt button that feeds the answer back into the
 * dialogue as a what-if. Non-convergence gets its own explicit card.
 */

import { CounterfactualDoc } from "../api.js";
import { displayNumber, displayValue } from "../format.js";

export interface ContrastCallbacks {
  onAdopt: (doc: CounterfactualDoc) => void;
}

export function renderContrastCard(doc: CounterfactualDoc, callbacks: ContrastCallbacks): HTMLElement {
  const card = document.createElement("div");
  if (!doc.converged) {
    card.className = "contrast-card no-counterfactual";
    const message = document.createElement("p");
    message.textContent = "No counterfactual found within budget.";
    card.appendChild(message);
    const detail = document.createElement("p");
    detail.className = "muted";
    detail.textContent = `Closest attempt scored ${displayNumber(doc.score)} at distance ${displayNumber(doc.distance)}.`;
    card.appendChild(detail);
    return card;
  }
  card.className = "contrast-card";
  const chips = document.createElement("div");
  chips.className = "chips";
  for (const change of doc.changed_features) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.dataset.feature = change.feature;
    chip.textContent = `${change.feature}: ${displayValue(change.from)} → ${displayValue(change.to)}`;
    chips.appendChild(chip);
  }
  card.appendChild(chips);

  const statement = document.createElement("blockquote");
  statement.className = "statement";
  statement.textContent = doc.statement; // verbatim from the server
  card.appendChild(statement);

  const meta = document.createElement("p");
  meta.className = "muted";
  meta.textContent = `distance ${displayNumber(doc.distance)}, score ${displayNumber(doc.score)}`;
  card.appendChild(meta);

  const adopt = document.createElement("button");
  adopt.type = "button";
  adopt.className = "adopt";
  adopt.textContent = "Adopt this counterfactual";
  adopt.addEventListener("click", () => callbacks.onAdopt(doc));
  card.appendChild(adopt);
  return card;
}
