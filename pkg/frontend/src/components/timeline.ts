/** The iteration record: every server event, in order, with an export button. */

import { EventView } from "../api.js";

function summarize(event: EventView): string {
  const response = event.response as Record<string, unknown>;
  switch (event.kind) {
    case "whatif": {
      const edits = (event.request as { edits: Record<string, unknown> }).edits;
      const parts = Object.entries(edits).map(([k, v]) => `${k}=${v}`);
      return parts.length ? `what-if ${parts.join(", ")}` : "what-if (no change)";
    }
    case "counterfactual":
      return (response.converged as boolean)
        ? `counterfactual found (distance ${JSON.stringify(response.distance)})`
        : "counterfactual: none within budget";
    case "attribution": {
      const scheme = (response.scheme as { kind: string }).kind;
      return `attribution: ${scheme}`;
    }
    case "fidelity":
      return "validity check";
    default:
      return event.kind;
  }
}

export function renderTimeline(events: EventView[], onExport: () => void): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "timeline";
  const header = document.createElement("div");
  header.className = "timeline-header";
  const title = document.createElement("h3");
  title.textContent = `Timeline (${events.length})`;
  header.appendChild(title);
  const exportButton = document.createElement("button");
  exportButton.type = "button";
  exportButton.className = "export";
  exportButton.textContent = "Export";
  exportButton.addEventListener("click", onExport);
  header.appendChild(exportButton);
  wrap.appendChild(header);

  const list = document.createElement("ol");
  list.className = "timeline-list";
  for (const event of events) {
    const item = document.createElement("li");
    item.dataset.seq = String(event.seq);
    item.dataset.kind = event.kind;
    const badge = document.createElement("span");
    badge.className = `kind kind-${event.kind}`;
    badge.textContent = event.kind;
    const text = document.createElement("span");
    text.textContent = ` #${event.seq} ${summarize(event)}`;
    item.append(badge, text);
    list.appendChild(item);
  }
  wrap.appendChild(list);
  return wrap;
}
