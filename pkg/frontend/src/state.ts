/**
 * Session state with the audit contract baked in: after every mutation the
 * timeline is re-fetched from the server and must mirror it exactly.
 * Optimistic updates are deliberately absent.
 */

import {
  ApiClient,
  AttributionRequest,
  CounterfactualDoc,
  CounterfactualRequest,
  EventView,
  ExplanationDoc,
  FidelityDoc,
  FidelityRequest,
  SessionView,
  WhatIfResponse,
} from "./api.js";

export type Listener = () => void;

export class SessionStore {
  view: SessionView | null = null;
  timeline: EventView[] = [];
  lastWhatIf: WhatIfResponse | null = null;
  private listeners: Listener[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private get id(): string {
    if (!this.view) throw new Error("no active session");
    return this.view.id;
  }

  async create(model: unknown, point: Array<number | string> | Record<string, number | string>, datasetCsv?: string): Promise<SessionView> {
    this.view = await this.api.createSession(model, point, datasetCsv);
    this.timeline = [];
    this.lastWhatIf = null;
    await this.refresh();
    return this.view;
  }

  /** Re-fetch the session and its history; the timeline must mirror the server. */
  async refresh(): Promise<void> {
    const [view, events] = await Promise.all([
      this.api.getSession(this.id),
      this.api.history(this.id),
    ]);
    if (events.length !== view.n_events) {
      throw new Error(
        `timeline out of sync: ${events.length} events fetched, server reports ${view.n_events}`,
      );
    }
    this.view = view;
    this.timeline = events;
    this.emit();
  }

  async whatif(edits: Record<string, number | string>): Promise<WhatIfResponse> {
    const response = await this.api.whatif(this.id, edits);
    this.lastWhatIf = response;
    await this.refresh();
    return response;
  }

  async counterfactual(req: CounterfactualRequest): Promise<CounterfactualDoc> {
    const doc = await this.api.counterfactual(this.id, req);
    await this.refresh();
    return doc;
  }

  async attribution(req: AttributionRequest): Promise<ExplanationDoc> {
    const doc = await this.api.attribution(this.id, req);
    await this.refresh();
    return doc;
  }

  async fidelity(req: FidelityRequest): Promise<FidelityDoc> {
    const doc = await this.api.fidelity(this.id, req);
    await this.refresh();
    return doc;
  }

  /** Timeline export for replay through the CLI or service. */
  exportTimeline(): string {
    return JSON.stringify(
      {
        session: this.view?.id ?? null,
        initial_model: undefined,
        events: this.timeline,
      },
      null,
      2,
    );
  }
}
