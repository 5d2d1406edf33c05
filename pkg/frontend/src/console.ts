/**
 * The operator console: one fold store fed by the resumable event
 * stream, projections for each panel, and submit helpers that post
 * interactions and track their acks. State is never mutated locally;
 * a connect mid-run folds history first, then tails.
 */

import { PendingTracker } from "./actions.js";
import { EventStream, MissionClient, type SocketFactory } from "./client.js";
import type { HumanInteraction, MissionEvent } from "./events.js";
import { emptyFoldState, foldEvent, type FoldState } from "./store.js";
import {
  beliefInspector,
  decisionTimeline,
  mapLayer,
  pendingConfirmations,
  permissionPanel,
} from "./view.js";

export class OperatorConsole {
  readonly state: FoldState = emptyFoldState();
  readonly pendingActions = new PendingTracker();
  private stream: EventStream | null = null;

  constructor(
    readonly client: MissionClient,
    readonly missionId: string,
    private readonly sockets: SocketFactory,
    private readonly onChange: (state: FoldState) => void = () => {},
  ) {}

  connect(fromSeq = 1): void {
    this.stream = new EventStream(
      this.client,
      this.missionId,
      {
        fromSeq,
        onEvent: (ev) => this.apply(ev),
        onClose: () => this.stream?.reopen(),
      },
      this.sockets,
    );
    this.stream.open();
  }

  disconnect(): void {
    this.stream?.close();
  }

  private apply(ev: MissionEvent): void {
    foldEvent(this.state, ev);
    this.pendingActions.observe(ev);
    this.onChange(this.state);
  }

  async submit(interaction: HumanInteraction): Promise<number> {
    const { seq } = await this.client.submitInteraction(this.missionId, interaction);
    this.pendingActions.submitted(seq, interaction);
    return seq;
  }

  // panel projections -------------------------------------------------

  map() {
    return mapLayer(this.state);
  }

  beliefs() {
    return beliefInspector(this.state);
  }

  confirmations() {
    return pendingConfirmations(this.state);
  }

  permissions() {
    return permissionPanel(this.state);
  }

  timeline() {
    return decisionTimeline(this.state);
  }
}
