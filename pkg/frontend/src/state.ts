// Session state: the two comparison slots, edit derivations, and the
// single-zoom invariant. Pure data + transitions so the UI is a render
// of (state, server responses).

import type { EditOp, Prediction } from "./api";

export type InputSource = "uploaded" | "recorded" | "edited";
export type Slot = "A" | "B";

export interface SessionInput {
  id: string;
  source: InputSource;
  blob: Blob;
  name: string;
  parentId?: string;
  ops?: EditOp[];
  prediction?: Prediction;
}

export interface ZoomTarget {
  layer: number;
  filter: number;
}

let counter = 0;

export class AppState {
  inputs = new Map<string, SessionInput>();
  slots: Record<Slot, string | null> = { A: null, B: null };
  zoom: ZoomTarget | null = null;

  addInput(source: InputSource, blob: Blob, name: string,
           parent?: SessionInput, ops?: EditOp[]): SessionInput {
    const input: SessionInput = {
      id: `input-${counter++}`,
      source,
      blob,
      name,
      parentId: parent?.id,
      ops: ops
        ? ops.map((op) => ({ kind: op.kind, params: { ...op.params } }))
        : undefined,
    };
    this.inputs.set(input.id, input);
    return input;
  }

  deriveEdited(parent: SessionInput, ops: EditOp[], blob: Blob): SessionInput {
    return this.addInput("edited", blob, `${parent.name} (edited)`, parent,
                         ops);
  }

  assignSlot(slot: Slot, id: string): void {
    if (!this.inputs.has(id)) throw new Error(`unknown input ${id}`);
    this.slots[slot] = id;
  }

  slotInput(slot: Slot): SessionInput | null {
    const id = this.slots[slot];
    return id ? (this.inputs.get(id) ?? null) : null;
  }

  /** Comparison needs both slots populated. */
  canCompare(): boolean {
    return this.slots.A !== null && this.slots.B !== null;
  }

  setZoom(target: ZoomTarget): void {
    this.zoom = target; // exactly one zoomed tile at a time
  }

  clearZoom(): void {
    this.zoom = null;
  }
}

/** One in-flight request per panel; newer calls abort the older one. */
export class PanelGate {
  private controllers = new Map<string, AbortController>();

  begin(panel: string): AbortSignal {
    this.controllers.get(panel)?.abort();
    const controller = new AbortController();
    this.controllers.set(panel, controller);
    return controller.signal;
  }

  finish(panel: string, signal: AbortSignal): void {
    const current = this.controllers.get(panel);
    if (current && current.signal === signal) {
      this.controllers.delete(panel);
    }
  }
}
