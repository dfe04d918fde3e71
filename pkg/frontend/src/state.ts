// Console-side session state: connection, latest snapshot, pending acks,
// NL history, teleop gating. Pure update helpers so the logic is testable
// without a DOM.

import type { ClientFrame, Scene, ServerFrame, Snapshot } from "./protocol";

export const MAX_PENDING_ACKS = 16;

export type InputMode = "observe" | "teleop";

export type HistoryEntry = {
  kind: "sent" | "ack" | "err" | "summary" | "info";
  text: string;
  ref?: number;
};

export type PendingEntry = { ref: number; type: string; sentAt: number };

export type ConsoleState = {
  connected: boolean;
  scene: Scene | null;
  snapshot: Snapshot | null;
  lastSnapshotAt: number; // ms epoch of last snapshot arrival
  inputMode: InputMode;
  pending: PendingEntry[];
  history: HistoryEntry[];
  selectedNode: number | null;
  trail: [number, number][];
  warnings: string[];
};

export function initialState(): ConsoleState {
  return {
    connected: false,
    scene: null,
    snapshot: null,
    lastSnapshotAt: 0,
    inputMode: "observe",
    pending: [],
    history: [],
    selectedNode: null,
    trail: [],
    warnings: [],
  };
}

export const TRAIL_LIMIT = 600;

export function applyServerFrame(
  state: ConsoleState,
  frame: ServerFrame,
  now: number,
): ConsoleState {
  switch (frame.type) {
    case "snapshot": {
      const scene = frame.scene ?? state.scene;
      const pos: [number, number] = [frame.follower.pose[0], frame.follower.pose[1]];
      const trail =
        frame.time === 0 ? [] : [...state.trail, pos].slice(-TRAIL_LIMIT);
      return { ...state, scene, snapshot: frame, lastSnapshotAt: now, trail };
    }
    case "ack": {
      const pending = state.pending.filter((p) => p.ref !== frame.ref);
      const entry: HistoryEntry = {
        kind: "ack",
        ref: frame.ref,
        text: frame.result ? JSON.stringify(frame.result) : "ok",
      };
      return { ...state, pending, history: [...state.history, entry] };
    }
    case "err": {
      const pending = state.pending.filter((p) => p.ref !== frame.ref);
      const entry: HistoryEntry = {
        kind: "err",
        ref: frame.ref ?? undefined,
        text: `${frame.code}: ${frame.detail}`,
      };
      return { ...state, pending, history: [...state.history, entry] };
    }
    case "summary":
      return {
        ...state,
        history: [...state.history, { kind: "summary", text: frame.text }],
      };
  }
}

/** Track an outgoing frame; pending acks are bounded, oldest dropped with a warning. */
export function trackSent(
  state: ConsoleState,
  frame: ClientFrame,
  now: number,
): ConsoleState {
  let pending = [...state.pending, { ref: frame.ref, type: frame.type, sentAt: now }];
  const warnings = [...state.warnings];
  while (pending.length > MAX_PENDING_ACKS) {
    const dropped = pending.shift()!;
    warnings.push(`dropped unacked ${dropped.type} (ref ${dropped.ref})`);
  }
  return { ...state, pending, warnings };
}

/** Teleop frames may only go out in teleop mode with the leader in Manual. */
export function canSendTeleop(state: ConsoleState): boolean {
  return (
    state.connected &&
    state.inputMode === "teleop" &&
    state.snapshot !== null &&
    state.snapshot.leader.mode === "Manual"
  );
}

export const STALE_AFTER_MS = 2000;

export function isStale(state: ConsoleState, now: number): boolean {
  if (state.snapshot === null) return true;
  return now - state.lastSnapshotAt > STALE_AFTER_MS;
}
