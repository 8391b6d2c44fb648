// Client-side session state: a pure reducer over server events, plus the
// argument-map builder used when a suggestion is clicked.
//
// Invariants kept here: the displayed epoch always comes from the last
// received event; the suggestion list is shown exactly in service order;
// clicking a suggestion sends back the canonical serialization it carried
// (with any unassigned slots the user filled in substituted).

import {
  ProofPayload,
  ResourcePayload,
  SessionEventMsg,
  StateResult,
  SuggestionPayload,
} from "./protocol.js";

export interface UiSessionState {
  connected: boolean;
  retrying: boolean;
  epoch: number;
  proofLines: string[];
  proofComplete: boolean;
  suggestions: SuggestionPayload[];
  classification: string | null;
  resources: ResourcePayload & { threshold?: number };
  lastError: string | null;
  awaitingSuggestions: boolean;
}

export function initialState(): UiSessionState {
  return {
    connected: false,
    retrying: false,
    epoch: 0,
    proofLines: [],
    proofComplete: false,
    suggestions: [],
    classification: null,
    resources: { reports: [], agents: [] },
    lastError: null,
    awaitingSuggestions: false,
  };
}

export function applyEvent(state: UiSessionState, ev: SessionEventMsg): UiSessionState {
  const next = { ...state, epoch: ev.epoch };
  switch (ev.kind) {
    case "proof-updated": {
      const proof = ev.payload as ProofPayload;
      next.proofLines = proof.lines;
      next.proofComplete = proof.complete;
      if (ev.epoch > state.epoch) {
        // a new epoch invalidates the previous board content
        next.suggestions = [];
        next.classification = null;
        next.awaitingSuggestions = !proof.complete;
      }
      return next;
    }
    case "proof-complete":
      next.proofComplete = true;
      next.suggestions = [];
      next.awaitingSuggestions = false;
      return next;
    case "classification":
      next.classification = ev.payload.class;
      return next;
    case "suggestions-updated":
      next.suggestions = ev.payload.suggestions as SuggestionPayload[];
      next.awaitingSuggestions = false;
      return next;
    case "resource-report":
      next.resources = ev.payload as ResourcePayload;
      return next;
    default:
      return next;
  }
}

export function applyStateSnapshot(state: UiSessionState, snap: StateResult): UiSessionState {
  return {
    ...state,
    epoch: snap.epoch,
    proofLines: snap.proof.lines,
    proofComplete: snap.proof.complete,
    suggestions: snap.suggestions,
    classification: snap.classification,
    resources: snap.resources,
    awaitingSuggestions: false,
  };
}

export class MissingSlotError extends Error {
  constructor(public readonly slot: string) {
    super(`argument ${slot} is required`);
  }
}

/**
 * Serialization to send when a suggestion is executed.
 *
 * Without edits this is byte-exact the `args` the service sent.  Edits
 * fill unassigned slots; a mandatory slot left empty blocks the request
 * client-side.
 */
export function buildExecuteArgs(
  entry: SuggestionPayload,
  edits: Record<string, string> = {},
): string {
  for (const slot of entry.slots) {
    const edited = edits[slot.name]?.trim();
    if (slot.mandatory && slot.value === null && !edited) {
      throw new MissingSlotError(slot.name);
    }
  }
  if (Object.keys(edits).length === 0) {
    return entry.args;
  }
  const parts = entry.slots.map((slot) => {
    const edited = edits[slot.name]?.trim();
    const value = edited && slot.value === null ? edited : slot.value ?? "~";
    return `${slot.name}:${value}`;
  });
  return `${entry.command}{${parts.join(",")}}`;
}

/** Slot names the user still has to provide before executing. */
export function missingMandatorySlots(entry: SuggestionPayload): string[] {
  return entry.slots
    .filter((slot) => slot.mandatory && slot.value === null)
    .map((slot) => slot.name);
}
