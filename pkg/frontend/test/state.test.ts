import { describe, expect, it } from "vitest";

import { SessionEventMsg, SuggestionPayload } from "../src/protocol.js";
import {
  MissingSlotError,
  applyEvent,
  applyStateSnapshot,
  buildExecuteArgs,
  initialState,
  missingMandatorySlots,
} from "../src/state.js";

const EQSUBST: SuggestionPayload = {
  command: "EqSubst",
  args: "EqSubst{u:L1,eq:~,s:L2,pl:[1]}",
  completeness: 0.75,
  complete: false,
  goal_closing: false,
  slots: [
    { name: "u", kind: "premise-line", value: "L1", mandatory: true },
    { name: "eq", kind: "premise-line", value: null, mandatory: false },
    { name: "s", kind: "conclusion-line", value: "L2", mandatory: true },
    { name: "pl", kind: "parameter", value: "[1]", mandatory: true },
  ],
};

function ev(kind: SessionEventMsg["kind"], epoch: number, payload: any): SessionEventMsg {
  return { seq: 0, kind, epoch, payload };
}

describe("event reducer", () => {
  it("tracks the epoch of the last received event", () => {
    let s = initialState();
    s = applyEvent(s, ev("proof-updated", 1, { lines: ["C () |- a Open"], complete: false }));
    expect(s.epoch).toBe(1);
    s = applyEvent(s, ev("classification", 1, { class: "HO" }));
    expect(s.classification).toBe("HO");
    s = applyEvent(s, ev("proof-updated", 2, { lines: ["..."], complete: false }));
    expect(s.epoch).toBe(2);
  });

  it("a new epoch clears suggestions and classification until refreshed", () => {
    let s = initialState();
    s = applyEvent(s, ev("proof-updated", 1, { lines: ["l"], complete: false }));
    s = applyEvent(s, ev("suggestions-updated", 1, { suggestions: [EQSUBST] }));
    s = applyEvent(s, ev("classification", 1, { class: "HO" }));
    expect(s.suggestions).toHaveLength(1);
    s = applyEvent(s, ev("proof-updated", 2, { lines: ["l", "m"], complete: false }));
    expect(s.suggestions).toHaveLength(0);
    expect(s.classification).toBeNull();
    expect(s.awaitingSuggestions).toBe(true);
  });

  it("preserves the service's suggestion order verbatim", () => {
    const other = { ...EQSUBST, command: "AndI", args: "AndI{p1:~,p2:~,c:L9}" };
    let s = initialState();
    s = applyEvent(s, ev("suggestions-updated", 1, { suggestions: [other, EQSUBST] }));
    expect(s.suggestions.map((e) => e.command)).toEqual(["AndI", "EqSubst"]);
  });

  it("resource reports replace the dashboard model", () => {
    let s = initialState();
    const payload = {
      threshold: 3.0,
      reports: [{ command: "EqSubst", average: 3.2, active: 1, retired: 3 }],
      agents: [
        { agent: "EqSubst/find-eq", rating: 3.5, failures: 3, retired: true, excluded: false },
      ],
    };
    s = applyEvent(s, ev("resource-report", 1, payload));
    expect(s.resources.agents[0].retired).toBe(true);
    expect(s.resources.threshold).toBe(3.0);
  });

  it("proof completion empties suggestions", () => {
    let s = initialState();
    s = applyEvent(s, ev("suggestions-updated", 1, { suggestions: [EQSUBST] }));
    s = applyEvent(s, ev("proof-complete", 5, { lines: 5 }));
    expect(s.proofComplete).toBe(true);
    expect(s.suggestions).toHaveLength(0);
  });

  it("snapshot resync replaces everything at once", () => {
    const snap = {
      epoch: 3,
      proof: { lines: ["a", "b"], complete: false },
      suggestions: [EQSUBST],
      classification: "HO",
      resources: { reports: [], agents: [] },
    };
    const s = applyStateSnapshot(initialState(), snap as any);
    expect(s.epoch).toBe(3);
    expect(s.proofLines).toEqual(["a", "b"]);
    expect(s.suggestions).toHaveLength(1);
  });
});

describe("execute builder", () => {
  it("without edits sends the canonical serialization byte-exact", () => {
    expect(buildExecuteArgs(EQSUBST)).toBe("EqSubst{u:L1,eq:~,s:L2,pl:[1]}");
  });

  it("fills unassigned slots from the editor", () => {
    const entry: SuggestionPayload = {
      ...EQSUBST,
      args: "EqSubst{u:L1,eq:~,s:L2,pl:~}",
      slots: EQSUBST.slots.map((s) =>
        s.name === "pl" ? { ...s, value: null } : s,
      ),
    };
    expect(buildExecuteArgs(entry, { pl: "[1]" })).toBe("EqSubst{u:L1,eq:~,s:L2,pl:[1]}");
  });

  it("blocks when a mandatory slot stays empty", () => {
    const entry: SuggestionPayload = {
      ...EQSUBST,
      slots: EQSUBST.slots.map((s) =>
        s.name === "pl" ? { ...s, value: null } : s,
      ),
    };
    expect(() => buildExecuteArgs(entry, {})).toThrow(MissingSlotError);
    expect(missingMandatorySlots(entry)).toEqual(["pl"]);
  });

  it("edits cannot overwrite assigned slots", () => {
    expect(buildExecuteArgs(EQSUBST, { u: "L9" })).toBe(
      "EqSubst{u:L1,eq:~,s:L2,pl:[1]}",
    );
  });
});
