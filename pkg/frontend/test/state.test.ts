import { describe, expect, it } from "vitest";

import { initialState, reduce, type Event } from "../src/state.js";
import type { DialogSummary, SessionView } from "../src/types.js";

const dlg: DialogSummary = {
  dialog_id: "d1", name: "coffee",
  prompts: [{ id: "size", text: "What size?", choices: ["small"], branch_depth: 0 }],
  engines: ["interp", "stager", "compiled", "cogen"],
};

const session: SessionView = {
  session_id: "s1", engine: "cogen", transcript: [],
  outcome: { kind: "need", prompt_id: "size", text: "What size?", choices: ["small"] },
};

function play(events: Event[]) {
  return events.reduce(reduce, initialState());
}

describe("state transitions", () => {
  it("starts on the picker with no dialogs", () => {
    const s = initialState();
    expect(s.view).toBe("picker");
    expect(s.dialogs).toEqual([]);
  });

  it("stores loaded dialogs and clears the banner", () => {
    const s = play([
      { type: "load_failed", message: "down" },
      { type: "dialogs_loaded", dialogs: [dlg] },
    ]);
    expect(s.dialogs).toEqual([dlg]);
    expect(s.banner).toBeNull();
  });

  it("keeps the error banner for retry", () => {
    const s = play([{ type: "load_failed", message: "server down" }]);
    expect(s.banner).toBe("server down");
  });

  it("enters a session with the engine badge from the payload", () => {
    const s = play([
      { type: "dialogs_loaded", dialogs: [dlg] },
      { type: "session_started", dialog: dlg, session },
    ]);
    expect(s.view).toBe("session");
    expect(s.session?.engine).toBe("cogen");
  });

  it("a rejection is inline state, cleared by the next outcome", () => {
    const rejected = play([
      { type: "session_started", dialog: dlg, session },
      { type: "value_rejected", value: "huge", choices: ["small"] },
    ]);
    expect(rejected.rejected).toEqual({ value: "huge", choices: ["small"] });
    const advanced = reduce(rejected, {
      type: "outcome_received",
      session: { ...session, outcome: { kind: "done", message: "m", echo: [] } },
    });
    expect(advanced.rejected).toBeNull();
    expect(advanced.session?.outcome.kind).toBe("done");
  });

  it("back_to_picker clears session and artifacts", () => {
    const s = play([
      { type: "session_started", dialog: dlg, session },
      { type: "back_to_picker" },
    ]);
    expect(s.view).toBe("picker");
    expect(s.session).toBeNull();
  });

  it("runtime registration appends to the list", () => {
    const s = play([
      { type: "dialogs_loaded", dialogs: [dlg] },
      { type: "dialog_registered", dialog: { ...dlg, dialog_id: "d2", name: "tea" } },
    ]);
    expect(s.dialogs.map((d) => d.name)).toEqual(["coffee", "tea"]);
  });
});
