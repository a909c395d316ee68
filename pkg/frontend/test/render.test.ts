import { describe, expect, it } from "vitest";

import { esc, renderApp, renderOutcome } from "../src/render.js";
import { initialState, reduce } from "../src/state.js";
import type { ArtifactsPayload, DialogSummary, SessionView } from "../src/types.js";

const dlg: DialogSummary = {
  dialog_id: "d1", name: "coffee",
  prompts: [
    { id: "size", text: "What size?", choices: ["small", "medium", "large"], branch_depth: 0 },
  ],
  engines: ["interp", "stager", "compiled", "cogen"],
};

describe("renderers", () => {
  it("escapes html in service data", () => {
    expect(esc('<b>&"')).toBe("&lt;b&gt;&amp;&quot;");
    const html = renderOutcome(
      { kind: "need", prompt_id: "q", text: "a <script> tag?", choices: ["<x>"] },
      null);
    expect(html).toContain("a &lt;script&gt; tag?");
    expect(html).toContain('data-choice="&lt;x&gt;"');
  });

  it("picker renders dialogs and engine selector from payloads only", () => {
    const s = reduce(initialState(), { type: "dialogs_loaded", dialogs: [dlg] });
    const html = renderApp(s);
    expect(html).toContain("coffee");
    expect(html).toContain("size (small/medium/large)");
    for (const e of ["interp", "stager", "compiled", "cogen"]) {
      expect(html).toContain(`value="${e}"`);
    }
  });

  it("prompt renders one button per choice", () => {
    const html = renderOutcome(
      { kind: "need", prompt_id: "size", text: "What size?",
        choices: ["small", "medium", "large"] }, null);
    expect(html.match(/data-action="respond"/g)).toHaveLength(3);
    expect(html).toContain("What size?");
  });

  it("rejected value renders inline with choices re-offered", () => {
    const html = renderOutcome(
      { kind: "need", prompt_id: "size", text: "?", choices: ["small"] },
      { value: "huge", choices: ["small"] });
    expect(html).toContain("not a choice");
    expect(html).toContain("small");
  });

  it("done renders the banner message and echo verbatim", () => {
    const html = renderOutcome(
      { kind: "done", message: "coffee as ordered",
        echo: [["size", "small"], ["cream", "no"]] }, null);
    expect(html).toContain("coffee as ordered");
    expect(html).toContain("size = small");
  });

  it("error banner carries a retry button", () => {
    const s = reduce(initialState(), { type: "load_failed", message: "downstream" });
    const html = renderApp(s);
    expect(html).toContain("downstream");
    expect(html).toContain('data-action="retry"');
  });

  it("artifact inspector shows the identity badge and step table", () => {
    const artifacts: ArtifactsPayload = {
      dialog_id: "d1",
      artifacts: { dialog: "(dialog c ...)", stager: "(program s)",
                   stager_compiled: "(program s2)", compiler: "(program c)",
                   cogen: "(program g)" },
      structural_identity: true,
      step_table: [{ path: ["small"], interp_steps: 40, stager_steps: 9 }],
    };
    const s = reduce(initialState(), { type: "artifacts_loaded", artifacts });
    const html = renderApp(s);
    expect(html).toContain("identical");
    expect(html).toContain("<td>40</td><td>9</td>");
    expect(html).toContain("(program g)");
  });

  it("session view shows transcript and engine badge", () => {
    const session: SessionView = {
      session_id: "s", engine: "compiled",
      transcript: [["size", "small"]],
      outcome: { kind: "need", prompt_id: "blend", text: "Which blend?",
                 choices: ["light", "dark"] },
    };
    let s = reduce(initialState(), { type: "dialogs_loaded", dialogs: [dlg] });
    s = reduce(s, { type: "session_started", dialog: dlg, session });
    const html = renderApp(s);
    expect(html).toContain("compiled");
    expect(html).toContain("size</span> = small");
    expect(html).toContain("Which blend?");
  });
});
