/** Pure HTML renderers.  Everything shown is read off the state (i.e. the
 * last service payloads); buttons carry data- attributes for delegation. */

import type { AppState } from "./state.js";
import type { Outcome, SessionView } from "./types.js";

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderApp(s: AppState): string {
  const banner = s.banner
    ? `<div class="banner error">${esc(s.banner)} ` +
      `<button data-action="retry">retry</button></div>`
    : "";
  if (s.view === "session" && s.session) return banner + renderSession(s);
  if (s.view === "artifacts" && s.artifacts) return banner + renderArtifacts(s);
  return banner + renderPicker(s);
}

export function renderPicker(s: AppState): string {
  const engines = ["interp", "stager", "compiled", "cogen"].map((e) =>
    `<label><input type="radio" name="engine" value="${e}"` +
    `${e === s.engine ? " checked" : ""}> ${e}</label>`).join(" ");
  const rows = s.dialogs.map((d) => {
    const summary = d.prompts.map((p) =>
      `${esc(p.id)} (${p.choices.map(esc).join("/")})`).join(", ");
    return `<li>
      <strong>${esc(d.name)}</strong>
      <span class="summary">${d.prompts.length} prompt(s): ${summary}</span>
      <button data-action="start" data-dialog="${esc(d.dialog_id)}">stage</button>
      <button data-action="inspect" data-dialog="${esc(d.dialog_id)}">artifacts</button>
    </li>`;
  }).join("\n");
  return `<section class="picker">
    <h2>Dialogs</h2>
    <div class="engines">engine: ${engines}</div>
    <ul class="dialogs">${rows || "<li>none registered yet</li>"}</ul>
    <details class="register">
      <summary>register a dialog</summary>
      <textarea id="dialog-source" rows="8" placeholder="(dialog ...)"></textarea>
      <button data-action="register">register</button>
    </details>
  </section>`;
}

function renderTranscript(session: SessionView): string {
  if (!session.transcript.length) return "";
  const rows = session.transcript.map(([p, v]) =>
    `<li><span class="pid">${esc(p)}</span> = ${esc(v)}</li>`).join("");
  return `<ul class="transcript">${rows}</ul>`;
}

export function renderOutcome(o: Outcome, rejected: AppState["rejected"]): string {
  if (o.kind === "need") {
    const note = rejected
      ? `<p class="rejected">'${esc(rejected.value)}' is not a choice; ` +
        `pick one of: ${rejected.choices.map(esc).join(", ")}</p>`
      : "";
    const buttons = o.choices.map((c) =>
      `<button data-action="respond" data-choice="${esc(c)}">${esc(c)}</button>`)
      .join(" ");
    return `<div class="prompt">
      <p class="question">${esc(o.text)}</p>
      ${note}
      <div class="choices">${buttons}</div>
      <div class="devmode">
        <input id="free-text" placeholder="free text (dev)">
        <button data-action="respond-free">send</button>
      </div>
    </div>`;
  }
  if (o.kind === "done") {
    const echo = o.echo.map(([p, v]) =>
      `<li>${esc(p)} = ${esc(v)}</li>`).join("");
    return `<div class="terminal done">
      <p class="message">${esc(o.message)}</p>
      <ul class="echo">${echo}</ul>
    </div>`;
  }
  return `<div class="terminal invalid">
    <p>invalid response ${esc(o.response)} at ${esc(o.prompt_id)}</p>
  </div>`;
}

export function renderSession(s: AppState): string {
  const session = s.session!;
  const name = s.sessionDialog ? esc(s.sessionDialog.name) : "";
  return `<section class="session">
    <h2>${name} <span class="engine-badge">${esc(session.engine)}</span></h2>
    ${renderTranscript(session)}
    ${renderOutcome(session.outcome, s.rejected)}
    <button data-action="back">back</button>
  </section>`;
}

export function renderArtifacts(s: AppState): string {
  const a = s.artifacts!;
  const badge = a.structural_identity
    ? `<span class="badge identical">mix-built and compiler-built stagers identical</span>`
    : `<span class="badge differs">stagers differ structurally</span>`;
  const rows = a.step_table.map((r) =>
    `<tr><td>${r.path.map(esc).join(" ") || "(empty)"}</td>` +
    `<td>${r.interp_steps}</td><td>${r.stager_steps}</td></tr>`).join("");
  const pane = (title: string, text: string) =>
    `<details><summary>${esc(title)}</summary><pre>${esc(text)}</pre></details>`;
  return `<section class="artifacts">
    <h2>Artifacts ${badge}</h2>
    ${pane("dialog source", a.artifacts.dialog)}
    ${pane("stager (projection 1)", a.artifacts.stager)}
    ${pane("stager (via projection-2 compiler)", a.artifacts.stager_compiled)}
    ${pane("compiler (projection 2)", a.artifacts.compiler)}
    ${pane("compiler generator (projection 3)", a.artifacts.cogen)}
    <table class="steps">
      <thead><tr><th>path</th><th>interpreter steps</th><th>stager steps</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <button data-action="back">back</button>
  </section>`;
}
