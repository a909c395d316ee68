/** Browser wiring: one store, one render target, delegated events.
 * Base URL comes from ?service=... or defaults to same origin. */

import { ApiClient, ServiceError, ValueRejected } from "./api.js";
import { AppState, Event, initialState, reduce } from "./state.js";
import { renderApp } from "./render.js";
import type { Engine } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("service") ?? "");
const root = document.getElementById("app")!;

let state: AppState = initialState();

function dispatch(e: Event): void {
  state = reduce(state, e);
  root.innerHTML = renderApp(state);
}

async function loadDialogs(): Promise<void> {
  try {
    dispatch({ type: "dialogs_loaded", dialogs: await api.listDialogs() });
  } catch (e) {
    dispatch({ type: "load_failed", message: String(e) });
  }
}

async function respond(value: string): Promise<void> {
  const s = state.session;
  if (!s) return;
  try {
    const next = await api.respond(s.session_id, s.engine, value);
    dispatch({ type: "outcome_received", session: next });
  } catch (e) {
    if (e instanceof ValueRejected) {
      dispatch({ type: "value_rejected", value, choices: e.payload.choices });
    } else {
      dispatch({ type: "load_failed", message: String(e) });
    }
  }
}

root.addEventListener("click", (ev) => {
  const el = (ev.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
  if (!el) return;
  const action = el.dataset.action!;
  if (action === "retry") void loadDialogs();
  else if (action === "back") {
    dispatch({ type: "back_to_picker" });
    void loadDialogs();
  } else if (action === "start") {
    const dialog = state.dialogs.find((d) => d.dialog_id === el.dataset.dialog);
    if (!dialog) return;
    void api.createSession(dialog.dialog_id, state.engine)
      .then((session) => dispatch({ type: "session_started", dialog, session }))
      .catch((e: ServiceError) =>
        dispatch({ type: "load_failed", message: String(e) }));
  } else if (action === "inspect") {
    void api.artifacts(el.dataset.dialog!)
      .then((artifacts) => dispatch({ type: "artifacts_loaded", artifacts }))
      .catch((e: ServiceError) =>
        dispatch({ type: "load_failed", message: String(e) }));
  } else if (action === "respond") {
    void respond(el.dataset.choice!);
  } else if (action === "respond-free") {
    const input = document.getElementById("free-text") as HTMLInputElement | null;
    if (input && input.value) void respond(input.value);
  } else if (action === "register") {
    const ta = document.getElementById("dialog-source") as HTMLTextAreaElement | null;
    if (!ta || !ta.value.trim()) return;
    void api.registerDialog(ta.value)
      .then((dialog) => dispatch({ type: "dialog_registered", dialog }))
      .catch((e) => dispatch({ type: "load_failed", message: String(e) }));
  }
});

root.addEventListener("change", (ev) => {
  const el = ev.target as HTMLInputElement;
  if (el.name === "engine") {
    dispatch({ type: "engine_chosen", engine: el.value as Engine });
  }
});

dispatch({ type: "back_to_picker" });
void loadDialogs();
