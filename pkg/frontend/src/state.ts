/** Application state: a small event-driven store.  The session view is
 * always the last service payload verbatim; transitions never synthesize
 * dialog knowledge of their own. */

import type {
  ArtifactsPayload, DialogSummary, Engine, SessionView,
} from "./types.js";

export interface AppState {
  view: "picker" | "session" | "artifacts";
  dialogs: DialogSummary[];
  engine: Engine;
  banner: string | null;          // error banner, offered with a retry
  session: SessionView | null;
  sessionDialog: DialogSummary | null;
  rejected: { value: string; choices: string[] } | null;  // inline 422 note
  artifacts: ArtifactsPayload | null;
}

export type Event =
  | { type: "dialogs_loaded"; dialogs: DialogSummary[] }
  | { type: "load_failed"; message: string }
  | { type: "engine_chosen"; engine: Engine }
  | { type: "dialog_registered"; dialog: DialogSummary }
  | { type: "session_started"; dialog: DialogSummary; session: SessionView }
  | { type: "outcome_received"; session: SessionView }
  | { type: "value_rejected"; value: string; choices: string[] }
  | { type: "artifacts_loaded"; artifacts: ArtifactsPayload }
  | { type: "back_to_picker" };

export function initialState(): AppState {
  return {
    view: "picker", dialogs: [], engine: "interp", banner: null,
    session: null, sessionDialog: null, rejected: null, artifacts: null,
  };
}

export function reduce(s: AppState, e: Event): AppState {
  switch (e.type) {
    case "dialogs_loaded":
      return { ...s, dialogs: e.dialogs, banner: null };
    case "load_failed":
      return { ...s, banner: e.message };
    case "engine_chosen":
      return { ...s, engine: e.engine };
    case "dialog_registered":
      return { ...s, dialogs: [...s.dialogs, e.dialog], banner: null };
    case "session_started":
      return {
        ...s, view: "session", session: e.session, sessionDialog: e.dialog,
        rejected: null, banner: null,
      };
    case "outcome_received":
      return { ...s, session: e.session, rejected: null };
    case "value_rejected":
      return { ...s, rejected: { value: e.value, choices: e.choices } };
    case "artifacts_loaded":
      return { ...s, view: "artifacts", artifacts: e.artifacts, banner: null };
    case "back_to_picker":
      return {
        ...s, view: "picker", session: null, sessionDialog: null,
        rejected: null, artifacts: null,
      };
  }
}
