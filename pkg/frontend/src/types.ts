/** Payload shapes of the staging service JSON API (schema_version "1"). */

export type Engine = "interp" | "stager" | "compiled" | "cogen";

export const ENGINES: Engine[] = ["interp", "stager", "compiled", "cogen"];

export interface PromptSummary {
  id: string;
  text: string;
  choices: string[];
  branch_depth: number;
}

export interface DialogSummary {
  dialog_id: string;
  name: string;
  prompts: PromptSummary[];
  engines: string[];
}

export type Outcome =
  | { kind: "need"; prompt_id: string; text: string; choices: string[] }
  | { kind: "done"; message: string; echo: [string, string][] }
  | { kind: "invalid"; prompt_id: string; response: string };

export interface SessionView {
  session_id: string;
  engine: Engine;
  transcript: [string, string][];
  outcome: Outcome;
}

export interface StepRow {
  path: string[];
  interp_steps: number;
  stager_steps: number;
}

export interface ArtifactsPayload {
  dialog_id: string;
  artifacts: {
    dialog: string;
    stager: string;
    stager_compiled: string;
    compiler: string;
    cogen: string;
  };
  structural_identity: boolean;
  step_table: StepRow[];
}

export interface RejectedValue {
  error: string;
  choices: string[];
}
