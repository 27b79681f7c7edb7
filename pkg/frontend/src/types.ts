/** Wire types mirroring the survey service's JSON payloads. */

export interface ConstraintJson {
  kind: "numeric_range" | "categorical_choice";
  lo: number | null;
  hi: number | null;
  choices: string[] | null;
  hint_text: string;
}

export interface QuestionJson {
  id: string;
  row: number;
  column: string;
  kind: string;
  prompt: string;
  constraint: ConstraintJson;
  /** [column name, observed value] pairs giving the row's known context. */
  context: [string, unknown][];
}

export interface BoxGroupJson {
  label: string;
  n: number;
  min: number;
  p25: number;
  median: number;
  p75: number;
  max: number;
}

export interface PlotJson {
  kind: "scatter" | "box";
  x_column: string;
  y_column: string;
  caption: string;
  points: [number, number][] | null;
  groups: BoxGroupJson[] | null;
}

export interface QuestionnaireJson {
  id: string;
  intro: string;
  prior_blurb: string | null;
  plots: PlotJson[];
  questions: QuestionJson[];
  k: number;
}

export interface Outcome {
  question_id: string;
  status: "accepted" | "rejected";
  reason: string | null;
}

export interface JobStatus {
  job_id: string;
  k: number;
  questions: Record<string, { accepted: number; status: "open" | "filled" }>;
  accepted_total: number;
  progress: number;
}

export interface QuestionnaireIndex {
  job_id: string;
  questionnaire_ids: string[];
}

/** Everything the page needs beyond the questionnaire itself. */
export interface UiState {
  /** Raw input strings keyed by question id; absent means untouched. */
  answers: Record<string, string>;
  workerId: string;
  /** Question ids whose field the respondent has interacted with. */
  touched: Record<string, boolean>;
  /** Per-question server outcomes from the last submission, if any. */
  outcomes: Record<string, Outcome>;
  submitState: "idle" | "submitting" | "done" | "failed";
  /** Human-readable transport failure, shown with a retry affordance. */
  networkError: string | null;
}

export function initialState(): UiState {
  return {
    answers: {},
    workerId: "",
    touched: {},
    outcomes: {},
    submitState: "idle",
    networkError: null,
  };
}
