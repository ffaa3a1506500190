// Typed mirror of the session service's JSON payloads. The shapes are
// checked against fixtures/api_fixtures.json on both sides of the wire.

export interface PredictionPayload {
  label: string | null;
  distance: number | null;
  runner_up: { label: string; distance: number } | null;
}

export interface EntropyPayload {
  entropies: Record<string, number | null>;
  selected: string;
  bins: number;
}

export interface CurrentObject {
  cloud_ref: string;
  selected_view: string;
  entropy: EntropyPayload;
  prediction: PredictionPayload;
  consumed: boolean;
  depth_views?: Record<string, string>; // base64 PNG per view
  color_view?: string;                  // base64 PNG of the selected view
}

export interface CategoryCount {
  label: string;
  instances: number;
}

export interface SessionState {
  id: string;
  mode: string;
  current: CurrentObject | null;
  categories: CategoryCount[];
  window_accuracy: number;
  asks: number;
  correct: number;
  remaining: number;
  log_length: number;
}

export interface SessionCreated {
  id: string;
  mode: string;
  n_views: number;
  categories: CategoryCount[];
}

export interface LogEvent {
  index: number;
  action: "next" | "teach" | "correct";
  cloud_ref: string;
  label?: string;
  predicted?: string | null;
  distance?: number | null;
}

export interface SessionLog {
  events: LogEvent[];
  length: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
