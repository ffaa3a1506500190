import { CategoryCount, CurrentObject, LogEvent, SessionState } from "./types.js";

// The console never keeps learning state of its own: everything below is a
// pure projection of server responses (state + event log), so reloading
// the page and replaying the GET endpoints reconstructs the exact state.

export interface ConsoleState {
  sessionId: string | null;
  current: CurrentObject | null;
  categories: CategoryCount[];
  windowAccuracy: number;
  asks: number;
  correctCount: number;
  remaining: number;
  accuracySeries: number[];
  banner: string | null;
  error: string | null;
  busy: boolean;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    current: null,
    categories: [],
    windowAccuracy: 0,
    asks: 0,
    correctCount: 0,
    remaining: 0,
    accuracySeries: [],
    banner: null,
    error: null,
    busy: false,
  };
}

// Same sliding-window rule the learner service applies.
export function windowAccuracy(outcomes: boolean[], categories: number): number {
  if (outcomes.length === 0) return 0;
  const size = Math.max(6, 3 * Math.max(categories, 1));
  const recent = outcomes.slice(-size);
  return recent.filter(Boolean).length / recent.length;
}

interface Resolution {
  outcome: boolean;
  categoriesKnown: number;
}

// Replay the event log into the sequence of resolved ask outcomes:
// teach/correct on a known prediction resolves it as hit/miss; advancing
// past a known, uncorrected prediction resolves it as an implicit confirm;
// unknown predictions never enter the window.
export function resolutionsFromLog(events: LogEvent[]): Resolution[] {
  const labels = new Set<string>();
  const resolutions: Resolution[] = [];
  let pendingPrediction: string | null = null;
  let pendingOpen = false;
  for (const event of events) {
    if (event.action === "next") {
      if (pendingOpen && pendingPrediction !== null) {
        resolutions.push({ outcome: true, categoriesKnown: Math.max(labels.size, 1) });
      }
      pendingPrediction = event.predicted ?? null;
      pendingOpen = true;
    } else if (event.action === "teach" || event.action === "correct") {
      if (event.label) labels.add(event.label);
      if (pendingOpen && pendingPrediction !== null) {
        resolutions.push({
          outcome: pendingPrediction === event.label,
          categoriesKnown: Math.max(labels.size, 1),
        });
      }
      pendingOpen = false;
      pendingPrediction = null;
    }
  }
  return resolutions;
}

// One chart point per resolved outcome, each computed with the window size
// in force at that moment.
export function accuracySeries(events: LogEvent[]): number[] {
  const resolutions = resolutionsFromLog(events);
  const outcomes: boolean[] = [];
  const series: number[] = [];
  for (const r of resolutions) {
    outcomes.push(r.outcome);
    series.push(windowAccuracy(outcomes, r.categoriesKnown));
  }
  return series;
}

export function projectState(
  previous: ConsoleState,
  server: SessionState,
  events: LogEvent[],
): ConsoleState {
  return {
    ...previous,
    sessionId: server.id,
    current: server.current,
    categories: server.categories,
    windowAccuracy: server.window_accuracy,
    asks: server.asks,
    correctCount: server.correct,
    remaining: server.remaining,
    accuracySeries: accuracySeries(events),
    error: null,
  };
}
