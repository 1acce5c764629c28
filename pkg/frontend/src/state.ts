/**
 * Viewer state machine: mirrors the server session, tracks the operator's
 * in-progress selection, and runs the submit -> poll -> plan flow. Server
 * rejections (4xx) surface as an inline error without losing the local
 * selection.
 */

import { ApiError, Plan, SessionApi, SliceSpec } from "./api.js";

export type Phase = "loading" | "selecting" | "planning" | "planned" | "error";

export interface ViewState {
  sessionId: string;
  phase: Phase;
  serverState: string;
  selected: Set<number>;
  slice: SliceSpec | null;
  plan: Plan | null;
  planVersion: number;
  error: string | null;
  showPlanOverlay: boolean;
}

export function initialState(sessionId: string): ViewState {
  return {
    sessionId,
    phase: "loading",
    serverState: "",
    selected: new Set(),
    slice: null,
    plan: null,
    planVersion: 0,
    error: null,
    showPlanOverlay: true,
  };
}

export async function syncSession(state: ViewState, api: SessionApi): Promise<void> {
  const doc = await api.getSession();
  state.serverState = doc.state;
  if (doc.state === "planned" && state.phase !== "planning") {
    state.plan = await api.getPlan();
    state.planVersion = doc.plan_versions.length;
    state.phase = "planned";
  } else if (doc.state === "awaiting_selection" && state.phase === "loading") {
    state.phase = "selecting";
  }
  // selections mirror the server after a sync, but never while the operator
  // is mid-edit (phase selecting with local picks)
  if (doc.selected_ids && state.selected.size === 0) {
    state.selected = new Set(doc.selected_ids);
  }
}

export function toggleCluster(state: ViewState, id: number): void {
  if (state.selected.has(id)) {
    state.selected.delete(id);
  } else {
    state.selected.add(id);
  }
}

/**
 * POST the operator's selection and poll until the plan is ready. On a 4xx
 * the session (and the local selection) stay as they were; the error message
 * lands in state.error for inline display.
 */
export async function submitSelection(
  state: ViewState,
  api: SessionApi,
  pollMs = 250,
  maxPolls = 240,
): Promise<boolean> {
  const ids = [...state.selected].sort((a, b) => a - b);
  state.error = null;
  const previousPhase = state.phase;
  state.phase = "planning";
  try {
    const accepted = await api.postSelection(ids, state.slice);
    let doc = await api.getSession();
    let polls = 0;
    while (doc.state !== "planned" && doc.state !== "error" && polls < maxPolls) {
      await sleep(pollMs);
      doc = await api.getSession();
      polls += 1;
    }
    if (doc.state !== "planned") {
      throw new ApiError(500, `session ended in state ${doc.state}`);
    }
    state.plan = await api.getPlan();
    state.planVersion = accepted.version;
    state.serverState = doc.state;
    state.phase = "planned";
    return true;
  } catch (err) {
    state.phase = previousPhase;
    state.error = err instanceof ApiError ? err.detail : String(err);
    return false;
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
