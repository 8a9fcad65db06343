/** Pad state reducer: pure transitions, no DOM, no network.
 *
 * The UI dispatches actions and re-renders from the returned state.
 * Request sequence numbers enforce "at most one recognition result in
 * flight": a response is applied only when its sequence number matches
 * the latest request, so a newer stroke silently supersedes older
 * responses.
 */

import type { PadStroke } from "./capture.js";
import type { RecognizeResponse } from "./api.js";

export type Method = "1" | "2";

export interface PadState {
  stroke: PadStroke | null;
  method: Method;
  vocabulary: string[];
  selectedLabel: string | null;
  recognition: RecognizeResponse | null;
  recognitionPending: boolean;
  requestSeq: number;
  error: string | null;
  toast: string | null;
  rebuildPending: boolean;
}

export const initialState: PadState = {
  stroke: null,
  method: "2",
  vocabulary: [],
  selectedLabel: null,
  recognition: null,
  recognitionPending: false,
  requestSeq: 0,
  error: null,
  toast: null,
  rebuildPending: false,
};

export type Action =
  | { type: "vocabulary-loaded"; labels: string[] }
  | { type: "stroke-finalized"; stroke: PadStroke }
  | { type: "canvas-cleared" }
  | { type: "method-toggled" }
  | { type: "recognize-started"; seq: number }
  | { type: "recognize-succeeded"; seq: number; result: RecognizeResponse }
  | { type: "recognize-failed"; seq: number; message: string }
  | { type: "label-selected"; label: string }
  | { type: "submit-succeeded"; id: string }
  | { type: "submit-failed"; message: string }
  | { type: "rebuild-started" }
  | { type: "rebuild-succeeded"; referenceCount: number }
  | { type: "rebuild-failed"; message: string; status: number | null }
  | { type: "error-dismissed" };

export function reduce(state: PadState, action: Action): PadState {
  switch (action.type) {
    case "vocabulary-loaded":
      return { ...state, vocabulary: action.labels, error: null };
    case "stroke-finalized":
      return {
        ...state,
        stroke: action.stroke,
        recognition: null,
        toast: null,
      };
    case "canvas-cleared":
      return {
        ...state,
        stroke: null,
        recognition: null,
        recognitionPending: false,
        toast: null,
      };
    case "method-toggled":
      return { ...state, method: state.method === "1" ? "2" : "1" };
    case "recognize-started":
      return {
        ...state,
        requestSeq: action.seq,
        recognitionPending: true,
        error: null,
      };
    case "recognize-succeeded":
      if (action.seq !== state.requestSeq) {
        return state; // superseded by a newer stroke
      }
      return {
        ...state,
        recognition: action.result,
        recognitionPending: false,
        error: null,
      };
    case "recognize-failed":
      if (action.seq !== state.requestSeq) {
        return state;
      }
      return {
        ...state,
        recognitionPending: false,
        error: `recognition failed: ${action.message}`,
      };
    case "label-selected":
      return { ...state, selectedLabel: action.label };
    case "submit-succeeded":
      return { ...state, toast: `sample stored as ${action.id}`, error: null };
    case "submit-failed":
      return { ...state, error: `submission failed: ${action.message}` };
    case "rebuild-started":
      return { ...state, rebuildPending: true, error: null };
    case "rebuild-succeeded":
      return {
        ...state,
        rebuildPending: false,
        toast: `model rebuilt (${action.referenceCount} references)`,
      };
    case "rebuild-failed":
      return {
        ...state,
        rebuildPending: false,
        error:
          action.status === 409
            ? "rebuild in progress"
            : `rebuild failed: ${action.message}`,
      };
    case "error-dismissed":
      return { ...state, error: null };
  }
}

/** The submit button is enabled only with a finalized stroke and a
 * chosen label. */
export function canSubmit(state: PadState): boolean {
  return state.stroke !== null && state.selectedLabel !== null;
}
