/** DOM wiring for the capture pad. All recognition math lives in the
 * service; this file only captures pointer input, calls the API, and
 * renders state. */

import { ApiClient, ApiError } from "./api.js";
import { StrokeRecorder, strokeToPoints } from "./capture.js";
import type { PadStroke } from "./capture.js";
import { canSubmit, initialState, reduce } from "./state.js";
import type { Action, PadState } from "./state.js";

const params = new URLSearchParams(window.location.search);
const baseUrl =
  params.get("service") ?? `http://${window.location.hostname}:8472`;
const api = new ApiClient(baseUrl);
const recorder = new StrokeRecorder();

let state: PadState = initialState;
let seqCounter = 0;

const canvas = document.getElementById("pad") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const rankingEl = document.getElementById("ranking")!;
const diagEl = document.getElementById("diagnostics")!;
const errorEl = document.getElementById("error")!;
const toastEl = document.getElementById("toast")!;
const labelSelect = document.getElementById("label") as HTMLSelectElement;
const writerInput = document.getElementById("writer") as HTMLInputElement;
const submitBtn = document.getElementById("submit") as HTMLButtonElement;
const rebuildBtn = document.getElementById("rebuild") as HTMLButtonElement;
const clearBtn = document.getElementById("clear") as HTMLButtonElement;
const methodBtn = document.getElementById("method") as HTMLButtonElement;

function dispatch(action: Action): void {
  state = reduce(state, action);
  render();
}

function render(): void {
  methodBtn.textContent = `Method ${state.method === "1" ? "I" : "II"}`;
  errorEl.textContent = state.error ?? "";
  errorEl.hidden = state.error === null;
  toastEl.textContent = state.toast ?? "";
  toastEl.hidden = state.toast === null;
  submitBtn.disabled = !canSubmit(state);
  rebuildBtn.disabled = state.rebuildPending;

  if (labelSelect.childElementCount !== state.vocabulary.length + 1) {
    labelSelect.replaceChildren(new Option("choose label...", ""));
    for (const label of state.vocabulary) {
      labelSelect.append(new Option(label, label));
    }
  }

  if (state.recognitionPending) {
    rankingEl.textContent = "recognizing...";
    diagEl.textContent = "";
  } else if (state.recognition) {
    rankingEl.replaceChildren(
      ...state.recognition.ranking.map((entry) => {
        const li = document.createElement("li");
        li.textContent = `${entry.label}  (${entry.score.toFixed(4)})`;
        return li;
      }),
    );
    const { curvature_count: k, edf_length: len } = state.recognition;
    diagEl.textContent = `k = ${k}, features = ${len}`;
  } else {
    rankingEl.textContent = "";
    diagEl.textContent = "";
  }
}

function redraw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.lineWidth = 2;
  ctx.lineCap = "round";
  ctx.strokeStyle = "#1a1a2e";
  const paths = [state.stroke?.points ?? [], recorder.pending];
  for (const points of paths) {
    if (points.length < 2) {
      continue;
    }
    ctx.beginPath();
    ctx.moveTo(points[0].x, points[0].y);
    for (const p of points.slice(1)) {
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  }
}

function canvasPos(e: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [e.clientX - rect.left, e.clientY - rect.top];
}

async function recognize(stroke: PadStroke): Promise<void> {
  const seq = ++seqCounter;
  dispatch({ type: "recognize-started", seq });
  try {
    const result = await api.recognize(
      strokeToPoints(stroke),
      state.method,
    );
    dispatch({ type: "recognize-succeeded", seq, result });
  } catch (e) {
    dispatch({
      type: "recognize-failed",
      seq,
      message: e instanceof ApiError ? e.message : String(e),
    });
  }
}

recorder.onStroke((stroke) => {
  dispatch({ type: "stroke-finalized", stroke });
  redraw();
  void recognize(stroke);
});

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  const [x, y] = canvasPos(e);
  recorder.down(x, y, e.timeStamp);
  redraw();
});

canvas.addEventListener("pointermove", (e) => {
  if (!recorder.drawing) {
    return;
  }
  // coalesced events give the full sample train between frames
  const samples =
    typeof e.getCoalescedEvents === "function" ? e.getCoalescedEvents() : [e];
  for (const sample of samples.length > 0 ? samples : [e]) {
    const [x, y] = canvasPos(sample as PointerEvent);
    recorder.move(x, y, sample.timeStamp);
  }
  redraw();
});

canvas.addEventListener("pointerup", (e) => {
  const [x, y] = canvasPos(e);
  recorder.up(x, y, e.timeStamp);
  redraw();
});

canvas.addEventListener("pointercancel", () => {
  recorder.cancel();
  redraw();
});

clearBtn.addEventListener("click", () => {
  recorder.cancel();
  dispatch({ type: "canvas-cleared" });
  redraw();
});

methodBtn.addEventListener("click", () => {
  dispatch({ type: "method-toggled" });
  if (state.stroke) {
    void recognize(state.stroke);
  }
});

labelSelect.addEventListener("change", () => {
  if (labelSelect.value) {
    dispatch({ type: "label-selected", label: labelSelect.value });
  }
});

submitBtn.addEventListener("click", async () => {
  if (!state.stroke || !state.selectedLabel) {
    return;
  }
  try {
    const ack = await api.submitSample(
      strokeToPoints(state.stroke),
      state.selectedLabel,
      writerInput.value || "pad",
    );
    dispatch({ type: "submit-succeeded", id: ack.id });
  } catch (e) {
    dispatch({
      type: "submit-failed",
      message: e instanceof ApiError ? e.message : String(e),
    });
  }
});

rebuildBtn.addEventListener("click", async () => {
  dispatch({ type: "rebuild-started" });
  try {
    const result = await api.rebuild();
    dispatch({
      type: "rebuild-succeeded",
      referenceCount: result.reference_count,
    });
  } catch (e) {
    dispatch({
      type: "rebuild-failed",
      message: e instanceof ApiError ? e.message : String(e),
      status: e instanceof ApiError ? e.status : null,
    });
  }
});

errorEl.addEventListener("click", () => dispatch({ type: "error-dismissed" }));

api
  .primitives()
  .then((labels) => dispatch({ type: "vocabulary-loaded", labels }))
  .catch((e) =>
    dispatch({
      type: "recognize-failed",
      seq: state.requestSeq,
      message: `cannot load vocabulary: ${(e as Error).message}`,
    }),
  );

render();
redraw();
