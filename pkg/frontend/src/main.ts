/** Console wiring: connects the DOM to the HTTP client and the pure
 *  state/geometry modules.  All rendering below is a projection of
 *  (server data, view state); nothing here classifies pixels.
 */

import {
  ApiError,
  InspectorClient,
  type CurvePayload,
  type PromptBox,
  type SegmentResult,
  type SequenceInfo,
} from "./api.js";
import { layoutCurves, type PlotLayout } from "./chart.js";
import { colorForPrompt, maskToRgba } from "./overlay.js";
import { pgmFromBase64, type GrayImage } from "./pgm.js";
import {
  addPrompt,
  annotatorValid,
  clampBox,
  clearPrompts,
  dragBox,
  initialState,
  nextPromptId,
  pixelFromOffset,
  removePrompt,
  scrubTo,
  selectSequence,
  setAnnotator,
  setColormap,
  setCorrected,
  setOpacity,
  type ColormapName,
  type ViewState,
} from "./state.js";
import { showToast } from "./toast.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

// The console is mounted at /ui on the same origin as the API, so
// origin-absolute paths (empty base) reach the service endpoints.
const client = new InspectorClient("");

// ---- elements ------------------------------------------------------------

const sequenceSelect = el<HTMLSelectElement>("sequence-select");
const sequenceMeta = el<HTMLElement>("sequence-meta");
const frameSlider = el<HTMLInputElement>("frame-slider");
const frameLabel = el<HTMLElement>("frame-label");
const colormapSelect = el<HTMLSelectElement>("colormap-select");
const correctedToggle = el<HTMLInputElement>("corrected-toggle");
const opacitySlider = el<HTMLInputElement>("opacity-slider");
const viewer = el<HTMLDivElement>("viewer");
const frameImage = el<HTMLImageElement>("frame-image");
const maskCanvas = el<HTMLCanvasElement>("mask-canvas");
const draftCanvas = el<HTMLCanvasElement>("draft-canvas");
const promptList = el<HTMLUListElement>("prompt-list");
const segmentButton = el<HTMLButtonElement>("segment-button");
const acceptButton = el<HTMLButtonElement>("accept-button");
const clearButton = el<HTMLButtonElement>("clear-button");
const annotatorInput = el<HTMLInputElement>("annotator-input");
const statusLine = el<HTMLElement>("status-line");
const curveCanvas = el<HTMLCanvasElement>("curve-canvas");
const curveCaption = el<HTMLElement>("curve-caption");
const toasts = el<HTMLDivElement>("toast-container");

// ---- state ---------------------------------------------------------------

let state: ViewState = initialState();
let sequences: SequenceInfo[] = [];
let activeInfo: SequenceInfo | null = null;
// Server data projected next to the view state:
let lastResult: SegmentResult | null = null;
let lastResultPrompts: PromptBox[] = [];
let lastMasks: Map<string, GrayImage> = new Map();
let curve: CurvePayload | null = null;
let lastLatencyMs: number | null = null;
// Pointer interaction scratch:
let dragStart: { row: number; col: number; x: number; y: number } | null = null;
let liveBox: PromptBox | null = null;

const MAX_VIEW_PX = 480;

function scaleFor(info: SequenceInfo): number {
  return Math.max(1, Math.floor(MAX_VIEW_PX / Math.max(info.rows, info.cols)));
}

function fail(err: unknown): void {
  const message = err instanceof ApiError
    ? `server: ${err.message}`
    : err instanceof Error ? err.message : String(err);
  showToast(toasts, message, "error");
}

// ---- rendering (projection of state + server data) ------------------------

function renderFrame(): void {
  if (!state.sequenceId || !activeInfo) return;
  frameImage.src = client.frameUrl(state.sequenceId, state.frameIndex, {
    colormap: state.colormap,
    corrected: state.corrected,
  });
  const t = (state.frameIndex + 1) / activeInfo.frame_rate;
  frameLabel.textContent =
    `frame ${state.frameIndex} / ${state.frameCount - 1} · ${t.toFixed(2)} s`;
  frameSlider.max = String(Math.max(0, state.frameCount - 1));
  frameSlider.value = String(state.frameIndex);
}

function renderMaskOverlay(): void {
  const ctx = maskCanvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, maskCanvas.width, maskCanvas.height);
  if (!lastResult) return;
  lastResult.prompts.forEach((verdict, index) => {
    const mask = lastMasks.get(verdict.id);
    if (!mask || mask.rows !== state.rows || mask.cols !== state.cols) return;
    const rgba = maskToRgba(mask, colorForPrompt(index), state.overlayOpacity);
    const image = new ImageData(
      new Uint8ClampedArray(rgba), mask.cols, mask.rows);
    // Blend through a scratch canvas so overlapping masks keep both tints.
    const scratch = document.createElement("canvas");
    scratch.width = mask.cols;
    scratch.height = mask.rows;
    scratch.getContext("2d")?.putImageData(image, 0, 0);
    ctx.drawImage(scratch, 0, 0);
  });
}

function renderDraftBoxes(): void {
  const ctx = draftCanvas.getContext("2d");
  if (!ctx || !activeInfo) return;
  const scale = scaleFor(activeInfo);
  ctx.clearRect(0, 0, draftCanvas.width, draftCanvas.height);
  const drawBox = (box: PromptBox, index: number, dashed: boolean) => {
    ctx.strokeStyle = colorForPrompt(index);
    ctx.lineWidth = 2;
    ctx.setLineDash(dashed ? [6, 4] : []);
    const x = box.col0 * scale;
    const y = box.row0 * scale;
    const w = (box.col1 - box.col0 + 1) * scale;
    const h = (box.row1 - box.row0 + 1) * scale;
    ctx.strokeRect(x + 0.5, y + 0.5, w - 1, h - 1);
    ctx.setLineDash([]);
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillStyle = colorForPrompt(index);
    ctx.fillText(box.id, x + 3, y - 4 < 10 ? y + 12 : y - 4);
  };
  state.draftPrompts.forEach((box, index) => drawBox(box, index, false));
  if (liveBox) drawBox(liveBox, state.draftPrompts.length, true);
}

function renderPromptList(): void {
  promptList.textContent = "";
  const verdicts = new Map(
    (lastResult?.prompts ?? []).map((p) => [p.id, p]));
  state.draftPrompts.forEach((box, index) => {
    const item = document.createElement("li");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = colorForPrompt(index);
    item.appendChild(swatch);

    const label = document.createElement("span");
    label.textContent =
      `${box.id} · r${box.row0}-${box.row1} c${box.col0}-${box.col1}`;
    item.appendChild(label);

    const verdict = verdicts.get(box.id);
    if (verdict && lastResult) {
      const badge = document.createElement("span");
      badge.className = `badge badge-${verdict.status === "ok" ? "ok" : "miss"}`;
      const frame = lastResult.frames_used[verdict.id];
      badge.textContent = `${verdict.status} · f${frame} · ` +
        `conf ${verdict.confidence.toFixed(2)}`;
      item.appendChild(badge);
    }

    const remove = document.createElement("button");
    remove.textContent = "✕";
    remove.title = `remove ${box.id}`;
    remove.addEventListener("click", () => {
      state = removePrompt(state, box.id);
      invalidateResult();
      renderAll();
    });
    item.appendChild(remove);
    promptList.appendChild(item);
  });
}

function renderControls(): void {
  const hasPrompts = state.draftPrompts.length > 0;
  segmentButton.disabled = !state.sequenceId || !hasPrompts;
  clearButton.disabled = !hasPrompts;
  acceptButton.disabled = !lastResult || !annotatorValid(state.annotator);
  opacitySlider.value = String(Math.round(state.overlayOpacity * 100));
  colormapSelect.value = state.colormap;
  correctedToggle.checked = state.corrected;
}

function renderStatus(): void {
  if (!lastResult) {
    statusLine.textContent = state.sequenceId
      ? "draw a box on the viewer, then request segmentation"
      : "no sequence selected";
    return;
  }
  const latency = lastLatencyMs === null ? "" : ` · ${lastLatencyMs.toFixed(0)} ms`;
  statusLine.textContent =
    `result ${lastResult.result_id}${latency} · accept stores it under your id`;
}

function renderCurve(): void {
  const ctx = curveCanvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, curveCanvas.width, curveCanvas.height);
  if (!curve) {
    curveCaption.textContent = "click a pixel (without dragging) to probe its curve";
    return;
  }
  const layout = layoutCurves(
    curve.times,
    [
      { label: "raw", color: "#8e8e93", values: curve.raw },
      { label: "corrected", color: "#ff9f0a", values: curve.corrected },
    ],
    curveCanvas.width,
    curveCanvas.height,
  );
  drawPlot(ctx, layout);
  curveCaption.textContent =
    `pixel (${curve.row}, ${curve.col}) · raw and residual-corrected`;
}

function drawPlot(ctx: CanvasRenderingContext2D, layout: PlotLayout): void {
  const { plot } = layout;
  ctx.save();
  ctx.strokeStyle = "#3a3a3c";
  ctx.fillStyle = "#8e8e93";
  ctx.font = "11px system-ui, sans-serif";
  ctx.lineWidth = 1;

  for (const tick of layout.xTicks) {
    ctx.beginPath();
    ctx.moveTo(tick.pos, plot.y0);
    ctx.lineTo(tick.pos, plot.y1);
    ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(tick.label, tick.pos, plot.y1 + 14);
  }
  for (const tick of layout.yTicks) {
    ctx.beginPath();
    ctx.moveTo(plot.x0, tick.pos);
    ctx.lineTo(plot.x1, tick.pos);
    ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(tick.label, plot.x0 - 6, tick.pos + 3);
  }
  ctx.strokeStyle = "#636366";
  ctx.strokeRect(plot.x0, plot.y0, plot.x1 - plot.x0, plot.y1 - plot.y0);

  for (const path of layout.paths) {
    ctx.strokeStyle = path.color;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    path.points.forEach((p, i) =>
      i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y));
    ctx.stroke();
  }
  // Legend, top right corner of the plot box.
  let ly = plot.y0 + 14;
  ctx.textAlign = "left";
  for (const path of layout.paths) {
    ctx.fillStyle = path.color;
    ctx.fillRect(plot.x1 - 86, ly - 8, 10, 3);
    ctx.fillText(path.label, plot.x1 - 72, ly - 3);
    ly += 14;
  }
  ctx.restore();
}

function renderAll(): void {
  renderFrame();
  renderMaskOverlay();
  renderDraftBoxes();
  renderPromptList();
  renderControls();
  renderStatus();
  renderCurve();
}

function invalidateResult(): void {
  lastResult = null;
  lastResultPrompts = [];
  lastMasks = new Map();
  lastLatencyMs = null;
}

// ---- actions ---------------------------------------------------------------

function activateSequence(info: SequenceInfo): void {
  activeInfo = info;
  state = selectSequence(state, info);
  invalidateResult();
  curve = null;
  const scale = scaleFor(info);
  const viewWidth = info.cols * scale;
  const viewHeight = info.rows * scale;
  viewer.style.width = `${viewWidth}px`;
  viewer.style.height = `${viewHeight}px`;
  frameImage.width = viewWidth;
  frameImage.height = viewHeight;
  maskCanvas.width = info.cols;
  maskCanvas.height = info.rows;
  maskCanvas.style.width = `${viewWidth}px`;
  maskCanvas.style.height = `${viewHeight}px`;
  draftCanvas.width = viewWidth;
  draftCanvas.height = viewHeight;
  sequenceMeta.textContent =
    `${info.rows}×${info.cols} px · ${info.frames} frames @ ` +
    `${info.frame_rate} Hz · ${info.source} · ${info.sample_tag}`;
  renderAll();
}

async function probe(row: number, col: number): Promise<void> {
  if (!state.sequenceId) return;
  try {
    curve = await client.fetchCurve(state.sequenceId, row, col);
    renderCurve();
  } catch (err) {
    fail(err);
  }
}

async function requestSegmentation(): Promise<void> {
  if (!state.sequenceId || state.draftPrompts.length === 0) return;
  const prompts = state.draftPrompts.map((p) => ({ ...p }));
  segmentButton.disabled = true;
  const started = performance.now();
  try {
    const result = await client.segment(state.sequenceId, prompts, {
      corrected: state.corrected,
    });
    lastLatencyMs = performance.now() - started;
    lastResult = result;
    lastResultPrompts = prompts;
    lastMasks = new Map(
      Object.entries(result.masks).map(([id, b64]) => [id, pgmFromBase64(b64)]));
  } catch (err) {
    invalidateResult();
    fail(err);
  }
  renderAll();
}

async function acceptResult(): Promise<void> {
  if (!lastResult || !state.sequenceId) return;
  if (!annotatorValid(state.annotator)) {
    showToast(toasts, "annotator id must match [A-Za-z0-9_.-]+", "error");
    return;
  }
  try {
    // The base64 text from the segment response is forwarded verbatim, so
    // the PGM the server stores is byte-identical to the one displayed.
    const receipt = await client.submitAnnotation(
      state.sequenceId,
      state.annotator,
      lastResult.semantic_mask,
      lastResultPrompts,
      new Date().toISOString(),
    );
    showToast(toasts, `stored ${receipt.mask_file}`, "info");
    state = clearPrompts(state);
    renderAll();
  } catch (err) {
    fail(err);
  }
}

// ---- wiring ----------------------------------------------------------------

sequenceSelect.addEventListener("change", () => {
  const info = sequences.find((s) => s.id === sequenceSelect.value);
  if (info) activateSequence(info);
});

frameSlider.addEventListener("input", () => {
  state = scrubTo(state, Number(frameSlider.value));
  renderFrame();
});

colormapSelect.addEventListener("change", () => {
  state = setColormap(state, colormapSelect.value as ColormapName);
  renderFrame();
});

correctedToggle.addEventListener("change", () => {
  state = setCorrected(state, correctedToggle.checked);
  renderFrame();
});

opacitySlider.addEventListener("input", () => {
  state = setOpacity(state, Number(opacitySlider.value) / 100);
  renderMaskOverlay();
});

annotatorInput.addEventListener("input", () => {
  state = setAnnotator(state, annotatorInput.value);
  renderControls();
});

segmentButton.addEventListener("click", () => { void requestSegmentation(); });
acceptButton.addEventListener("click", () => { void acceptResult(); });
clearButton.addEventListener("click", () => {
  state = clearPrompts(state);
  invalidateResult();
  renderAll();
});

function pointerPixel(event: PointerEvent): { row: number; col: number } {
  const rect = draftCanvas.getBoundingClientRect();
  return pixelFromOffset(
    state.rows, state.cols, rect.width, rect.height,
    event.clientX - rect.left, event.clientY - rect.top);
}

draftCanvas.addEventListener("pointerdown", (event) => {
  if (!state.sequenceId) return;
  const { row, col } = pointerPixel(event);
  dragStart = { row, col, x: event.clientX, y: event.clientY };
  draftCanvas.setPointerCapture(event.pointerId);
});

draftCanvas.addEventListener("pointermove", (event) => {
  if (!dragStart) return;
  const moved = Math.hypot(event.clientX - dragStart.x, event.clientY - dragStart.y);
  if (moved < 4 && !liveBox) return;
  const { row, col } = pointerPixel(event);
  liveBox = dragBox(state, dragStart.row, dragStart.col, row, col);
  renderDraftBoxes();
});

draftCanvas.addEventListener("pointerup", (event) => {
  if (!dragStart) return;
  const start = dragStart;
  dragStart = null;
  draftCanvas.releasePointerCapture(event.pointerId);
  const moved = Math.hypot(event.clientX - start.x, event.clientY - start.y);
  if (moved < 4) {
    liveBox = null;
    renderDraftBoxes();
    void probe(start.row, start.col);
    return;
  }
  const { row, col } = pointerPixel(event);
  const corners = clampBox(state.rows, state.cols, start.row, start.col, row, col);
  const box: PromptBox = { id: nextPromptId(state.draftPrompts), ...corners };
  liveBox = null;
  state = addPrompt(state, box);
  invalidateResult();
  renderAll();
});

draftCanvas.addEventListener("pointercancel", () => {
  dragStart = null;
  liveBox = null;
  renderDraftBoxes();
});

async function boot(): Promise<void> {
  try {
    sequences = await client.listSequences();
  } catch (err) {
    fail(err);
    return;
  }
  sequenceSelect.textContent = "";
  for (const info of sequences) {
    const option = document.createElement("option");
    option.value = info.id;
    option.textContent = info.id;
    sequenceSelect.appendChild(option);
  }
  if (sequences.length > 0) {
    sequenceSelect.value = sequences[0]!.id;
    activateSequence(sequences[0]!);
  } else {
    showToast(toasts, "store holds no sequences — simulate one first", "info");
    renderAll();
  }
}

void boot();
