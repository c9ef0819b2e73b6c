/** Console view state and its pure transitions.
 *
 * Everything on screen is a projection of (server data, ViewState); these
 * functions enforce the two local invariants — the frame index stays within
 * the sequence and draft boxes stay within the image — and nothing else.
 * No pixels are classified here.
 */

import type { PromptBox, SequenceInfo } from "./api.js";

export type ColormapName = "gray" | "iron";

export interface ViewState {
  sequenceId: string | null;
  /** Bounds of the active sequence (0 until one is selected). */
  rows: number;
  cols: number;
  frameCount: number;
  frameIndex: number;
  colormap: ColormapName;
  corrected: boolean;
  draftPrompts: PromptBox[];
  /** Mask overlay alpha in [0, 1]. */
  overlayOpacity: number;
  annotator: string;
}

export function initialState(): ViewState {
  return {
    sequenceId: null,
    rows: 0,
    cols: 0,
    frameCount: 0,
    frameIndex: 0,
    colormap: "gray",
    corrected: true,
    draftPrompts: [],
    overlayOpacity: 0.55,
    annotator: "",
  };
}

function clampInt(value: number, lo: number, hi: number): number {
  const v = Math.trunc(value);
  if (!Number.isFinite(v) || v < lo) return lo;
  if (v > hi) return hi;
  return v;
}

/** Activate a sequence: frame index and drafts reset, display prefs persist. */
export function selectSequence(state: ViewState, info: SequenceInfo): ViewState {
  return {
    ...state,
    sequenceId: info.id,
    rows: info.rows,
    cols: info.cols,
    frameCount: info.frames,
    frameIndex: 0,
    draftPrompts: [],
  };
}

/** Move to a frame, clamped to [0, frameCount-1]. */
export function scrubTo(state: ViewState, index: number): ViewState {
  if (state.frameCount < 1) return state;
  return { ...state, frameIndex: clampInt(index, 0, state.frameCount - 1) };
}

export function setColormap(state: ViewState, name: ColormapName): ViewState {
  return { ...state, colormap: name };
}

export function setCorrected(state: ViewState, corrected: boolean): ViewState {
  return { ...state, corrected };
}

export function setOpacity(state: ViewState, opacity: number): ViewState {
  if (!Number.isFinite(opacity)) return state;
  return { ...state, overlayOpacity: Math.min(1, Math.max(0, opacity)) };
}

export function setAnnotator(state: ViewState, annotator: string): ViewState {
  return { ...state, annotator: annotator.trim() };
}

/** Annotator ids the server accepts (letters, digits, `_ . -`). */
export function annotatorValid(annotator: string): boolean {
  return /^[A-Za-z0-9_.-]+$/.test(annotator);
}

/** Lowest unused `p<N>` id. */
export function nextPromptId(existing: readonly { id: string }[]): string {
  const used = new Set(existing.map((p) => p.id));
  let k = 0;
  while (used.has(`p${k}`)) k++;
  return `p${k}`;
}

/** Order two corners and clamp them to the image, inclusive coordinates. */
export function clampBox(
  rows: number,
  cols: number,
  rowA: number,
  colA: number,
  rowB: number,
  colB: number,
): Omit<PromptBox, "id"> {
  const r0 = clampInt(Math.min(rowA, rowB), 0, rows - 1);
  const r1 = clampInt(Math.max(rowA, rowB), 0, rows - 1);
  const c0 = clampInt(Math.min(colA, colB), 0, cols - 1);
  const c1 = clampInt(Math.max(colA, colB), 0, cols - 1);
  return { row0: r0, col0: c0, row1: r1, col1: c1 };
}

/** Box for an in-progress drag, clamped live to the image bounds. */
export function dragBox(
  state: ViewState,
  startRow: number,
  startCol: number,
  endRow: number,
  endCol: number,
): PromptBox {
  const corners = clampBox(state.rows, state.cols, startRow, startCol, endRow, endCol);
  return { id: nextPromptId(state.draftPrompts), ...corners };
}

export function addPrompt(state: ViewState, box: PromptBox): ViewState {
  return { ...state, draftPrompts: [...state.draftPrompts, box] };
}

export function removePrompt(state: ViewState, id: string): ViewState {
  return {
    ...state,
    draftPrompts: state.draftPrompts.filter((p) => p.id !== id),
  };
}

export function clearPrompts(state: ViewState): ViewState {
  return { ...state, draftPrompts: [] };
}

/** Map a pointer offset on a scaled viewport to integer pixel coordinates. */
export function pixelFromOffset(
  rows: number,
  cols: number,
  clientWidth: number,
  clientHeight: number,
  offsetX: number,
  offsetY: number,
): { row: number; col: number } {
  const col = clampInt(Math.floor((offsetX / clientWidth) * cols), 0, cols - 1);
  const row = clampInt(Math.floor((offsetY / clientHeight) * rows), 0, rows - 1);
  return { row, col };
}
