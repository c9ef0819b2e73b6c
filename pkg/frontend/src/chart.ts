/** Plot geometry for the pixel-curve chart.
 *
 * Converts curve payloads into canvas-space polylines and tick marks.  The
 * transform is a plain affine map per axis: every payload sample becomes
 * exactly one point, in order, with no resampling or smoothing — what the
 * chart shows IS the endpoint payload.
 */

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export interface PathPoint {
  x: number;
  y: number;
}

export interface CurveSeries {
  label: string;
  color: string;
  values: number[];
}

export interface Tick {
  pos: number;
  label: string;
}

export interface PlotLayout {
  width: number;
  height: number;
  margins: Margins;
  /** Plot rectangle in canvas coordinates. */
  plot: { x0: number; y0: number; x1: number; y1: number };
  xDomain: [number, number];
  yDomain: [number, number];
  paths: { label: string; color: string; points: PathPoint[] }[];
  xTicks: Tick[];
  yTicks: Tick[];
}

export const DEFAULT_MARGINS: Margins = { top: 12, right: 12, bottom: 26, left: 52 };

/** Largest 1/2/5-ladder step that yields at most `target` intervals. */
export function niceStep(span: number, target: number): number {
  if (!(span > 0) || target < 1) return 1;
  const rough = span / target;
  const power = Math.pow(10, Math.floor(Math.log10(rough)));
  for (const mult of [1, 2, 5, 10]) {
    if (power * mult >= rough) return power * mult;
  }
  return power * 10;
}

/** Tick values covering [lo, hi] on a 1/2/5 ladder. */
export function tickValues(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const step = niceStep(hi - lo, target);
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    // Snap to the grid to keep labels clean (0.30000000000000004 -> 0.3).
    out.push(Math.round(v / step) * step);
  }
  return out;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e5 || magnitude < 1e-3) return value.toExponential(1);
  return String(+value.toFixed(4));
}

function extent(values: readonly number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

/** Affine map from [d0, d1] to [r0, r1]. */
export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): (value: number) => number {
  const slope = (r1 - r0) / (d1 - d0);
  return (value: number) => r0 + (value - d0) * slope;
}

export function layoutCurves(
  times: readonly number[],
  series: readonly CurveSeries[],
  width: number,
  height: number,
  margins: Margins = DEFAULT_MARGINS,
): PlotLayout {
  if (times.length === 0) throw new Error("layoutCurves: empty time axis");
  for (const s of series) {
    if (s.values.length !== times.length) {
      throw new Error(
        `series ${JSON.stringify(s.label)} has ${s.values.length} samples, ` +
        `time axis has ${times.length}`);
    }
  }

  let [xLo, xHi] = extent(times);
  if (!(xHi > xLo)) { xLo -= 0.5; xHi += 0.5; }
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const s of series) {
    const [lo, hi] = extent(s.values);
    if (lo < yLo) yLo = lo;
    if (hi > yHi) yHi = hi;
  }
  if (series.length === 0) { yLo = 0; yHi = 1; }
  if (!(yHi > yLo)) { yLo -= 0.5; yHi += 0.5; }

  const x0 = margins.left;
  const x1 = width - margins.right;
  const y0 = margins.top;
  const y1 = height - margins.bottom;
  const sx = linearScale(xLo, xHi, x0, x1);
  const sy = linearScale(yLo, yHi, y1, y0); // canvas y grows downward

  return {
    width,
    height,
    margins,
    plot: { x0, y0, x1, y1 },
    xDomain: [xLo, xHi],
    yDomain: [yLo, yHi],
    paths: series.map((s) => ({
      label: s.label,
      color: s.color,
      points: times.map((t, i) => ({ x: sx(t), y: sy(s.values[i]!) })),
    })),
    xTicks: tickValues(xLo, xHi).map((v) => ({ pos: sx(v), label: formatTick(v) })),
    yTicks: tickValues(yLo, yHi).map((v) => ({ pos: sy(v), label: formatTick(v) })),
  };
}
