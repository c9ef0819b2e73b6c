/** Mask-to-RGBA compositing for the viewer overlay.
 *
 * Pure pixel math on typed arrays; the DOM layer wraps the result in an
 * ImageData and paints it on a canvas stacked over the frame image.
 */

import type { GrayImage } from "./pgm.js";

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

/** Distinct colors cycled over prompt masks, in prompt order. */
export const PROMPT_COLORS: readonly string[] = [
  "#ff453a", // red
  "#32d74b", // green
  "#0a84ff", // blue
  "#ffd60a", // yellow
  "#bf5af2", // purple
  "#64d2ff", // cyan
];

export function hexToRgb(hex: string): Rgb {
  const match = /^#([0-9a-fA-F]{6})$/.exec(hex);
  if (!match) throw new Error(`not a #rrggbb color: ${JSON.stringify(hex)}`);
  const value = parseInt(match[1]!, 16);
  return { r: (value >> 16) & 0xff, g: (value >> 8) & 0xff, b: value & 0xff };
}

export function colorForPrompt(index: number): string {
  return PROMPT_COLORS[index % PROMPT_COLORS.length]!;
}

/** RGBA buffer (rows*cols*4) with `color` at nonzero mask pixels,
 *  transparent elsewhere.  Alpha is opacity scaled to 0..255. */
export function maskToRgba(
  mask: GrayImage,
  color: string,
  opacity: number,
): Uint8ClampedArray {
  const { r, g, b } = hexToRgb(color);
  const alpha = Math.round(Math.min(1, Math.max(0, opacity)) * 255);
  const out = new Uint8ClampedArray(mask.rows * mask.cols * 4);
  for (let i = 0; i < mask.pixels.length; i++) {
    if (mask.pixels[i]! > 0) {
      const j = i * 4;
      out[j] = r;
      out[j + 1] = g;
      out[j + 2] = b;
      out[j + 3] = alpha;
    }
  }
  return out;
}

/** Composite several equally sized masks into one RGBA buffer.  Later masks
 *  overwrite earlier ones where they overlap. */
export function paintMasks(
  masks: readonly GrayImage[],
  colors: readonly string[],
  opacity: number,
): Uint8ClampedArray {
  if (masks.length === 0) return new Uint8ClampedArray(0);
  const { rows, cols } = masks[0]!;
  const out = new Uint8ClampedArray(rows * cols * 4);
  const alpha = Math.round(Math.min(1, Math.max(0, opacity)) * 255);
  masks.forEach((mask, index) => {
    if (mask.rows !== rows || mask.cols !== cols) {
      throw new Error(
        `mask ${index} is ${mask.rows}x${mask.cols}, expected ${rows}x${cols}`);
    }
    const { r, g, b } = hexToRgb(colors[index] ?? colorForPrompt(index));
    for (let i = 0; i < mask.pixels.length; i++) {
      if (mask.pixels[i]! > 0) {
        const j = i * 4;
        out[j] = r;
        out[j + 1] = g;
        out[j + 2] = b;
        out[j + 3] = alpha;
      }
    }
  });
  return out;
}
