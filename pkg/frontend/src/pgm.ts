/** Binary (P5) PGM encoding and decoding for mask payloads.
 *
 * The server ships masks as base64-encoded 8-bit P5 images with the header
 * layout `P5\n<cols> <rows>\n255\n`.  Decoding tolerates the full PGM header
 * grammar (comments, arbitrary whitespace); encoding reproduces the server
 * layout byte for byte so a decode/encode round trip is the identity on
 * server-produced files.
 */

export class PgmError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "PgmError";
  }
}

export interface GrayImage {
  rows: number;
  cols: number;
  maxval: number;
  /** Row-major raster, rows*cols bytes. */
  pixels: Uint8Array;
}

const ASCII = new TextDecoder("ascii");

function isSpace(byte: number): boolean {
  // PGM whitespace: space, TAB, CR, LF, VT, FF.
  return byte === 0x20 || (byte >= 0x09 && byte <= 0x0d);
}

export function decodeBase64(text: string): Uint8Array {
  let binary: string;
  try {
    binary = atob(text);
  } catch {
    throw new PgmError("payload is not valid base64");
  }
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    out[i] = binary.charCodeAt(i);
  }
  return out;
}

export function encodeBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

/** Parse a binary PGM.  Accepts comments and any whitespace in the header. */
export function parsePgm(bytes: Uint8Array): GrayImage {
  let pos = 0;

  function nextToken(): string {
    for (;;) {
      while (pos < bytes.length && isSpace(bytes[pos]!)) pos++;
      if (pos < bytes.length && bytes[pos] === 0x23 /* '#' */) {
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos]!)) pos++;
    if (start === pos) throw new PgmError("truncated PGM header");
    return ASCII.decode(bytes.subarray(start, pos));
  }

  function nextInt(name: string): number {
    const token = nextToken();
    if (!/^\d+$/.test(token)) {
      throw new PgmError(`PGM ${name} is not a number: ${JSON.stringify(token)}`);
    }
    return parseInt(token, 10);
  }

  const magic = nextToken();
  if (magic !== "P5") {
    throw new PgmError(`unsupported PGM magic ${JSON.stringify(magic)} (want P5)`);
  }
  const cols = nextInt("width");
  const rows = nextInt("height");
  const maxval = nextInt("maxval");
  if (cols < 1 || rows < 1) throw new PgmError(`bad PGM size ${cols}x${rows}`);
  if (maxval < 1 || maxval > 255) {
    throw new PgmError(`unsupported PGM maxval ${maxval} (want 1..255)`);
  }
  // Exactly one whitespace byte separates the maxval from the raster.
  if (pos >= bytes.length || !isSpace(bytes[pos]!)) {
    throw new PgmError("missing whitespace before PGM raster");
  }
  pos++;
  const need = rows * cols;
  if (bytes.length - pos < need) {
    throw new PgmError(
      `truncated PGM raster: need ${need} bytes, have ${bytes.length - pos}`);
  }
  return { rows, cols, maxval, pixels: bytes.slice(pos, pos + need) };
}

/** Encode in the server's exact layout: `P5\n<cols> <rows>\n255\n` + raster. */
export function encodePgm(image: GrayImage): Uint8Array {
  const { rows, cols, pixels } = image;
  if (pixels.length !== rows * cols) {
    throw new PgmError(
      `raster length ${pixels.length} does not match ${rows}x${cols}`);
  }
  const header = `P5\n${cols} ${rows}\n255\n`;
  const out = new Uint8Array(header.length + pixels.length);
  for (let i = 0; i < header.length; i++) out[i] = header.charCodeAt(i);
  out.set(pixels, header.length);
  return out;
}

export function pgmFromBase64(text: string): GrayImage {
  return parsePgm(decodeBase64(text));
}

/** Count of nonzero (defect) pixels. */
export function coverage(image: GrayImage): number {
  let n = 0;
  for (const v of image.pixels) if (v > 0) n++;
  return n;
}
