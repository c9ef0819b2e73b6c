/** Typed HTTP client for the inspection service.
 *
 * Every interaction of the console goes through this module; nothing here
 * computes masks, metrics, or corrections — it only shapes requests and
 * decodes responses of the JSON endpoints documented in docs/API.md.
 */

export interface SequenceInfo {
  id: string;
  rows: number;
  cols: number;
  frames: number;
  frame_rate: number;
  source: string;
  system_tag: string;
  sample_tag: string;
  ambient: number;
  has_ground_truth: boolean;
}

export interface CurvePayload {
  sequence_id: string;
  row: number;
  col: number;
  frame_rate: number;
  times: number[];
  raw: number[];
  corrected: number[];
}

/** Inclusive-corner box prompt in pixel coordinates. */
export interface PromptBox {
  id: string;
  row0: number;
  col0: number;
  row1: number;
  col1: number;
}

export interface SegmentOptions {
  frame?: number | null;
  corrected?: boolean;
  normalize_gain?: boolean;
  expand_margin?: number;
  threshold_override?: number | null;
}

export interface PromptVerdict {
  id: string;
  status: string;
  confidence: number;
  threshold: number;
}

export interface SegmentResult {
  result_id: string;
  sequence_id: string;
  frames_used: Record<string, number>;
  prompts: PromptVerdict[];
  /** Per-prompt instance masks as base64 P5 PGM bytes. */
  masks: Record<string, string>;
  /** Union mask over all prompts, same encoding. */
  semantic_mask: string;
}

export interface AnnotationReceipt {
  stored: boolean;
  sequence_id: string;
  annotator: string;
  mask_file: string;
}

export interface FrameParams {
  colormap?: string;
  corrected?: boolean;
  vmin?: number;
  vmax?: number;
}

/** Error carrying the HTTP status and the server's diagnostic text. */
export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function detailOf(response: Response): Promise<string> {
  const text = await response.text();
  try {
    const body: unknown = JSON.parse(text);
    const detail = (body as { detail?: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (Array.isArray(detail)) {
      return detail
        .map((item) =>
          typeof (item as { msg?: unknown }).msg === "string"
            ? ((item as { msg: string }).msg)
            : JSON.stringify(item))
        .join("; ");
    }
  } catch {
    // fall through: body was not JSON
  }
  return text || response.statusText || `HTTP ${response.status}`;
}

export class InspectorClient {
  private readonly doFetch: FetchLike;

  constructor(
    readonly base: string = "",
    fetchImpl?: FetchLike,
  ) {
    const impl = fetchImpl ?? fetch;
    // Call unbound so the global fetch never sees the client as `this`.
    this.doFetch = (input, init) => impl(input, init);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.doFetch(this.base + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listSequences(): Promise<SequenceInfo[]> {
    return this.request<SequenceInfo[]>("/sequences");
  }

  /** Stable URL for one rendered frame PNG; usable directly as an img src. */
  frameUrl(sequenceId: string, index: number, params: FrameParams = {}): string {
    const query = new URLSearchParams();
    query.set("colormap", params.colormap ?? "gray");
    query.set("corrected", String(params.corrected ?? false));
    if (params.vmin !== undefined && Number.isFinite(params.vmin)) {
      query.set("vmin", String(params.vmin));
    }
    if (params.vmax !== undefined && Number.isFinite(params.vmax)) {
      query.set("vmax", String(params.vmax));
    }
    return `${this.base}/sequences/${encodeURIComponent(sequenceId)}` +
      `/frames/${index}?${query.toString()}`;
  }

  fetchCurve(sequenceId: string, row: number, col: number): Promise<CurvePayload> {
    const query = new URLSearchParams({ row: String(row), col: String(col) });
    return this.request<CurvePayload>(
      `/sequences/${encodeURIComponent(sequenceId)}/curve?${query.toString()}`);
  }

  segment(
    sequenceId: string,
    prompts: PromptBox[],
    options: SegmentOptions = {},
  ): Promise<SegmentResult> {
    return this.post<SegmentResult>(
      `/sequences/${encodeURIComponent(sequenceId)}/segment`,
      {
        prompts,
        frame: options.frame ?? null,
        corrected: options.corrected ?? true,
        normalize_gain: options.normalize_gain ?? true,
        expand_margin: options.expand_margin ?? 0.1,
        threshold_override: options.threshold_override ?? null,
      });
  }

  /** Store an accepted mask verbatim; the base64 text is passed through
   *  unchanged so the stored PGM is byte-identical to what the server sent. */
  submitAnnotation(
    sequenceId: string,
    annotator: string,
    maskPgmBase64: string,
    prompts: PromptBox[],
    timestamp: string,
  ): Promise<AnnotationReceipt> {
    return this.post<AnnotationReceipt>("/annotations", {
      sequence_id: sequenceId,
      annotator,
      prompts,
      mask_pgm_base64: maskPgmBase64,
      timestamp,
    });
  }
}
