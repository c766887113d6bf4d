// Typed client for the model server's REST API.

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail?: Record<string, unknown>,
  ) {
    super(message);
  }
}

export interface Prediction {
  input_id: string;
  label: string;
  probs: number[];
  spectrogram_png_base64: string;
}

export interface FilterTile {
  index: number;
  height: number;
  width: number;
  png_base64: string;
}

export interface LayerTiles {
  layer_index: number;
  filters: FilterTile[];
}

export interface ActivationsResponse {
  input_id: string;
  predicted_label: string;
  probs: number[];
  layers: LayerTiles[];
}

export interface EditOp {
  kind: "slice" | "cross_fade" | "loudness" | "repeat" | "invert" | "fade";
  params: Record<string, number>;
}

export interface EditResult {
  wav_base64: string;
  duration_ms: number;
  waveform_preview: number[];
}

export interface CompareSide {
  input_id: string;
  predicted_label: string;
  probs: number[];
  spectrogram_png_base64: string;
  layers: LayerTiles[];
}

export interface CompareResponse {
  a: CompareSide;
  b: CompareSide;
  layer_distances: number[][];
  probs_l1: number;
}

export interface LayerSummary {
  kind: string;
  params: number;
  output_shape: number[];
}

export interface ModelSummary {
  layers: LayerSummary[];
  class_labels: string[];
  checkpoint_version: number;
}

export interface WeightHistogram {
  layer_index: number;
  bin_edges: number[];
  counts: number[];
}

async function unwrap(response: Response): Promise<Response> {
  if (response.ok) return response;
  let body: { error?: ApiErrorBody } = {};
  try {
    body = await response.json();
  } catch {
    /* non-JSON error body */
  }
  const err = body.error ?? { code: "internal", message: response.statusText };
  throw new ApiError(response.status, err.code, err.message, err.detail);
}

function wavForm(wav: Blob, extra?: Record<string, string>): FormData {
  const form = new FormData();
  form.append("file", wav, "clip.wav");
  for (const [key, value] of Object.entries(extra ?? {})) {
    form.append(key, value);
  }
  return form;
}

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async predict(wav: Blob, signal?: AbortSignal): Promise<Prediction> {
    const r = await fetch(this.url("/api/predict"), {
      method: "POST",
      body: wavForm(wav),
      signal,
    });
    return (await unwrap(r)).json();
  }

  async activations(
    wav: Blob,
    layer?: number,
    signal?: AbortSignal,
  ): Promise<ActivationsResponse> {
    const query = layer === undefined ? "" : `?layer=${layer}`;
    const r = await fetch(this.url(`/api/activations${query}`), {
      method: "POST",
      body: wavForm(wav),
      signal,
    });
    return (await unwrap(r)).json();
  }

  async featureAudio(
    req: { inputId: string; layer: number; filter: number },
    signal?: AbortSignal,
  ): Promise<Blob> {
    const r = await fetch(this.url("/api/feature-audio"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        input_id: req.inputId,
        layer: req.layer,
        filter: req.filter,
      }),
      signal,
    });
    return (await unwrap(r)).blob();
  }

  async edit(
    wav: Blob,
    ops: EditOp[],
    signal?: AbortSignal,
  ): Promise<EditResult> {
    const r = await fetch(this.url("/api/edit"), {
      method: "POST",
      body: wavForm(wav, { ops: JSON.stringify(ops) }),
      signal,
    });
    return (await unwrap(r)).json();
  }

  async compare(
    a: Blob,
    b: Blob,
    signal?: AbortSignal,
  ): Promise<CompareResponse> {
    const form = new FormData();
    form.append("a", a, "a.wav");
    form.append("b", b, "b.wav");
    const r = await fetch(this.url("/api/compare"), {
      method: "POST",
      body: form,
      signal,
    });
    return (await unwrap(r)).json();
  }

  async modelSummary(signal?: AbortSignal): Promise<ModelSummary> {
    const r = await fetch(this.url("/api/model/summary"), { signal });
    return (await unwrap(r)).json();
  }

  async weightHistogram(
    layerIndex: number,
    signal?: AbortSignal,
  ): Promise<WeightHistogram> {
    const r = await fetch(
      this.url(`/api/layers/${layerIndex}/weights/histogram`),
      { signal },
    );
    return (await unwrap(r)).json();
  }
}

export function base64ToBlob(b64: string, type: string): Blob {
  const raw = atob(b64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  return new Blob([bytes], { type });
}

export function pngDataUrl(b64: string): string {
  return `data:image/png;base64,${b64}`;
}
