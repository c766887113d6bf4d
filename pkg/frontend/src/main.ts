// Application wiring: state transitions driven by user events, each
// panel rendered from the latest server response.

import { ApiClient, ApiError, EditOp, base64ToBlob } from "./api";
import { MicRecorder } from "./recorder";
import { AppState, PanelGate, SessionInput, Slot } from "./state";
import {
  clear,
  clearError,
  el,
  renderCompare,
  renderHistogram,
  renderLayerGrid,
  renderPrediction,
  renderWaveform,
  renderZoomOverlay,
  showError,
} from "./ui";

export interface AppHandles {
  state: AppState;
  selectInput(input: SessionInput): Promise<void>;
  applyEdits(ops: EditOp[]): Promise<void>;
  runCompare(): Promise<void>;
}

export function mountApp(root: HTMLElement, api: ApiClient): AppHandles {
  const state = new AppState();
  const gate = new PanelGate();
  const recorder = new MicRecorder();
  let classLabels: string[] = [];
  let currentInput: SessionInput | null = null;

  root.innerHTML = `
    <header><h1>audioscope</h1>
      <div id="error-banner" class="error-banner hidden" role="alert"></div>
    </header>
    <main>
      <section id="input-panel" class="panel">
        <h2>input</h2>
        <input type="file" id="file-input" accept=".wav,audio/wav">
        <button id="record-btn">record (3s max)</button>
        <select id="input-list" size="4"></select>
        <div class="slot-row">
          <button id="to-slot-a">use as A</button>
          <button id="to-slot-b">use as B</button>
          <span id="slot-status">A: -, B: -</span>
        </div>
      </section>
      <section id="prediction-panel" class="panel"><h2>prediction</h2>
        <div id="prediction-body"></div></section>
      <section id="edit-panel" class="panel">
        <h2>edit</h2>
        <div class="edit-controls">
          <label>slice <input id="slice-start" type="number" value="0"> to
            <input id="slice-end" type="number" value="500"> ms
            <button data-op="slice">apply</button></label>
          <label>cross-fade overlap <input id="xfade-ms" type="number"
            value="50"> ms <button data-op="cross_fade">apply</button></label>
          <label>loudness <input id="gain-db" type="number" value="6"> dB
            <button data-op="loudness">apply</button></label>
          <label>repeat <input id="repeat-count" type="number" value="2">x
            <button data-op="repeat">apply</button></label>
          <label>invert <button data-op="invert">apply</button></label>
          <label>fade <input id="fade-ms" type="number" value="100"> ms
            <button data-op="fade">apply</button></label>
        </div>
        <canvas id="waveform-before" width="600" height="80"></canvas>
        <canvas id="waveform-after" width="600" height="80"></canvas>
      </section>
      <section id="layers-panel" class="panel"><h2>hidden layers</h2>
        <div id="layers-body"></div></section>
      <section id="compare-panel" class="panel">
        <h2>compare A / B</h2>
        <button id="compare-btn" disabled>compare</button>
        <button id="weights-btn">weight distributions</button>
        <div id="histogram-body" class="hidden"></div>
        <div id="compare-body"></div>
      </section>
    </main>
    <div id="zoom-overlay" class="zoom-overlay hidden"></div>
    <audio id="feature-player"></audio>`;

  const $ = <T extends HTMLElement>(id: string) =>
    root.querySelector<T>(`#${id}`)!;
  const banner = $("error-banner");
  const player = $<HTMLAudioElement>("feature-player");

  void api.modelSummary()
    .then((summary) => { classLabels = summary.class_labels; })
    .catch(() => { /* summary is cosmetic; errors surface elsewhere */ });

  function surface(err: unknown): void {
    if (err instanceof DOMException && err.name === "AbortError") return;
    const message = err instanceof ApiError
      ? `${err.code}: ${err.message}`
      : String(err);
    showError(banner, message);
  }

  function refreshInputList(): void {
    const list = $<HTMLSelectElement>("input-list");
    clear(list);
    for (const input of state.inputs.values()) {
      const option = el("option", "", `${input.name} [${input.source}]`);
      option.value = input.id;
      if (currentInput?.id === input.id) option.selected = true;
      list.appendChild(option);
    }
    const a = state.slotInput("A");
    const b = state.slotInput("B");
    $("slot-status").textContent =
      `A: ${a?.name ?? "-"}, B: ${b?.name ?? "-"}`;
    $<HTMLButtonElement>("compare-btn").disabled = !state.canCompare();
  }

  async function selectInput(input: SessionInput): Promise<void> {
    currentInput = input;
    clearError(banner);
    refreshInputList();
    const signal = gate.begin("predict");
    try {
      const [prediction, activations] = await Promise.all([
        api.predict(input.blob, signal),
        api.activations(input.blob, undefined, signal),
      ]);
      input.prediction = prediction;
      renderPrediction($("prediction-body"), prediction, classLabels);
      renderLayerGrid($("layers-body"), activations.layers, {
        onZoom(layer, filter, png) {
          state.setZoom({ layer, filter });
          renderZoomOverlay($("zoom-overlay"), layer, filter, png,
                            () => state.clearZoom());
        },
        async onPlay(layer, filter) {
          try {
            const blob = await api.featureAudio(
              { inputId: activations.input_id, layer, filter });
            player.src = URL.createObjectURL(blob);
            await player.play().catch(() => undefined);
          } catch (err) {
            surface(err);
          }
        },
      });
    } catch (err) {
      surface(err);
    } finally {
      gate.finish("predict", signal);
    }
  }

  async function applyEdits(ops: EditOp[]): Promise<void> {
    if (!currentInput) {
      showError(banner, "load or record an input first");
      return;
    }
    const parent = currentInput;
    const signal = gate.begin("edit");
    try {
      const before = await api.edit(parent.blob, [], signal);
      const result = await api.edit(parent.blob, ops, signal);
      renderWaveform($<HTMLCanvasElement>("waveform-before"),
                     before.waveform_preview);
      renderWaveform($<HTMLCanvasElement>("waveform-after"),
                     result.waveform_preview);
      const blob = base64ToBlob(result.wav_base64, "audio/wav");
      const edited = state.deriveEdited(parent, ops, blob);
      await selectInput(edited);
    } catch (err) {
      surface(err);
    } finally {
      gate.finish("edit", signal);
    }
  }

  async function runCompare(): Promise<void> {
    const a = state.slotInput("A");
    const b = state.slotInput("B");
    if (!a || !b) return;
    const signal = gate.begin("compare");
    try {
      const response = await api.compare(a.blob, b.blob, signal);
      renderCompare($("compare-body"), response, classLabels, () => ({
        onZoom(layer, filter, png) {
          state.setZoom({ layer, filter });
          renderZoomOverlay($("zoom-overlay"), layer, filter, png,
                            () => state.clearZoom());
        },
        onPlay() { /* compare grids are visual; playback lives above */ },
      }));
    } catch (err) {
      surface(err);
    } finally {
      gate.finish("compare", signal);
    }
  }

  $("file-input").addEventListener("change", (event) => {
    const files = (event.target as HTMLInputElement).files;
    if (!files || !files.length) return;
    const file = files[0];
    const input = state.addInput("uploaded", file, file.name);
    void selectInput(input);
  });

  const recordBtn = $<HTMLButtonElement>("record-btn");
  recordBtn.addEventListener("click", async () => {
    if (recorder.recording) {
      finishRecording(recorder.stop());
      return;
    }
    clearError(banner);
    try {
      await recorder.start((auto) => finishRecording(auto));
      recordBtn.textContent = "stop";
    } catch {
      showError(banner,
                "microphone unavailable or permission denied; " +
                "upload a WAV instead");
    }
  });

  function finishRecording(result: { blob: Blob; seconds: number }): void {
    recordBtn.textContent = "record (3s max)";
    const input = state.addInput(
      "recorded", result.blob,
      `recording (${result.seconds.toFixed(1)}s)`);
    void selectInput(input);
  }

  $("input-list").addEventListener("change", (event) => {
    const id = (event.target as HTMLSelectElement).value;
    const input = state.inputs.get(id);
    if (input) void selectInput(input);
  });

  $("to-slot-a").addEventListener("click", () => assign("A"));
  $("to-slot-b").addEventListener("click", () => assign("B"));
  function assign(slot: Slot): void {
    if (!currentInput) return;
    state.assignSlot(slot, currentInput.id);
    refreshInputList();
  }

  root.querySelectorAll<HTMLButtonElement>("[data-op]").forEach((button) => {
    button.addEventListener("click", () => {
      const kind = button.dataset.op as EditOp["kind"];
      const num = (id: string) =>
        Number($<HTMLInputElement>(id).value);
      const params: Record<string, number> =
        kind === "slice"
          ? { start_ms: num("slice-start"), end_ms: num("slice-end") }
          : kind === "cross_fade" ? { overlap_ms: num("xfade-ms") }
          : kind === "loudness" ? { gain_db: num("gain-db") }
          : kind === "repeat" ? { count: num("repeat-count") }
          : kind === "fade" ? { fade_ms: num("fade-ms") }
          : {};
      void applyEdits([{ kind, params }]);
    });
  });

  $("compare-btn").addEventListener("click", () => void runCompare());

  $("weights-btn").addEventListener("click", async () => {
    const body = $("histogram-body");
    body.classList.remove("hidden");
    clear(body);
    try {
      const summary = await api.modelSummary();
      for (let i = 0; i < summary.layers.length; i++) {
        if (summary.layers[i].params === 0) continue;
        const hist = await api.weightHistogram(i);
        const panel = el("div", "hist-panel");
        renderHistogram(panel, hist);
        body.appendChild(panel);
      }
    } catch (err) {
      surface(err);
    }
  });

  refreshInputList();
  return { state, selectInput, applyEdits, runCompare };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!, new ApiClient(""));
}
