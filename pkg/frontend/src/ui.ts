// DOM rendering helpers. Each takes a container and data and rebuilds
// that panel; app state lives outside (state.ts), so rendering is a pure
// function of its arguments.

import {
  CompareResponse,
  LayerTiles,
  Prediction,
  WeightHistogram,
  pngDataUrl,
} from "./api";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function showError(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
}

export function clearError(banner: HTMLElement): void {
  banner.textContent = "";
  banner.classList.add("hidden");
}

export function renderPrediction(
  container: HTMLElement,
  prediction: Prediction,
  classLabels: string[],
): void {
  clear(container);
  container.appendChild(el("h3", "", `prediction: ${prediction.label}`));
  const img = el("img", "spectrogram");
  img.src = pngDataUrl(prediction.spectrogram_png_base64);
  img.alt = "input log-spectrogram";
  container.appendChild(img);
  const bars = el("div", "prob-bars");
  prediction.probs.forEach((p, i) => {
    const row = el("div", "prob-row");
    row.appendChild(el("span", "prob-label", classLabels[i] ?? String(i)));
    const track = el("div", "prob-track");
    const fill = el("div", "prob-fill");
    fill.style.width = `${Math.round(p * 100)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "prob-value", p.toFixed(3)));
    bars.appendChild(row);
  });
  container.appendChild(bars);
}

export interface TileHandlers {
  onZoom(layer: number, filter: number, pngB64: string): void;
  onPlay(layer: number, filter: number): void;
}

export function renderLayerGrid(
  container: HTMLElement,
  layers: LayerTiles[],
  handlers: TileHandlers,
): void {
  clear(container);
  for (const layer of layers) {
    const section = el("section", "layer-section");
    section.dataset.layer = String(layer.layer_index);
    section.appendChild(
      el("h3", "", `conv block ${layer.layer_index} ` +
        `(${layer.filters.length} filters)`));
    const grid = el("div", "tile-grid");
    for (const tile of layer.filters) {
      const cell = el("figure", "tile");
      cell.dataset.filter = String(tile.index);
      const img = el("img", "tile-img");
      img.src = pngDataUrl(tile.png_base64);
      img.alt = `layer ${layer.layer_index} filter ${tile.index}`;
      img.addEventListener("click", () =>
        handlers.onZoom(layer.layer_index, tile.index, tile.png_base64));
      cell.appendChild(img);
      const caption = el("figcaption", "tile-caption");
      caption.appendChild(el("span", "", `#${tile.index}`));
      const play = el("button", "play-btn", "play");
      play.addEventListener("click", () =>
        handlers.onPlay(layer.layer_index, tile.index));
      caption.appendChild(play);
      cell.appendChild(caption);
      grid.appendChild(cell);
    }
    section.appendChild(grid);
    container.appendChild(section);
  }
}

export function renderZoomOverlay(
  overlay: HTMLElement,
  layer: number,
  filter: number,
  pngB64: string,
  onClose: () => void,
): void {
  clear(overlay);
  overlay.classList.remove("hidden");
  const box = el("div", "zoom-box");
  box.appendChild(el("h3", "", `layer ${layer}, filter ${filter}`));
  const img = el("img", "zoom-img");
  img.src = pngDataUrl(pngB64);
  box.appendChild(img);
  const close = el("button", "close-btn", "close");
  close.addEventListener("click", () => {
    overlay.classList.add("hidden");
    clear(overlay);
    onClose();
  });
  box.appendChild(close);
  overlay.appendChild(box);
}

export function renderWaveform(
  canvas: HTMLCanvasElement,
  preview: number[],
): void {
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    /* no canvas backend (jsdom) */
  }
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#3a7bd5";
  const mid = canvas.height / 2;
  const step = canvas.width / Math.max(preview.length, 1);
  preview.forEach((v, i) => {
    const h = Math.max(1, v * mid);
    ctx.fillRect(i * step, mid - h, Math.max(1, step - 0.5), 2 * h);
  });
}

export function renderHistogram(
  container: HTMLElement,
  histogram: WeightHistogram,
): void {
  clear(container);
  container.appendChild(
    el("h4", "", `weight distribution, model layer ${histogram.layer_index}`));
  const chart = el("div", "hist-chart");
  const peak = Math.max(...histogram.counts, 1);
  histogram.counts.forEach((count, i) => {
    const bar = el("div", "hist-bar");
    bar.style.height = `${Math.max(1, Math.round((count / peak) * 100))}%`;
    bar.title = `[${histogram.bin_edges[i].toPrecision(3)}, ` +
      `${histogram.bin_edges[i + 1].toPrecision(3)}): ${count}`;
    chart.appendChild(bar);
  });
  container.appendChild(chart);
}

export function renderCompare(
  container: HTMLElement,
  response: CompareResponse,
  classLabels: string[],
  tileHandlers: (side: "a" | "b") => TileHandlers,
): void {
  clear(container);
  const badges = el("div", "distance-badges");
  badges.appendChild(
    el("span", "badge prob-badge",
       `probability L1 distance: ${response.probs_l1.toPrecision(4)}`));
  response.layer_distances.forEach((distances, i) => {
    const mean = distances.reduce((s, d) => s + d, 0) / distances.length;
    const badge = el("span", "badge layer-badge",
                     `block ${i} mean L2: ${mean.toPrecision(4)}`);
    badge.dataset.block = String(i);
    badge.dataset.zero = distances.every((d) => d === 0) ? "true" : "false";
    badges.appendChild(badge);
  });
  container.appendChild(badges);

  const sides = el("div", "compare-sides");
  for (const key of ["a", "b"] as const) {
    const side = response[key];
    const panel = el("div", `compare-side side-${key}`);
    panel.appendChild(el("h3", "", `${key.toUpperCase()}: ` +
      `${side.predicted_label}`));
    const img = el("img", "spectrogram");
    img.src = pngDataUrl(side.spectrogram_png_base64);
    panel.appendChild(img);
    const grids = el("div", "compare-grids");
    renderLayerGrid(grids, side.layers, tileHandlers(key));
    panel.appendChild(grids);
    sides.appendChild(panel);
  }
  container.appendChild(sides);
}
