// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import type { CompareResponse, LayerTiles } from "../src/api";
import {
  renderCompare,
  renderHistogram,
  renderLayerGrid,
  renderPrediction,
  renderZoomOverlay,
} from "../src/ui";

// 1x1 transparent PNG
const PNG =
  "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk+" +
  "M9QDwADhgGAWjR9awAAAABJRU5ErkJggg==";

function tiles(layerIndex: number, count: number): LayerTiles {
  return {
    layer_index: layerIndex,
    filters: Array.from({ length: count }, (_, i) => ({
      index: i, height: 9, width: 9, png_base64: PNG,
    })),
  };
}

describe("renderLayerGrid", () => {
  it("renders 16/16/32 tiles with play controls", () => {
    const host = document.createElement("div");
    renderLayerGrid(host, [tiles(0, 16), tiles(1, 16), tiles(2, 32)], {
      onZoom: () => undefined,
      onPlay: () => undefined,
    });
    const sections = host.querySelectorAll(".layer-section");
    expect(sections.length).toBe(3);
    expect(host.querySelectorAll(".tile").length).toBe(64);
    expect(host.querySelectorAll(".play-btn").length).toBe(64);
    expect(
      sections[2].querySelectorAll(".tile").length,
    ).toBe(32);
  });

  it("clicking a tile image fires the zoom handler", () => {
    const host = document.createElement("div");
    const onZoom = vi.fn();
    renderLayerGrid(host, [tiles(0, 16)], { onZoom, onPlay: vi.fn() });
    const img = host.querySelectorAll<HTMLImageElement>(".tile-img")[13];
    img.click();
    expect(onZoom).toHaveBeenCalledWith(0, 13, PNG);
  });

  it("clicking play fires the playback handler", () => {
    const host = document.createElement("div");
    const onPlay = vi.fn();
    renderLayerGrid(host, [tiles(1, 16)], { onZoom: vi.fn(), onPlay });
    host.querySelectorAll<HTMLButtonElement>(".play-btn")[5].click();
    expect(onPlay).toHaveBeenCalledWith(1, 5);
  });
});

describe("renderZoomOverlay", () => {
  it("shows the tile and closes on demand", () => {
    const overlay = document.createElement("div");
    overlay.className = "hidden";
    const onClose = vi.fn();
    renderZoomOverlay(overlay, 0, 13, PNG, onClose);
    expect(overlay.classList.contains("hidden")).toBe(false);
    expect(overlay.querySelector("h3")!.textContent).toContain("filter 13");
    overlay.querySelector<HTMLButtonElement>(".close-btn")!.click();
    expect(overlay.classList.contains("hidden")).toBe(true);
    expect(onClose).toHaveBeenCalled();
  });
});

describe("renderPrediction", () => {
  it("renders the label, spectrogram, and ten probability rows", () => {
    const host = document.createElement("div");
    renderPrediction(host, {
      input_id: "x",
      label: "seven",
      probs: Array(10).fill(0.1),
      spectrogram_png_base64: PNG,
    }, ["zero", "one", "two", "three", "four", "five", "six", "seven",
        "eight", "nine"]);
    expect(host.querySelector("h3")!.textContent).toContain("seven");
    expect(host.querySelectorAll(".prob-row").length).toBe(10);
    expect(host.querySelector("img")!.src).toContain("data:image/png");
  });
});

describe("renderHistogram", () => {
  it("renders one bar per bin", () => {
    const host = document.createElement("div");
    renderHistogram(host, {
      layer_index: 0,
      bin_edges: Array.from({ length: 51 }, (_, i) => i / 50),
      counts: Array.from({ length: 50 }, (_, i) => i + 1),
    });
    expect(host.querySelectorAll(".hist-bar").length).toBe(50);
  });
});

describe("renderCompare", () => {
  it("renders distance badges and both sides", () => {
    const side = {
      input_id: "i",
      predicted_label: "three",
      probs: Array(10).fill(0.1),
      spectrogram_png_base64: PNG,
      layers: [tiles(0, 16), tiles(1, 16), tiles(2, 32)],
    };
    const response: CompareResponse = {
      a: side,
      b: side,
      layer_distances: [Array(16).fill(0), Array(16).fill(0),
                        Array(32).fill(0)],
      probs_l1: 0,
    };
    const host = document.createElement("div");
    renderCompare(host, response, [], () => ({
      onZoom: vi.fn(), onPlay: vi.fn(),
    }));
    const badges = host.querySelectorAll(".layer-badge");
    expect(badges.length).toBe(3);
    badges.forEach((b) =>
      expect((b as HTMLElement).dataset.zero).toBe("true"));
    expect(host.querySelectorAll(".compare-side").length).toBe(2);
    expect(host.querySelectorAll(".tile").length).toBe(128);
  });
});
