// End-to-end smoke: the real app DOM driven against the live model
// server (run via `npm run test:e2e`, which boots the server first).
// Node environment with a scripted jsdom document so fetch/Blob/FormData
// stay the platform-native implementations.

import { readFileSync } from "node:fs";
import { JSDOM } from "jsdom";
import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { mountApp, type AppHandles } from "../src/main";

const BASE = process.env.AUDIOSCOPE_E2E_URL;
const WAV_PATH = process.env.AUDIOSCOPE_E2E_WAV;

const suite = BASE && WAV_PATH ? describe : describe.skip;

suite("live-server UI smoke", () => {
  let handles: AppHandles;
  let root: HTMLElement;
  let api: ApiClient;
  let wavBlob: Blob;

  beforeAll(() => {
    const dom = new JSDOM("<!doctype html><html><body></body></html>");
    Object.assign(globalThis, {
      document: dom.window.document,
      window: dom.window,
      HTMLElement: dom.window.HTMLElement,
      HTMLInputElement: dom.window.HTMLInputElement,
      HTMLSelectElement: dom.window.HTMLSelectElement,
      DOMException: dom.window.DOMException,
    });
    api = new ApiClient(BASE);
    root = document.createElement("div");
    document.body.appendChild(root);
    handles = mountApp(root, api);
    wavBlob = new Blob([readFileSync(WAV_PATH!)], { type: "audio/wav" });
  });

  it("upload renders a prediction and the 3-layer / 64-tile grid",
     async () => {
    const input = handles.state.addInput("uploaded", wavBlob, "sample.wav");
    await handles.selectInput(input);

    const heading = root.querySelector("#prediction-body h3");
    expect(heading?.textContent).toMatch(/prediction: \w+/);
    expect(root.querySelectorAll("#prediction-body .prob-row").length)
      .toBe(10);

    const sections = root.querySelectorAll("#layers-body .layer-section");
    expect(sections.length).toBe(3);
    expect(root.querySelectorAll("#layers-body .tile").length).toBe(64);
    const perLayer = Array.from(sections).map(
      (s) => s.querySelectorAll(".tile").length);
    expect(perLayer).toEqual([16, 16, 32]);
  }, 120000);

  it("applying Repeat doubles the preview duration and yields an edited " +
     "input", async () => {
    const before = await api.edit(wavBlob, []);
    await handles.applyEdits([{ kind: "repeat", params: { count: 2 } }]);

    const edited = Array.from(handles.state.inputs.values())
      .find((i) => i.source === "edited");
    expect(edited).toBeDefined();
    expect(edited!.ops).toEqual([{ kind: "repeat", params: { count: 2 } }]);

    const after = await api.edit(edited!.blob, []);
    expect(after.duration_ms).toBeCloseTo(2 * before.duration_ms, 0);
    expect(before.waveform_preview.length).toBe(1000);
    expect(after.waveform_preview.length).toBe(1000);
  }, 120000);

  it("A/B compare of identical inputs shows zero distances", async () => {
    const input = handles.state.addInput("uploaded", wavBlob, "same.wav");
    handles.state.assignSlot("A", input.id);
    handles.state.assignSlot("B", input.id);
    await handles.runCompare();

    const badges = root.querySelectorAll<HTMLElement>(
      "#compare-body .layer-badge");
    expect(badges.length).toBe(3);
    badges.forEach((badge) => expect(badge.dataset.zero).toBe("true"));
    const probBadge = root.querySelector("#compare-body .prob-badge");
    expect(probBadge?.textContent).toContain("0.000");
    expect(root.querySelectorAll("#compare-body .compare-side").length)
      .toBe(2);
  }, 240000);

  it("weight-distribution panel renders 50 bars per layer", async () => {
    root.querySelector<HTMLButtonElement>("#weights-btn")!.click();
    await new Promise((resolve) => setTimeout(resolve, 4000));
    const panels = root.querySelectorAll("#histogram-body .hist-panel");
    expect(panels.length).toBe(5); // three conv + two dense layers
    panels.forEach((panel) =>
      expect(panel.querySelectorAll(".hist-bar").length).toBe(50));
  }, 120000);
});
