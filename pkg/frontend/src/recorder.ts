// Microphone capture: raw PCM chunks gathered from an AudioContext and
// re-encoded client-side as 16 kHz mono WAV. Recording is capped at
// three seconds.

import { captureToWavBlob } from "./wav";

export const MAX_RECORD_SECONDS = 3;

export interface RecordingResult {
  blob: Blob;
  seconds: number;
}

interface AudioEnvironment {
  getUserMedia(constraints: MediaStreamConstraints): Promise<MediaStream>;
  createContext(): AudioContext;
}

const defaultEnvironment: AudioEnvironment = {
  getUserMedia: (constraints) =>
    navigator.mediaDevices.getUserMedia(constraints),
  createContext: () => new AudioContext(),
};

export class MicRecorder {
  private chunks: Float32Array[] = [];
  private context: AudioContext | null = null;
  private stream: MediaStream | null = null;
  private processor: ScriptProcessorNode | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  recording = false;

  constructor(private env: AudioEnvironment = defaultEnvironment) {}

  async start(onAutoStop?: (r: RecordingResult) => void): Promise<void> {
    if (this.recording) throw new Error("already recording");
    this.stream = await this.env.getUserMedia({ audio: true });
    this.context = this.env.createContext();
    const source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    this.chunks = [];
    this.processor.onaudioprocess = (event) => {
      this.chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
    };
    source.connect(this.processor);
    this.processor.connect(this.context.destination);
    this.recording = true;
    this.timer = setTimeout(() => {
      if (this.recording) {
        const result = this.finish();
        onAutoStop?.(result);
      }
    }, MAX_RECORD_SECONDS * 1000);
  }

  stop(): RecordingResult {
    if (!this.recording) throw new Error("not recording");
    return this.finish();
  }

  private finish(): RecordingResult {
    this.recording = false;
    if (this.timer) clearTimeout(this.timer);
    const rate = this.context?.sampleRate ?? 48000;
    this.processor?.disconnect();
    this.stream?.getTracks().forEach((t) => t.stop());
    void this.context?.close();

    const total = this.chunks.reduce((acc, c) => acc + c.length, 0);
    const joined = new Float32Array(total);
    let offset = 0;
    for (const chunk of this.chunks) {
      joined.set(chunk, offset);
      offset += chunk.length;
    }
    const blob = captureToWavBlob([joined], rate);
    return { blob, seconds: total / rate };
  }
}
