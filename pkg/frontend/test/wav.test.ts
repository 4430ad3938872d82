import { describe, expect, it } from "vitest";

import { readWav, writeWavPcm16 } from "../src/wav.js";
import { tone, SR } from "./helpers.js";

describe("writeWavPcm16 / readWav", () => {
  it("round-trips a mono tone within quantization error", () => {
    const clip = tone(440, 0.25);
    const back = readWav(writeWavPcm16(clip));
    expect(back.sampleRate).toBe(SR);
    expect(back.samples.length).toBe(clip.samples.length);
    for (let i = 0; i < clip.samples.length; i += 37) {
      expect(Math.abs(back.samples[i] - clip.samples[i])).toBeLessThan(1 / 32000);
    }
  });

  it("clamps out-of-range samples instead of wrapping", () => {
    const clip = { samples: Float64Array.from([2, -2, 0.5]), sampleRate: 8000 };
    const back = readWav(writeWavPcm16(clip));
    expect(back.samples[0]).toBeCloseTo(32767 / 32768, 3);
    expect(back.samples[1]).toBeCloseTo(-32767 / 32768, 3);
  });
});

function stereoPcm16(left: number[], right: number[], sampleRate: number): Buffer {
  const n = left.length;
  const buf = Buffer.alloc(44 + 4 * n);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + 4 * n, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20);
  buf.writeUInt16LE(2, 22);
  buf.writeUInt32LE(sampleRate, 24);
  buf.writeUInt32LE(sampleRate * 4, 28);
  buf.writeUInt16LE(4, 32);
  buf.writeUInt16LE(16, 34);
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(4 * n, 40);
  for (let i = 0; i < n; i++) {
    buf.writeInt16LE(left[i], 44 + 4 * i);
    buf.writeInt16LE(right[i], 46 + 4 * i);
  }
  return buf;
}

describe("readWav decoding", () => {
  it("mixes stereo down to mono", () => {
    const buf = stereoPcm16([16384, 0], [0, -16384], 8000);
    const clip = readWav(buf);
    expect(clip.samples.length).toBe(2);
    expect(clip.samples[0]).toBeCloseTo(0.25, 6);
    expect(clip.samples[1]).toBeCloseTo(-0.25, 6);
  });

  it("reads IEEE float32 data", () => {
    const n = 3;
    const buf = Buffer.alloc(44 + 4 * n);
    buf.write("RIFF", 0, "ascii");
    buf.writeUInt32LE(36 + 4 * n, 4);
    buf.write("WAVE", 8, "ascii");
    buf.write("fmt ", 12, "ascii");
    buf.writeUInt32LE(16, 16);
    buf.writeUInt16LE(3, 20); // IEEE float
    buf.writeUInt16LE(1, 22);
    buf.writeUInt32LE(16000, 24);
    buf.writeUInt32LE(64000, 28);
    buf.writeUInt16LE(4, 32);
    buf.writeUInt16LE(32, 34);
    buf.write("data", 36, "ascii");
    buf.writeUInt32LE(4 * n, 40);
    buf.writeFloatLE(0.5, 44);
    buf.writeFloatLE(-0.125, 48);
    buf.writeFloatLE(1.0, 52);
    const clip = readWav(buf);
    expect(Array.from(clip.samples)).toEqual([0.5, -0.125, 1.0]);
  });

  it("rejects non-WAV bytes", () => {
    expect(() => readWav(Buffer.from("definitely not audio"))).toThrow(/RIFF/);
  });

  it("rejects unsupported encodings", () => {
    const buf = writeWavPcm16(tone(440, 0.01));
    buf.writeUInt16LE(8, 34); // claim 8-bit PCM
    expect(() => readWav(buf)).toThrow(/unsupported/);
  });

  it("rejects files without a data chunk", () => {
    const buf = writeWavPcm16(tone(440, 0.01)).subarray(0, 36);
    expect(() => readWav(Buffer.from(buf))).toThrow(/chunk/);
  });
});
