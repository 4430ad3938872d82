/**
 * Synthesize the reference audio fixtures and run all three exporters on
 * them, leaving interchange files in ../exports for cross-package contract
 * tests. Everything is deterministic.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { runExport } from "../src/export.js";
import { writeWavPcm16, type AudioClip } from "../src/wav.js";

const SAMPLE_RATE = 16000;

function tone(freqHz: number, durationS: number, amplitude = 0.3): AudioClip {
  const n = Math.round(durationS * SAMPLE_RATE);
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = amplitude * Math.sin((2 * Math.PI * freqHz * i) / SAMPLE_RATE);
  }
  return { samples, sampleRate: SAMPLE_RATE };
}

/** Exponential sweep covering log2Ratio octaves from fStart. */
function sweep(fStartHz: number, log2Ratio: number, durationS: number, amplitude = 0.3): AudioClip {
  const n = Math.round(durationS * SAMPLE_RATE);
  const samples = new Float64Array(n);
  let phase = 0;
  for (let i = 0; i < n; i++) {
    const t = i / SAMPLE_RATE;
    const freq = fStartHz * Math.pow(2, (log2Ratio * t) / durationS);
    phase += (2 * Math.PI * freq) / SAMPLE_RATE;
    samples[i] = amplitude * Math.sin(phase);
  }
  return { samples, sampleRate: SAMPLE_RATE };
}

/** Alternating low/high tone bursts with silent gaps, a call-like shape. */
function callLike(durationS: number): AudioClip {
  const n = Math.round(durationS * SAMPLE_RATE);
  const samples = new Float64Array(n);
  const burstS = 0.18;
  const gapS = 0.07;
  let t0 = 0.05;
  let low = true;
  while (t0 + burstS < durationS) {
    const freq = low ? 420 : 2400;
    const start = Math.round(t0 * SAMPLE_RATE);
    const len = Math.round(burstS * SAMPLE_RATE);
    for (let i = 0; i < len; i++) {
      const ramp = Math.min(1, i / 160, (len - i) / 160);
      samples[start + i] = 0.3 * ramp * Math.sin((2 * Math.PI * freq * i) / SAMPLE_RATE);
    }
    t0 += burstS + gapS;
    low = !low;
  }
  return { samples, sampleRate: SAMPLE_RATE };
}

const here = dirname(fileURLToPath(import.meta.url));
const exportsDir = join(here, "..", "..", "exports");
const audioDir = join(exportsDir, "audio");
mkdirSync(audioDir, { recursive: true });

const fixtures: Array<[string, AudioClip]> = [
  ["tone700", tone(700, 2.0)],
  ["sweep", sweep(400, 1.0, 1.0)],
  ["call", callLike(1.5)],
];

const wavPaths: string[] = [];
for (const [name, clip] of fixtures) {
  const path = join(audioDir, `${name}.wav`);
  writeFileSync(path, writeWavPcm16(clip));
  wavPaths.push(path);
}

for (const kind of ["features", "pitch", "phones"] as const) {
  for (const path of runExport(kind, wavPaths, exportsDir)) {
    process.stdout.write(path + "\n");
  }
}
