import type { AudioClip } from "../src/wav.js";

export const SR = 16000;

export function tone(freqHz: number, durationS: number, amplitude = 0.3, sampleRate = SR): AudioClip {
  const n = Math.round(durationS * sampleRate);
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = amplitude * Math.sin((2 * Math.PI * freqHz * i) / sampleRate);
  }
  return { samples, sampleRate };
}

export function silence(durationS: number, sampleRate = SR): AudioClip {
  return { samples: new Float64Array(Math.round(durationS * sampleRate)), sampleRate };
}

export function sweep(fStartHz: number, log2Ratio: number, durationS: number, amplitude = 0.3, sampleRate = SR): AudioClip {
  const n = Math.round(durationS * sampleRate);
  const samples = new Float64Array(n);
  let phase = 0;
  for (let i = 0; i < n; i++) {
    const t = i / sampleRate;
    const freq = fStartHz * Math.pow(2, (log2Ratio * t) / durationS);
    phase += (2 * Math.PI * freq) / sampleRate;
    samples[i] = amplitude * Math.sin(phase);
  }
  return { samples, sampleRate };
}

/** Deterministic white-ish noise from a tiny LCG, amplitude-bounded. */
export function noise(durationS: number, amplitude = 0.2, seed = 1, sampleRate = SR): AudioClip {
  const n = Math.round(durationS * sampleRate);
  const samples = new Float64Array(n);
  let state = seed >>> 0;
  for (let i = 0; i < n; i++) {
    state = (1664525 * state + 1013904223) >>> 0;
    samples[i] = amplitude * ((state / 2 ** 31) - 1);
  }
  return { samples, sampleRate };
}

/** Tone bursts at alternating registers separated by silence. */
export function bursts(durationS: number, sampleRate = SR): AudioClip {
  const n = Math.round(durationS * sampleRate);
  const samples = new Float64Array(n);
  const burstS = 0.18;
  const gapS = 0.07;
  let t0 = 0.05;
  let low = true;
  while (t0 + burstS < durationS) {
    const freq = low ? 420 : 2400;
    const start = Math.round(t0 * sampleRate);
    const len = Math.round(burstS * sampleRate);
    for (let i = 0; i < len; i++) {
      const ramp = Math.min(1, i / 160, (len - i) / 160);
      samples[start + i] = 0.3 * ramp * Math.sin((2 * Math.PI * freq * i) / sampleRate);
    }
    t0 += burstS + gapS;
    low = !low;
  }
  return { samples, sampleRate };
}
