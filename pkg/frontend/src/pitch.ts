/**
 * Pitch export: per-frame f0 with confidence and energy on a fixed hop grid.
 *
 * This is a classical autocorrelation-family estimator (cumulative-mean
 * normalized difference with parabolic interpolation). It fills the same
 * interchange rows a neural pitch model would, so downstream consumers never
 * see the difference.
 */

import { frameCount, frameEnergyDb, frameSignal } from "./dsp.js";
import type { AudioClip } from "./wav.js";

export interface PitchOptions {
  hopSeconds?: number;
  winSeconds?: number;
  fMin?: number;
  fMax?: number;
  voicingThreshold?: number;
  cmndThreshold?: number;
}

export interface PitchFrame {
  timeS: number;
  /** 0 means unvoiced. */
  f0Hz: number;
  confidence: number;
  energyDb: number;
}

const DEFAULTS = {
  hopSeconds: 0.03125,
  winSeconds: 0.064,
  fMin: 30,
  fMax: 8000,
  voicingThreshold: 0.5,
  cmndThreshold: 0.1,
};

/** d(tau) = sum_j (x[j] - x[j+tau])^2, j over the part of the frame that fits. */
function differenceFunction(frame: Float64Array, tauMax: number): Float64Array {
  const d = new Float64Array(tauMax + 1);
  for (let tau = 1; tau <= tauMax; tau++) {
    let acc = 0;
    for (let j = 0; j + tau < frame.length; j++) {
      const diff = frame[j] - frame[j + tau];
      acc += diff * diff;
    }
    d[tau] = acc;
  }
  return d;
}

function cumulativeMeanNormalized(d: Float64Array): Float64Array {
  const out = new Float64Array(d.length);
  out[0] = 1;
  let runningSum = 0;
  for (let tau = 1; tau < d.length; tau++) {
    runningSum += d[tau];
    out[tau] = runningSum > 0 ? (d[tau] * tau) / runningSum : 1;
  }
  return out;
}

/** Refine a trough location with a parabola through its neighbors. */
function parabolicMin(values: Float64Array, tau: number): number {
  if (tau <= 0 || tau >= values.length - 1) return tau;
  const a = values[tau - 1];
  const b = values[tau];
  const c = values[tau + 1];
  const denom = a - 2 * b + c;
  if (Math.abs(denom) < 1e-30) return tau;
  const shift = (0.5 * (a - c)) / denom;
  return tau + Math.max(-0.5, Math.min(0.5, shift));
}

export function estimatePitch(clip: AudioClip, options: PitchOptions = {}): PitchFrame[] {
  const cfg = { ...DEFAULTS, ...options };
  const fMax = Math.min(cfg.fMax, 0.95 * (clip.sampleRate / 2));
  if (cfg.fMin >= fMax) {
    throw new Error(`fMin ${cfg.fMin} must be below fMax ${fMax}`);
  }
  const frames = frameSignal(clip.samples, clip.sampleRate, cfg.hopSeconds, cfg.winSeconds);
  const energy = frameEnergyDb(clip.samples, clip.sampleRate, cfg.hopSeconds, cfg.winSeconds);
  const nFrames = frameCount(clip.samples.length, clip.sampleRate, cfg.hopSeconds);
  const tauMin = Math.max(2, Math.floor(clip.sampleRate / fMax));
  const tauMax = Math.min(frames[0].length - 2, Math.ceil(clip.sampleRate / cfg.fMin));

  const rows: PitchFrame[] = [];
  for (let f = 0; f < nFrames; f++) {
    const cmnd = cumulativeMeanNormalized(differenceFunction(frames[f], tauMax));

    // first trough below the threshold wins; otherwise the global minimum
    let pick = -1;
    for (let tau = tauMin; tau <= tauMax; tau++) {
      if (cmnd[tau] < cfg.cmndThreshold && cmnd[tau] <= cmnd[tau + 1 <= tauMax ? tau + 1 : tau]) {
        pick = tau;
        break;
      }
    }
    if (pick < 0) {
      let best = tauMin;
      for (let tau = tauMin + 1; tau <= tauMax; tau++) {
        if (cmnd[tau] < cmnd[best]) best = tau;
      }
      pick = best;
    }

    const confidence = Math.max(0, Math.min(1, 1 - cmnd[pick]));
    const refined = parabolicMin(cmnd, pick);
    let f0 = clip.sampleRate / refined;
    if (confidence < cfg.voicingThreshold || f0 < cfg.fMin || f0 > fMax) {
      f0 = 0;
    }
    rows.push({
      timeS: f * cfg.hopSeconds,
      f0Hz: f0,
      confidence,
      energyDb: energy[f],
    });
  }
  return rows;
}
