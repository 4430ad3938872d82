/**
 * Frame-level feature embedders behind a common interface.
 *
 * The `spectral` model is built in and depends on nothing: it stacks
 * log-mel spectra of the previous, current, and next frame into one
 * 768-dimensional vector per 20 ms hop, which keeps the interchange
 * contract (dim, hop, frame count) identical to a pretrained embedder's
 * output. Pretrained embedders plug in by name and fail loudly when
 * their weights are not installed.
 */

import { existsSync } from "node:fs";

import { frameSignal, melFilterbank, magnitudeSpectrum, nextPowerOfTwo } from "./dsp.js";
import type { FeatureData } from "./ispf.js";
import type { AudioClip } from "./wav.js";

export interface FeatureModel {
  readonly name: string;
  readonly dim: number;
  readonly hopSeconds: number;
  embed(clip: AudioClip): FeatureData;
}

const MEL_BANDS = 256;
const CONTEXT = [-1, 0, 1];
const WIN_SECONDS = 0.04;

export class SpectralEmbedder implements FeatureModel {
  readonly name = "spectral";
  readonly dim = MEL_BANDS * CONTEXT.length;
  readonly hopSeconds: number;

  constructor(hopSeconds = 0.02) {
    if (hopSeconds <= 0) throw new Error("hopSeconds must be positive");
    this.hopSeconds = hopSeconds;
  }

  embed(clip: AudioClip): FeatureData {
    const frames = frameSignal(clip.samples, clip.sampleRate, this.hopSeconds, WIN_SECONDS);
    const winSamples = frames[0].length;
    const nFft = nextPowerOfTwo(Math.max(winSamples, 512));
    const bank = melFilterbank(MEL_BANDS, nFft, clip.sampleRate);

    const logMel: Float64Array[] = frames.map((frame) => {
      const mags = magnitudeSpectrum(frame, nFft);
      const row = new Float64Array(MEL_BANDS);
      for (let b = 0; b < MEL_BANDS; b++) {
        let acc = 0;
        const filt = bank[b];
        for (let k = 0; k < mags.length; k++) acc += filt[k] * mags[k] * mags[k];
        row[b] = Math.log(Math.max(acc, 1e-10));
      }
      return row;
    });

    const values = new Float32Array(frames.length * this.dim);
    for (let t = 0; t < frames.length; t++) {
      for (let c = 0; c < CONTEXT.length; c++) {
        const src = Math.min(frames.length - 1, Math.max(0, t + CONTEXT[c]));
        values.set(logMel[src], t * this.dim + c * MEL_BANDS);
      }
    }
    return { hopSeconds: this.hopSeconds, startTimeS: 0, dim: this.dim, values };
  }
}

/** Pretrained embedders resolvable by name; absent weights fail the load. */
const PRETRAINED_WEIGHT_PATHS: Record<string, string> = {
  aves: "models/aves-bio.onnx",
};

export function loadFeatureModel(name = "spectral"): FeatureModel {
  if (name === "spectral") return new SpectralEmbedder();
  const weights = PRETRAINED_WEIGHT_PATHS[name];
  if (weights === undefined) {
    throw new Error(`unknown feature model '${name}'`);
  }
  if (!existsSync(weights)) {
    throw new Error(`model load failure: '${name}' weights not found at ${weights}`);
  }
  throw new Error(`model load failure: no runtime registered for '${name}'`);
}
