/** Small DSP kernel shared by the exporters: framing, windows, FFT, mel. */

/** Symmetric Hann window of length n (matches numpy.hanning). */
export function hann(n: number): Float64Array {
  const w = new Float64Array(n);
  if (n === 1) {
    w[0] = 1;
    return w;
  }
  for (let i = 0; i < n; i++) {
    w[i] = 0.5 - 0.5 * Math.cos((2 * Math.PI * i) / (n - 1));
  }
  return w;
}

/** Number of frames covering a signal: ceil(duration / hop), at least 1. */
export function frameCount(nSamples: number, sampleRate: number, hopSeconds: number): number {
  const duration = nSamples / sampleRate;
  return Math.max(1, Math.ceil(duration / hopSeconds - 1e-9));
}

function reflectIndex(i: number, n: number): number {
  // numpy-style "reflect" (no repeated edge sample), defined for n > 1
  if (n === 1) return 0;
  const period = 2 * (n - 1);
  let j = ((i % period) + period) % period;
  if (j >= n) j = period - j;
  return j;
}

/**
 * Slice a signal into overlapping frames centered on the hop grid.
 * Frame i covers a window of winSeconds centered at i * hopSeconds with
 * reflection padding at the edges.
 */
export function frameSignal(
  samples: Float64Array,
  sampleRate: number,
  hopSeconds: number,
  winSeconds: number,
): Float64Array[] {
  const hop = Math.round(hopSeconds * sampleRate);
  const win = Math.round(winSeconds * sampleRate);
  if (hop < 1 || win < 1) {
    throw new Error("hop and window must span at least one sample");
  }
  const nFrames = frameCount(samples.length, sampleRate, hopSeconds);
  const half = Math.floor(win / 2);
  const frames: Float64Array[] = [];
  for (let f = 0; f < nFrames; f++) {
    const frame = new Float64Array(win);
    const start = f * hop - half;
    for (let j = 0; j < win; j++) {
      frame[j] = samples[reflectIndex(start + j, samples.length)];
    }
    frames.push(frame);
  }
  return frames;
}

/** Hann-weighted frame energy in dBFS, floored at -120 dB. */
export function frameEnergyDb(
  samples: Float64Array,
  sampleRate: number,
  hopSeconds: number,
  winSeconds: number,
): Float64Array {
  const frames = frameSignal(samples, sampleRate, hopSeconds, winSeconds);
  const win = hann(frames[0].length);
  let wsum = 0;
  for (let i = 0; i < win.length; i++) wsum += win[i];
  if (wsum <= 0) {
    win.fill(1);
    wsum = win.length;
  }
  const db = new Float64Array(frames.length);
  for (let f = 0; f < frames.length; f++) {
    let meanSq = 0;
    const frame = frames[f];
    for (let i = 0; i < frame.length; i++) meanSq += frame[i] * frame[i] * win[i];
    meanSq /= wsum;
    const rms = Math.max(Math.sqrt(meanSq), 1e-6);
    db[f] = Math.max(20 * Math.log10(rms), -120);
  }
  return db;
}

export function nextPowerOfTwo(n: number): number {
  let p = 1;
  while (p < n) p *= 2;
  return p;
}

/** In-place iterative radix-2 FFT; re/im lengths must be a power of two. */
export function fft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if (n !== im.length || (n & (n - 1)) !== 0) {
    throw new Error("fft requires power-of-two buffers of equal length");
  }
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = (-2 * Math.PI) / len;
    const wRe = Math.cos(ang);
    const wIm = Math.sin(ang);
    for (let i = 0; i < n; i += len) {
      let curRe = 1;
      let curIm = 0;
      for (let j = 0; j < len / 2; j++) {
        const aRe = re[i + j];
        const aIm = im[i + j];
        const bRe = re[i + j + len / 2] * curRe - im[i + j + len / 2] * curIm;
        const bIm = re[i + j + len / 2] * curIm + im[i + j + len / 2] * curRe;
        re[i + j] = aRe + bRe;
        im[i + j] = aIm + bIm;
        re[i + j + len / 2] = aRe - bRe;
        im[i + j + len / 2] = aIm - bIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

/** Magnitude spectrum of a real frame zero-padded to nFft (bins 0..nFft/2). */
export function magnitudeSpectrum(frame: Float64Array, nFft: number): Float64Array {
  if (frame.length > nFft) throw new Error("frame longer than FFT size");
  const re = new Float64Array(nFft);
  const im = new Float64Array(nFft);
  re.set(frame);
  fft(re, im);
  const mags = new Float64Array(nFft / 2 + 1);
  for (let k = 0; k <= nFft / 2; k++) {
    mags[k] = Math.hypot(re[k], im[k]);
  }
  return mags;
}

function hzToMel(hz: number): number {
  return 2595 * Math.log10(1 + hz / 700);
}

function melToHz(mel: number): number {
  return 700 * (Math.pow(10, mel / 2595) - 1);
}

/** Triangular mel filterbank over FFT bins 0..nFft/2, spanning 0..Nyquist. */
export function melFilterbank(nBands: number, nFft: number, sampleRate: number): Float64Array[] {
  const nBins = nFft / 2 + 1;
  const maxMel = hzToMel(sampleRate / 2);
  const edges: number[] = [];
  for (let i = 0; i < nBands + 2; i++) {
    edges.push(melToHz((maxMel * i) / (nBands + 1)));
  }
  const bank: Float64Array[] = [];
  for (let b = 0; b < nBands; b++) {
    const filt = new Float64Array(nBins);
    const [lo, mid, hi] = [edges[b], edges[b + 1], edges[b + 2]];
    for (let k = 0; k < nBins; k++) {
      const freq = (k * sampleRate) / nFft;
      const up = (freq - lo) / Math.max(mid - lo, 1e-12);
      const down = (hi - freq) / Math.max(hi - mid, 1e-12);
      filt[k] = Math.max(0, Math.min(up, down));
    }
    bank.push(filt);
  }
  return bank;
}

/** Magnitude-weighted spectral centroid of one frame, in Hz. */
export function spectralCentroid(frame: Float64Array, nFft: number, sampleRate: number): number {
  const mags = magnitudeSpectrum(frame, nFft);
  let total = 0;
  let weighted = 0;
  for (let k = 0; k < mags.length; k++) {
    const power = mags[k] * mags[k];
    total += power;
    weighted += power * ((k * sampleRate) / nFft);
  }
  return total > 1e-20 ? weighted / total : 0;
}
