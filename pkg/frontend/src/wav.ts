/** Minimal RIFF/WAV reader and writer (PCM16 and float32, mono mix-down). */

export interface AudioClip {
  samples: Float64Array;
  sampleRate: number;
}

export function readWav(data: Buffer): AudioClip {
  if (data.length < 12 || data.toString("ascii", 0, 4) !== "RIFF" || data.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error("not a RIFF/WAVE file");
  }
  let offset = 12;
  let format = 0;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let payload: Buffer | null = null;
  while (offset + 8 <= data.length) {
    const id = data.toString("ascii", offset, offset + 4);
    const size = data.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (id === "fmt ") {
      format = data.readUInt16LE(body);
      channels = data.readUInt16LE(body + 2);
      sampleRate = data.readUInt32LE(body + 4);
      bitsPerSample = data.readUInt16LE(body + 14);
    } else if (id === "data") {
      payload = data.subarray(body, body + size);
    }
    offset = body + size + (size % 2); // chunks are word-aligned
  }
  if (!payload || channels < 1 || sampleRate < 1) {
    throw new Error("missing fmt or data chunk");
  }

  let decode: (frame: number, channel: number) => number;
  let bytesPerSample: number;
  if (format === 1 && bitsPerSample === 16) {
    bytesPerSample = 2;
    decode = (frame, ch) => payload!.readInt16LE((frame * channels + ch) * 2) / 32768;
  } else if (format === 3 && bitsPerSample === 32) {
    bytesPerSample = 4;
    decode = (frame, ch) => payload!.readFloatLE((frame * channels + ch) * 4);
  } else {
    throw new Error(`unsupported WAV encoding (format ${format}, ${bitsPerSample}-bit)`);
  }

  const nFrames = Math.floor(payload.length / (bytesPerSample * channels));
  const samples = new Float64Array(nFrames);
  for (let i = 0; i < nFrames; i++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) acc += decode(i, ch);
    samples[i] = acc / channels;
  }
  return { samples, sampleRate };
}

export function writeWavPcm16(clip: AudioClip): Buffer {
  const n = clip.samples.length;
  const buf = Buffer.alloc(44 + 2 * n);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + 2 * n, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(1, 22); // mono
  buf.writeUInt32LE(clip.sampleRate, 24);
  buf.writeUInt32LE(clip.sampleRate * 2, 28);
  buf.writeUInt16LE(2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(2 * n, 40);
  for (let i = 0; i < n; i++) {
    const clamped = Math.max(-1, Math.min(1, clip.samples[i]));
    buf.writeInt16LE(Math.round(clamped * 32767), 44 + 2 * i);
  }
  return buf;
}
